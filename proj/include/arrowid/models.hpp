#pragma once

#include <array>
#include <complex>
#include <vector>

#include "arrowid/types.hpp"

namespace arrowid {

/// Structure of the force-to-displacement transfer function. All three kinds
/// share the second-order denominator s^2 + 2*zeta*omega*s + omega^2 and have
/// DC gain exactly `gain`; they differ in the numerator:
///   NoZero    H(s) = G w^2 / d(s)
///   OneZero   H(s) = G w^2 (s + z) / (z d(s))
///   ZeroPair  H(s) = G w^2 (s^2 + 2 xi zc s + zc^2) / (zc^2 d(s))
enum class ModelKind { NoZero, OneZero, ZeroPair };

const char* to_string(ModelKind kind);

struct SecondOrderModel {
    ModelKind kind = ModelKind::NoZero;
    double gain = 0.0;          // DC gain G, m/N
    double zeta = 0.0;          // pole damping ratio, dimensionless
    double omega = 0.0;         // pole natural frequency, rad/s
    double zero = 0.0;          // OneZero only: zero at s = -zero, rad/s
    double zero_freq = 0.0;     // ZeroPair only: zero-pair natural frequency zc, rad/s
    double zero_damping = 0.0;  // ZeroPair only: zero-pair damping ratio xi in [0, 1)
};

SecondOrderModel make_no_zero(double gain, double zeta, double omega);
SecondOrderModel make_one_zero(double gain, double zeta, double omega, double zero);
SecondOrderModel make_zero_pair(double gain, double zeta, double omega, double zero_freq,
                                double zero_damping);

/// Throws std::invalid_argument unless the fields are finite and satisfy
/// gain != 0, zeta > 0, omega > 0, plus the per-kind zero constraints
/// (zero != 0; zero_freq > 0 and 0 <= zero_damping < 1).
void validate(const SecondOrderModel& m);

/// Poles, zeros and direct feedthrough of the transfer function. Only the
/// ZeroPair kind has a nonzero feedthrough, D = G w^2 / zc^2.
struct TransferFunctionShape {
    std::array<std::complex<double>, 2> poles;
    std::vector<std::complex<double>> zeros;
    double feedthrough = 0.0;
};

TransferFunctionShape transfer_function(const SecondOrderModel& m);

/// H(i*omega_eval) at one frequency (rad/s).
std::complex<double> frequency_response(const SecondOrderModel& m, double omega_eval);

/// Closed-form impulse response of the strictly proper part of H(s) at time
/// t >= 0, in m/(N s). For ZeroPair the impulsive feedthrough term is not
/// included; callers that need it handle D separately. Throws
/// std::domain_error within 1e-6 of critical damping, where the closed forms
/// degenerate (simulate_zoh has no such restriction).
double impulse_response(const SecondOrderModel& m, double t);

/// impulse_response sampled at t = 0, dt, ..., (count-1)*dt.
Vector sampled_impulse_response(const SecondOrderModel& m, double dt, Index count);

/// Exact zero-order-hold response: the force is held constant across each
/// sample interval and the continuous-time model is stepped with the matrix
/// exponential of the interval. Initial state is rest. Output sample n is the
/// displacement at t = n*dt (with the feedthrough contribution for ZeroPair).
TimeSeries simulate_zoh(const SecondOrderModel& m, const TimeSeries& force);

/// Magnitude (absolute, m/N) and phase (radians) on a caller-supplied grid of
/// strictly positive frequencies in rad/s.
struct BodeData {
    Vector frequencies;
    Vector magnitude;
    Vector phase_rad;
};

BodeData bode(const SecondOrderModel& m, const Vector& frequencies);

/// Controllable-canonical state-space realization
///   x' = A x + B u,  y = C x + D u
/// with A = [[0, 1], [-w^2, -2 zeta w]].
struct StateSpace {
    Eigen::Matrix2d A;
    Eigen::Vector2d B;
    Eigen::RowVector2d C;
    double D = 0.0;
};

StateSpace to_state_space(const SecondOrderModel& m);

/// Zero-order-hold discretization of a state-space model, computed through
/// the exponential of the augmented matrix [[A, B], [0, 0]] * dt.
struct DiscreteStateSpace {
    Eigen::Matrix2d Ad;
    Eigen::Vector2d Bd;
    Eigen::RowVector2d C;
    double D = 0.0;
};

DiscreteStateSpace discretize_zoh(const StateSpace& ss, double dt);

/// Static rating of a shaft: the center deflection, in meters, under the
/// standard dead-weight bend test (8.6328 N across a 0.66 m span).
struct SpineRating {
    double deflection_m = 0.0;
};

/// Equivalent static stiffness, N/m: the test load divided by the deflection.
double stiffness_from_static_spine(const SpineRating& rating);

/// First-mode frequency, Hz, of a lumped mass on a spring:
///   f = sqrt(k / m) / (2 pi).
double expected_frequency(double stiffness_N_per_m, double lumped_mass_kg);

}  // namespace arrowid
