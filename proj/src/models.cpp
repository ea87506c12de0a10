#include "arrowid/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace arrowid {

namespace {

// Coefficients of the strictly proper part of H(s) written over the monic
// denominator: H(s) = d + (b1 s + b0) / (s^2 + 2 zeta omega s + omega^2).
struct ProperNumerator {
    double b1 = 0.0;
    double b0 = 0.0;
    double d = 0.0;
};

ProperNumerator strictly_proper_numerator(const SecondOrderModel& m) {
    const double gw2 = m.gain * m.omega * m.omega;
    switch (m.kind) {
        case ModelKind::NoZero:
            return {0.0, gw2, 0.0};
        case ModelKind::OneZero:
            return {gw2 / m.zero, gw2, 0.0};
        case ModelKind::ZeroPair: {
            // H = d (s^2 + 2 xi zc s + zc^2) / d(s); peel off the feedthrough:
            //   H = d + d ((2 xi zc - 2 zeta w) s + (zc^2 - w^2)) / d(s).
            const double d = gw2 / (m.zero_freq * m.zero_freq);
            return {d * (2.0 * m.zero_damping * m.zero_freq - 2.0 * m.zeta * m.omega),
                    d * (m.zero_freq * m.zero_freq - m.omega * m.omega), d};
        }
    }
    throw std::invalid_argument("unknown model kind");
}

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::NoZero: return "no-zero";
        case ModelKind::OneZero: return "one-zero";
        case ModelKind::ZeroPair: return "zero-pair";
    }
    return "?";
}

SecondOrderModel make_no_zero(double gain, double zeta, double omega) {
    SecondOrderModel m{ModelKind::NoZero, gain, zeta, omega, 0.0, 0.0, 0.0};
    validate(m);
    return m;
}

SecondOrderModel make_one_zero(double gain, double zeta, double omega, double zero) {
    SecondOrderModel m{ModelKind::OneZero, gain, zeta, omega, zero, 0.0, 0.0};
    validate(m);
    return m;
}

SecondOrderModel make_zero_pair(double gain, double zeta, double omega, double zero_freq,
                                double zero_damping) {
    SecondOrderModel m{ModelKind::ZeroPair, gain, zeta, omega, 0.0, zero_freq, zero_damping};
    validate(m);
    return m;
}

void validate(const SecondOrderModel& m) {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(m.gain) || m.gain == 0.0)
        throw std::invalid_argument("model: gain must be finite and nonzero");
    if (!finite(m.zeta) || !(m.zeta > 0.0))
        throw std::invalid_argument("model: zeta must be positive");
    if (!finite(m.omega) || !(m.omega > 0.0))
        throw std::invalid_argument("model: omega must be positive");
    switch (m.kind) {
        case ModelKind::NoZero:
            break;
        case ModelKind::OneZero:
            if (!finite(m.zero) || m.zero == 0.0)
                throw std::invalid_argument("model: zero must be finite and nonzero");
            break;
        case ModelKind::ZeroPair:
            if (!finite(m.zero_freq) || !(m.zero_freq > 0.0))
                throw std::invalid_argument("model: zero_freq must be positive");
            if (!finite(m.zero_damping) || m.zero_damping < 0.0 || m.zero_damping >= 1.0)
                throw std::invalid_argument("model: zero_damping must lie in [0, 1)");
            break;
    }
}

TransferFunctionShape transfer_function(const SecondOrderModel& m) {
    validate(m);
    TransferFunctionShape shape;
    const double a = m.zeta * m.omega;
    if (m.zeta < 1.0) {
        const double wd = m.omega * std::sqrt(1.0 - m.zeta * m.zeta);
        shape.poles = {std::complex<double>(-a, wd), std::complex<double>(-a, -wd)};
    } else {
        const double wr = m.omega * std::sqrt(m.zeta * m.zeta - 1.0);
        shape.poles = {std::complex<double>(-a + wr, 0.0), std::complex<double>(-a - wr, 0.0)};
    }
    switch (m.kind) {
        case ModelKind::NoZero:
            break;
        case ModelKind::OneZero:
            shape.zeros = {std::complex<double>(-m.zero, 0.0)};
            break;
        case ModelKind::ZeroPair: {
            const double az = m.zero_damping * m.zero_freq;
            const double wz = m.zero_freq * std::sqrt(1.0 - m.zero_damping * m.zero_damping);
            shape.zeros = {std::complex<double>(-az, wz), std::complex<double>(-az, -wz)};
            shape.feedthrough = m.gain * m.omega * m.omega / (m.zero_freq * m.zero_freq);
            break;
        }
    }
    return shape;
}

std::complex<double> frequency_response(const SecondOrderModel& m, double omega_eval) {
    validate(m);
    if (!std::isfinite(omega_eval))
        throw std::invalid_argument("frequency_response: frequency must be finite");
    const std::complex<double> s(0.0, omega_eval);
    const std::complex<double> den = s * s + 2.0 * m.zeta * m.omega * s + m.omega * m.omega;
    const double gw2 = m.gain * m.omega * m.omega;
    switch (m.kind) {
        case ModelKind::NoZero:
            return gw2 / den;
        case ModelKind::OneZero:
            return gw2 * (s + m.zero) / (m.zero * den);
        case ModelKind::ZeroPair: {
            const std::complex<double> num =
                s * s + 2.0 * m.zero_damping * m.zero_freq * s + m.zero_freq * m.zero_freq;
            return gw2 * num / (m.zero_freq * m.zero_freq * den);
        }
    }
    throw std::invalid_argument("unknown model kind");
}

double impulse_response(const SecondOrderModel& m, double t) {
    validate(m);
    if (t < 0.0) throw std::invalid_argument("impulse_response: t must be >= 0");
    if (std::abs(m.zeta - 1.0) <= 1e-6)
        throw std::domain_error(
            "impulse_response: closed forms degenerate near critical damping; use simulate_zoh");

    const ProperNumerator num = strictly_proper_numerator(m);
    const double a = m.zeta * m.omega;
    if (m.zeta < 1.0) {
        const double wd = m.omega * std::sqrt(1.0 - m.zeta * m.zeta);
        return std::exp(-a * t) *
               (num.b1 * std::cos(wd * t) + (num.b0 - a * num.b1) / wd * std::sin(wd * t));
    }
    // Real poles p = -a +/- wr. Written with explicit exponentials of the
    // (negative) pole locations so large t underflows to zero instead of
    // overflowing a cosh/sinh intermediate.
    const double wr = m.omega * std::sqrt(m.zeta * m.zeta - 1.0);
    const double ep = std::exp((-a + wr) * t);
    const double em = std::exp((-a - wr) * t);
    return num.b1 * 0.5 * (ep + em) + (num.b0 - a * num.b1) / (2.0 * wr) * (ep - em);
}

Vector sampled_impulse_response(const SecondOrderModel& m, double dt, Index count) {
    if (!(dt > 0.0)) throw std::invalid_argument("sampled_impulse_response: dt must be positive");
    if (count < 1) throw std::invalid_argument("sampled_impulse_response: count must be >= 1");
    Vector taps(count);
    for (Index k = 0; k < count; ++k) taps[k] = impulse_response(m, static_cast<double>(k) * dt);
    return taps;
}

StateSpace to_state_space(const SecondOrderModel& m) {
    validate(m);
    const ProperNumerator num = strictly_proper_numerator(m);
    StateSpace ss;
    ss.A << 0.0, 1.0, -m.omega * m.omega, -2.0 * m.zeta * m.omega;
    ss.B << 0.0, 1.0;
    ss.C << num.b0, num.b1;
    ss.D = num.d;
    return ss;
}

DiscreteStateSpace discretize_zoh(const StateSpace& ss, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("discretize_zoh: dt must be positive");
    // exp([[A, B], [0, 0]] dt) packs the held-input integral into the top
    // right block: the top rows come out [Ad, Bd].
    Eigen::Matrix3d aug = Eigen::Matrix3d::Zero();
    aug.topLeftCorner<2, 2>() = ss.A;
    aug.topRightCorner<2, 1>() = ss.B;
    const Eigen::Matrix3d expm = (aug * dt).exp();
    DiscreteStateSpace d;
    d.Ad = expm.topLeftCorner<2, 2>();
    d.Bd = expm.topRightCorner<2, 1>();
    d.C = ss.C;
    d.D = ss.D;
    return d;
}

TimeSeries simulate_zoh(const SecondOrderModel& m, const TimeSeries& force) {
    validate(force, "simulate_zoh: force");
    const DiscreteStateSpace d = discretize_zoh(to_state_space(m), force.dt);

    const Index n = force.values.size();
    TimeSeries y{force.dt, Vector(n)};
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    for (Index k = 0; k < n; ++k) {
        const double u = force.values[k];
        y.values[k] = d.C * x + d.D * u;
        x = d.Ad * x + d.Bd * u;
    }
    return y;
}

BodeData bode(const SecondOrderModel& m, const Vector& frequencies) {
    validate(m);
    if (frequencies.size() < 1) throw std::invalid_argument("bode: empty frequency grid");
    BodeData data;
    data.frequencies = frequencies;
    data.magnitude.resize(frequencies.size());
    data.phase_rad.resize(frequencies.size());
    for (Index i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > 0.0) || !std::isfinite(frequencies[i]))
            throw std::invalid_argument("bode: frequencies must be positive and finite");
        const std::complex<double> h = frequency_response(m, frequencies[i]);
        data.magnitude[i] = std::abs(h);
        data.phase_rad[i] = std::arg(h);
    }
    return data;
}

double stiffness_from_static_spine(const SpineRating& rating) {
    if (!(rating.deflection_m > 0.0) || !std::isfinite(rating.deflection_m))
        throw std::invalid_argument("stiffness_from_static_spine: deflection must be positive");
    constexpr double kTestLoadN = 8.6328;  // 1.94 lbf dead weight
    return kTestLoadN / rating.deflection_m;
}

double expected_frequency(double stiffness_N_per_m, double lumped_mass_kg) {
    if (!(stiffness_N_per_m > 0.0) || !std::isfinite(stiffness_N_per_m))
        throw std::invalid_argument("expected_frequency: stiffness must be positive");
    if (!(lumped_mass_kg > 0.0) || !std::isfinite(lumped_mass_kg))
        throw std::invalid_argument("expected_frequency: mass must be positive");
    return std::sqrt(stiffness_N_per_m / lumped_mass_kg) / (2.0 * M_PI);
}

}  // namespace arrowid
