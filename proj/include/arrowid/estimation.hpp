#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "arrowid/models.hpp"
#include "arrowid/signals.hpp"
#include "arrowid/types.hpp"

namespace arrowid {

/// Default FIR length used by the identification pipeline.
inline constexpr Index kDefaultTapCount = 1501;

/// Non-parametric impulse-response estimate: taps[k] approximates the
/// continuous impulse response at t = k * dt, in m/(N s).
struct ImpulseResponseEstimate {
    double dt = 0.0;
    Vector taps;
};

/// Outcome of one parametric fit.
struct FitResult {
    SecondOrderModel model;
    double vaf_percent = 0.0;
    int iterations = 0;       // trial steps evaluated by the optimizer
    bool converged = false;
    double residual_norm = 0.0;
};

/// Mass/damper/spring equivalent of a NoZero model.
struct LumpedParams {
    double mass_kg = 0.0;
    double damping_Ns_per_m = 0.0;
    double stiffness_N_per_m = 0.0;
};

enum class SweepParameter { Gain, Damping, Frequency };

const char* to_string(SweepParameter p);

/// One-parameter sensitivity sweep: VAF of the fitted model re-simulated with
/// a single parameter swept across a relative range about its fitted value.
struct SensitivityCurve {
    SweepParameter parameter = SweepParameter::Gain;
    Vector grid;
    Vector vaf_percent;
};

/// mean +/- half the spread across repeated trials.
struct TrialAggregate {
    double mean = 0.0;
    double half_range = 0.0;
};

/// Tuning knobs of the damped Gauss-Newton search. The defaults are the ones
/// the pipeline uses; tests may tighten or loosen them.
struct LmOptions {
    double initial_lambda = 1e-3;
    int max_iterations = 200;       // cap on trial-step evaluations
    double step_tolerance = 1e-10;  // relative step size termination
    double cost_tolerance = 1e-12;  // relative cost decrease termination
    double fd_relative_step = 1e-6;
    double fd_step_floor = 1e-10;
};

struct LmDiagnostics {
    int iterations = 0;      // trial steps evaluated
    int accepted_steps = 0;  // trial steps that lowered the cost
    bool converged = false;
    double residual_norm = 0.0;
};

using ResidualFn = std::function<Vector(const Vector&)>;

/// Forward-difference Jacobian of fn at theta; r0 must be fn(theta). Columns
/// whose perturbed residual is non-finite come back zero.
Matrix forward_difference_jacobian(const ResidualFn& fn, const Vector& theta, const Vector& r0,
                                   const LmOptions& options = {});

/// Levenberg-Marquardt minimization of 0.5 * |fn(theta)|^2. The damping
/// parameter starts at initial_lambda, is multiplied by 10 on every rejected
/// (or non-finite) trial step and divided by 10 on every accepted one. The
/// best parameters seen are returned even when the search stops without
/// meeting a tolerance. Throws std::invalid_argument when the residual is
/// non-finite at theta0.
std::pair<Vector, LmDiagnostics> levenberg_marquardt(const ResidualFn& fn, Vector theta0,
                                                     const LmOptions& options = {});

/// Non-parametric FIR estimate by correlation + Toeplitz deconvolution:
///   T(r_uu) * (h * dt) = r_uy
/// with n_taps lags of the biased estimates. detrend removes sample means
/// before correlating.
ImpulseResponseEstimate estimate_fir(const Dataset& data, Index n_taps, bool detrend = false);

/// Heuristic NoZero starting point read off a FIR estimate: omega from the
/// dominant discrete-spectrum bin, zeta from the log-decrement of the first
/// two positive peaks (clamped to [0.05, 0.95], 0.3 when no two peaks exist),
/// gain from dt * sum(taps).
SecondOrderModel initial_guess(const ImpulseResponseEstimate& fir);

/// Noise-robust alternative starting point: integrates the taps into a step
/// response (which averages away wideband deconvolution noise) and reads
/// gain, damping and frequency from its final value, overshoot and peak time.
/// Falls back to initial_guess when the step response has no usable shape.
SecondOrderModel step_response_guess(const ImpulseResponseEstimate& fir);

/// Full parametric fit of one model kind to a dataset. When init is empty the
/// search restarts from both initial_guess and step_response_guess of a FIR
/// estimate and keeps the higher-VAF outcome; with init given, exactly that
/// starting point is used. Zero parameters missing from init are defaulted
/// (zero = 10*omega, zero_freq = 3*omega, zero_damping = 0.3). zeta, omega,
/// zero and zero_freq are optimized in log space so they stay positive;
/// zero_damping outside [0, 1) is rejected during the search.
FitResult fit_parametric(const Dataset& data, ModelKind kind,
                         std::optional<SecondOrderModel> init = {},
                         const LmOptions& options = {});

/// VAF of the FIR prediction convolved from the recorded force. h.dt must
/// match data.dt.
double nonparametric_vaf(const Dataset& data, const ImpulseResponseEstimate& h);

/// M, B, K of the single mass-damper-spring with the same transfer function
/// as a NoZero model with positive gain:
///   K = 1 / gain,  M = K / omega^2,  B = 2 * zeta * omega * M.
LumpedParams extract_lumped(const SecondOrderModel& m);

/// Sweeps one parameter of fit.model across [value*(1-relative_range),
/// value*(1+relative_range)] on n_points uniform points and records the VAF
/// of each re-simulation against the dataset.
SensitivityCurve sensitivity_sweep(const Dataset& data, const FitResult& fit,
                                   SweepParameter parameter, double relative_range,
                                   Index n_points);

/// mean and half-range (max - min)/2 of repeated trial values.
TrialAggregate aggregate_trials(const std::vector<double>& values);

/// Summary of one test condition, in report units.
struct ConditionRecord {
    double freq_hz = 0.0;
    double zeta = 0.0;
    double mass_kg = 0.0;
    double damping_Ns_per_m = 0.0;
    double stiffness_N_per_m = 0.0;
};

struct FieldDelta {
    double before = 0.0;
    double after = 0.0;
    double delta = 0.0;             // after - before
    double relative_percent = 0.0;  // 100 * delta / before (0 when before == 0)
};

struct ConditionComparison {
    FieldDelta freq_hz;
    FieldDelta zeta;
    FieldDelta mass_kg;
    FieldDelta damping_Ns_per_m;
    FieldDelta stiffness_N_per_m;
};

ConditionComparison compare_conditions(const ConditionRecord& before, const ConditionRecord& after);

}  // namespace arrowid
