#include "arrowid/estimation.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace arrowid {

namespace {

constexpr double kLambdaMax = 1e15;
constexpr double kLambdaMin = 1e-12;

double variance(const Vector& v) {
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
}

// Parameter packing for the damped Gauss-Newton search. zeta, omega, zero and
// zero_freq live in log space so any real step keeps them positive;
// zero_damping stays linear and is range-checked in the residual.
Vector pack(const SecondOrderModel& m) {
    switch (m.kind) {
        case ModelKind::NoZero: {
            Vector th(3);
            th << m.gain, std::log(m.zeta), std::log(m.omega);
            return th;
        }
        case ModelKind::OneZero: {
            Vector th(4);
            th << m.gain, std::log(m.zeta), std::log(m.omega), std::log(m.zero);
            return th;
        }
        case ModelKind::ZeroPair: {
            Vector th(5);
            th << m.gain, std::log(m.zeta), std::log(m.omega), std::log(m.zero_freq),
                m.zero_damping;
            return th;
        }
    }
    throw std::invalid_argument("unknown model kind");
}

SecondOrderModel unpack(ModelKind kind, const Vector& th) {
    SecondOrderModel m;
    m.kind = kind;
    m.gain = th[0];
    m.zeta = std::exp(th[1]);
    m.omega = std::exp(th[2]);
    if (kind == ModelKind::OneZero) m.zero = std::exp(th[3]);
    if (kind == ModelKind::ZeroPair) {
        m.zero_freq = std::exp(th[3]);
        m.zero_damping = th[4];
    }
    return m;
}

// True when the unpacked trial model can be simulated without tripping
// validation; trials that fail come back as all-NaN residuals and are
// rejected by the optimizer.
bool usable(const SecondOrderModel& m) {
    const auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!std::isfinite(m.gain) || m.gain == 0.0) return false;
    if (!pos(m.zeta) || !pos(m.omega)) return false;
    if (m.kind == ModelKind::OneZero && !pos(m.zero)) return false;
    if (m.kind == ModelKind::ZeroPair &&
        (!pos(m.zero_freq) || !std::isfinite(m.zero_damping) || m.zero_damping < 0.0 ||
         m.zero_damping >= 1.0))
        return false;
    return true;
}

}  // namespace

const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Gain: return "gain";
        case SweepParameter::Damping: return "damping";
        case SweepParameter::Frequency: return "frequency";
    }
    return "?";
}

Matrix forward_difference_jacobian(const ResidualFn& fn, const Vector& theta, const Vector& r0,
                                   const LmOptions& options) {
    Matrix J(r0.size(), theta.size());
    Vector shifted = theta;
    for (Index j = 0; j < theta.size(); ++j) {
        const double h =
            std::max(options.fd_relative_step * std::abs(theta[j]), options.fd_step_floor);
        shifted[j] = theta[j] + h;
        const Vector rj = fn(shifted);
        shifted[j] = theta[j];
        if (rj.size() == r0.size() && rj.allFinite())
            J.col(j) = (rj - r0) / h;
        else
            J.col(j).setZero();
    }
    return J;
}

std::pair<Vector, LmDiagnostics> levenberg_marquardt(const ResidualFn& fn, Vector theta0,
                                                     const LmOptions& options) {
    Vector theta = std::move(theta0);
    Vector r = fn(theta);
    if (r.size() < 1 || !r.allFinite())
        throw std::invalid_argument("levenberg_marquardt: residual not finite at the start point");

    double cost = r.squaredNorm();
    Vector best_theta = theta;
    double best_cost = cost;

    LmDiagnostics diag;
    double lambda = options.initial_lambda;
    bool refresh_jacobian = true;
    Matrix H;
    Vector g;

    while (diag.iterations < options.max_iterations) {
        if (refresh_jacobian) {
            const Matrix J = forward_difference_jacobian(fn, theta, r, options);
            H = J.transpose() * J;
            g = J.transpose() * r;
            refresh_jacobian = false;
        }

        Matrix damped = H;
        damped.diagonal() += lambda * H.diagonal();
        // Guard flat directions (zeroed Jacobian columns) so the factorization
        // has full rank; such directions simply get no step.
        for (Index i = 0; i < damped.rows(); ++i)
            if (damped(i, i) == 0.0) damped(i, i) = 1.0;

        const Vector step = damped.ldlt().solve(-g);
        if (!step.allFinite()) {
            lambda *= 10.0;
            if (lambda > kLambdaMax) break;
            continue;
        }

        // Relative step termination is checked before spending the trial
        // evaluation: at an optimum the proposed step collapses and the loop
        // exits with zero further residual calls.
        if (step.norm() <= options.step_tolerance * (theta.norm() + options.step_tolerance)) {
            diag.converged = true;
            break;
        }

        const Vector trial = theta + step;
        const Vector r_trial = fn(trial);
        ++diag.iterations;

        const bool finite = r_trial.size() == r.size() && r_trial.allFinite();
        const double trial_cost = finite ? r_trial.squaredNorm() : 0.0;
        if (finite && trial_cost < cost) {
            const double previous = cost;
            theta = trial;
            r = r_trial;
            cost = trial_cost;
            ++diag.accepted_steps;
            if (cost < best_cost) {
                best_cost = cost;
                best_theta = theta;
            }
            lambda = std::max(lambda / 10.0, kLambdaMin);
            refresh_jacobian = true;
            if (previous - cost <= options.cost_tolerance * previous) {
                diag.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > kLambdaMax) break;
        }
    }

    diag.residual_norm = std::sqrt(best_cost);
    return {best_theta, diag};
}

ImpulseResponseEstimate estimate_fir(const Dataset& data, Index n_taps, bool detrend) {
    validate(data, "estimate_fir: data");
    const Index n = data.force.size();
    if (n_taps < 1 || n_taps > n)
        throw std::invalid_argument("estimate_fir: n_taps must be in [1, sample count]");
    if (!(data.force.squaredNorm() > 0.0) || (detrend && !(variance(data.force) > 0.0)))
        throw std::invalid_argument("estimate_fir: force carries no excitation");

    const TimeSeries u{data.dt, data.force};
    const TimeSeries y{data.dt, data.displacement};
    const CorrelationVector r_uu = correlation(u, u, n_taps, detrend);
    const CorrelationVector r_uy = correlation(u, y, n_taps, detrend);
    return {data.dt, toeplitz_solve(r_uu, r_uy)};
}

SecondOrderModel initial_guess(const ImpulseResponseEstimate& fir) {
    if (!(fir.dt > 0.0)) throw std::invalid_argument("initial_guess: dt must be positive");
    const Index m = fir.taps.size();
    if (m < 1 || !fir.taps.allFinite())
        throw std::invalid_argument("initial_guess: taps must be nonempty and finite");
    if (fir.taps.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("initial_guess: taps are identically zero");

    // Dominant discrete-spectrum bin -> omega. A direct DFT over the positive
    // bins is plenty at FIR lengths; no transform library needed.
    double omega0 = M_PI / (2.0 * fir.dt);
    if (m >= 4) {
        double best_mag = -1.0;
        Index best_k = 1;
        for (Index k = 1; k <= m / 2; ++k) {
            std::complex<double> acc(0.0, 0.0);
            const double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
            for (Index i = 0; i < m; ++i)
                acc += fir.taps[i] * std::polar(1.0, w * static_cast<double>(i));
            if (std::abs(acc) > best_mag) {
                best_mag = std::abs(acc);
                best_k = k;
            }
        }
        omega0 = 2.0 * M_PI * static_cast<double>(best_k) / (static_cast<double>(m) * fir.dt);
    }

    // Damping from the log-decrement of the first two positive peaks.
    double zeta0 = 0.3;
    Index p1 = -1, p2 = -1;
    for (Index i = 1; i + 1 < m; ++i) {
        if (fir.taps[i] > 0.0 && fir.taps[i] > fir.taps[i - 1] && fir.taps[i] >= fir.taps[i + 1]) {
            if (p1 < 0) {
                p1 = i;
            } else {
                p2 = i;
                break;
            }
        }
    }
    if (p1 >= 0 && p2 > p1 && fir.taps[p1] > fir.taps[p2]) {
        const double dec = std::log(fir.taps[p1] / fir.taps[p2]);
        zeta0 = dec / std::sqrt(4.0 * M_PI * M_PI + dec * dec);
    }
    zeta0 = std::clamp(zeta0, 0.05, 0.95);

    double gain0 = fir.dt * fir.taps.sum();
    if (gain0 == 0.0) gain0 = fir.dt * fir.taps.cwiseAbs().sum();

    SecondOrderModel guess;
    guess.kind = ModelKind::NoZero;
    guess.gain = gain0;
    guess.zeta = zeta0;
    guess.omega = omega0;
    validate(guess);
    return guess;
}

SecondOrderModel step_response_guess(const ImpulseResponseEstimate& fir) {
    if (!(fir.dt > 0.0)) throw std::invalid_argument("step_response_guess: dt must be positive");
    const Index m = fir.taps.size();
    if (m < 1 || !fir.taps.allFinite())
        throw std::invalid_argument("step_response_guess: taps must be nonempty and finite");
    if (fir.taps.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("step_response_guess: taps are identically zero");

    // Integrating the taps low-passes the estimate, so the step response keeps
    // its shape even when the raw taps are buried in deconvolution noise.
    Vector s(m);
    double acc = 0.0;
    for (Index i = 0; i < m; ++i) {
        acc += fir.taps[i];
        s[i] = acc * fir.dt;
    }

    const double gain = s.tail(std::max<Index>(m / 4, 1)).mean();
    if (!std::isfinite(gain) || gain == 0.0) return initial_guess(fir);

    // Normalized step response settles near one; its first/global peak and
    // overshoot carry the frequency and damping.
    const Vector q = s / gain;
    Index peak = 0;
    for (Index i = 1; i < m; ++i)
        if (q[i] > q[peak]) peak = i;

    if (peak > 0 && q[peak] > 1.0) {
        const double overshoot = std::clamp(q[peak] - 1.0, 1e-3, 0.999);
        const double lg = -std::log(overshoot);
        const double zeta = std::clamp(lg / std::sqrt(M_PI * M_PI + lg * lg), 0.05, 0.95);
        const double omega_d = M_PI / (static_cast<double>(peak) * fir.dt);
        return make_no_zero(gain, zeta, omega_d / std::sqrt(1.0 - zeta * zeta));
    }

    // No overshoot: treat the response as heavily damped and read the
    // frequency off the 10-90% rise time (omega * t_rise ~ 2.6 near zeta 0.8).
    Index t10 = -1, t90 = -1;
    for (Index i = 0; i < m; ++i) {
        if (t10 < 0 && q[i] >= 0.1) t10 = i;
        if (t90 < 0 && q[i] >= 0.9) t90 = i;
        if (t90 >= 0) break;
    }
    if (t10 < 0 || t90 <= t10) return initial_guess(fir);
    const double rise = static_cast<double>(t90 - t10) * fir.dt;
    return make_no_zero(gain, 0.8, 2.6 / rise);
}

FitResult fit_parametric(const Dataset& data, ModelKind kind, std::optional<SecondOrderModel> init,
                         const LmOptions& options) {
    validate(data, "fit_parametric: data");
    if (!(variance(data.displacement) > 0.0))
        throw std::invalid_argument("fit_parametric: displacement has zero variance");

    std::vector<SecondOrderModel> bases;
    if (init) {
        validate(*init);
        bases.push_back(*init);
    } else {
        const Index taps = std::min<Index>(kDefaultTapCount, data.force.size());
        const ImpulseResponseEstimate fir = estimate_fir(data, taps);
        bases.push_back(initial_guess(fir));
        bases.push_back(step_response_guess(fir));
    }

    const TimeSeries force{data.dt, data.force};
    const Vector& disp = data.displacement;
    const ResidualFn fn = [&](const Vector& th) -> Vector {
        const SecondOrderModel m = unpack(kind, th);
        if (!usable(m))
            return Vector::Constant(disp.size(), std::numeric_limits<double>::quiet_NaN());
        return disp - simulate_zoh(m, force).values;
    };

    std::optional<FitResult> best;
    for (const SecondOrderModel& base : bases) {
        SecondOrderModel start;
        start.kind = kind;
        start.gain = base.gain;
        start.zeta = base.zeta;
        start.omega = base.omega;
        if (kind == ModelKind::OneZero)
            start.zero = (base.kind == ModelKind::OneZero && base.zero > 0.0) ? base.zero
                                                                              : 10.0 * base.omega;
        if (kind == ModelKind::ZeroPair) {
            const bool carry = base.kind == ModelKind::ZeroPair && base.zero_freq > 0.0;
            start.zero_freq = carry ? base.zero_freq : 3.0 * base.omega;
            start.zero_damping = carry ? base.zero_damping : 0.3;
        }
        validate(start);

        const auto [theta, diag] = levenberg_marquardt(fn, pack(start), options);

        FitResult fit;
        fit.model = unpack(kind, theta);
        validate(fit.model);
        fit.vaf_percent = vaf(disp, simulate_zoh(fit.model, force).values);
        fit.iterations = diag.iterations;
        fit.converged = diag.converged;
        fit.residual_norm = diag.residual_norm;
        if (!best || fit.vaf_percent > best->vaf_percent) best = fit;
    }
    return *best;
}

double nonparametric_vaf(const Dataset& data, const ImpulseResponseEstimate& h) {
    validate(data, "nonparametric_vaf: data");
    if (!(h.dt > 0.0) || h.taps.size() < 1 || !h.taps.allFinite())
        throw std::invalid_argument("nonparametric_vaf: invalid impulse-response estimate");
    if (std::abs(h.dt - data.dt) > 1e-12 * data.dt)
        throw std::invalid_argument("nonparametric_vaf: sample intervals differ");

    const TimeSeries predicted = convolve(TimeSeries{data.dt, data.force}, h.taps, data.dt);
    return vaf(data.displacement, predicted.values);
}

LumpedParams extract_lumped(const SecondOrderModel& m) {
    validate(m);
    if (m.kind != ModelKind::NoZero)
        throw std::invalid_argument("extract_lumped: only the no-zero kind maps to M/B/K");
    if (!(m.gain > 0.0))
        throw std::invalid_argument("extract_lumped: gain must be positive");

    LumpedParams p;
    p.stiffness_N_per_m = 1.0 / m.gain;
    p.mass_kg = p.stiffness_N_per_m / (m.omega * m.omega);
    p.damping_Ns_per_m = 2.0 * m.zeta * m.omega * p.mass_kg;
    return p;
}

SensitivityCurve sensitivity_sweep(const Dataset& data, const FitResult& fit,
                                   SweepParameter parameter, double relative_range,
                                   Index n_points) {
    validate(data, "sensitivity_sweep: data");
    validate(fit.model);
    if (!(relative_range > 0.0) || !(relative_range < 1.0))
        throw std::invalid_argument("sensitivity_sweep: relative_range must lie in (0, 1)");
    if (n_points < 2) throw std::invalid_argument("sensitivity_sweep: need at least two points");

    double center = 0.0;
    switch (parameter) {
        case SweepParameter::Gain: center = fit.model.gain; break;
        case SweepParameter::Damping: center = fit.model.zeta; break;
        case SweepParameter::Frequency: center = fit.model.omega; break;
    }

    const TimeSeries force{data.dt, data.force};
    SensitivityCurve curve;
    curve.parameter = parameter;
    curve.grid = Vector::LinSpaced(n_points, center * (1.0 - relative_range),
                                   center * (1.0 + relative_range));
    curve.vaf_percent.resize(n_points);
    for (Index i = 0; i < n_points; ++i) {
        SecondOrderModel m = fit.model;
        switch (parameter) {
            case SweepParameter::Gain: m.gain = curve.grid[i]; break;
            case SweepParameter::Damping: m.zeta = curve.grid[i]; break;
            case SweepParameter::Frequency: m.omega = curve.grid[i]; break;
        }
        curve.vaf_percent[i] = vaf(data.displacement, simulate_zoh(m, force).values);
    }
    return curve;
}

TrialAggregate aggregate_trials(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate_trials: no values");
    double sum = 0.0, lo = values.front(), hi = values.front();
    for (const double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("aggregate_trials: non-finite value");
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {sum / static_cast<double>(values.size()), (hi - lo) / 2.0};
}

namespace {

FieldDelta field_delta(double before, double after) {
    FieldDelta d;
    d.before = before;
    d.after = after;
    d.delta = after - before;
    d.relative_percent = before != 0.0 ? 100.0 * d.delta / before : 0.0;
    return d;
}

}  // namespace

ConditionComparison compare_conditions(const ConditionRecord& before, const ConditionRecord& after) {
    ConditionComparison c;
    c.freq_hz = field_delta(before.freq_hz, after.freq_hz);
    c.zeta = field_delta(before.zeta, after.zeta);
    c.mass_kg = field_delta(before.mass_kg, after.mass_kg);
    c.damping_Ns_per_m = field_delta(before.damping_Ns_per_m, after.damping_Ns_per_m);
    c.stiffness_N_per_m = field_delta(before.stiffness_N_per_m, after.stiffness_N_per_m);
    return c;
}

}  // namespace arrowid
