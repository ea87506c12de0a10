#include "arrowid/rigsim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace arrowid {

namespace {

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

// Gaussian deviates straight from the raw engine stream (Box-Muller), so the
// sequence does not depend on the standard library's distribution internals.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform01() {
        // 53-bit mantissa, offset half a step: strictly inside (0, 1).
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void validate(const RigConfig& c) {
    validate(c.plant);
    const auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!pos(c.supply_voltage_V)) throw std::invalid_argument("rig: supply voltage must be positive");
    if (!pos(c.coil_resistance_ohm) || !pos(c.coil_inductance_H))
        throw std::invalid_argument("rig: coil resistance and inductance must be positive");
    if (!pos(c.force_constant_N_per_A))
        throw std::invalid_argument("rig: force constant must be positive");
    if (!pos(c.sense_conversion_V_per_N))
        throw std::invalid_argument("rig: sense conversion must be positive");
    if (c.filter_enabled && !pos(c.filter_knee_hz))
        throw std::invalid_argument("rig: filter knee must be positive");
    if (!pos(c.sample_rate_hz)) throw std::invalid_argument("rig: sample rate must be positive");
    if (!(std::isfinite(c.quantization_step_m) && c.quantization_step_m >= 0.0))
        throw std::invalid_argument("rig: quantization step must be >= 0");
    if (!pos(c.force_limit_N) || !pos(c.travel_limit_m))
        throw std::invalid_argument("rig: force and travel limits must be positive");
    if (!(std::isfinite(c.displacement_noise_std_m) && c.displacement_noise_std_m >= 0.0))
        throw std::invalid_argument("rig: noise level must be >= 0");
}

}  // namespace

TimeSeries rc_filter2(const TimeSeries& input, double knee_hz) {
    validate(input, "rc_filter2: input");
    if (!(knee_hz > 0.0) || !std::isfinite(knee_hz))
        throw std::invalid_argument("rc_filter2: knee must be positive");

    // One RC section, bilinear transform: with c = 2 / (omega_knee * dt),
    //   y[n] = (u[n] + u[n-1] + (c - 1) y[n-1]) / (c + 1),
    // applied twice. DC gain is exactly one per section.
    const double c = 2.0 / (2.0 * M_PI * knee_hz * input.dt);
    const double b = 1.0 / (1.0 + c);
    const double a = (c - 1.0) / (c + 1.0);

    TimeSeries out{input.dt, Vector(input.values.size())};
    const Vector& u = input.values;
    for (int stage = 0; stage < 2; ++stage) {
        const Vector& src = stage == 0 ? u : out.values;
        Vector dst(src.size());
        double prev_in = 0.0, prev_out = 0.0;
        for (Index n = 0; n < src.size(); ++n) {
            dst[n] = b * (src[n] + prev_in) + a * prev_out;
            prev_in = src[n];
            prev_out = dst[n];
        }
        out.values = std::move(dst);
    }
    return out;
}

TimeSeries quantize(const TimeSeries& input, double step) {
    validate(input, "quantize: input");
    if (!(step >= 0.0) || !std::isfinite(step))
        throw std::invalid_argument("quantize: step must be >= 0");
    TimeSeries out = input;
    if (step == 0.0) return out;
    for (Index n = 0; n < out.values.size(); ++n)
        out.values[n] = step * std::round(out.values[n] / step);
    return out;
}

RigOutput simulate_rig(const RigConfig& config, const TimeSeries& command) {
    validate(config);
    validate(command, "simulate_rig: command");
    const double dt = 1.0 / config.sample_rate_hz;
    if (std::abs(command.dt - dt) > 1e-9 * dt)
        throw std::invalid_argument("simulate_rig: command dt must equal 1 / sample_rate_hz");
    if (command.values.cwiseAbs().maxCoeff() > config.supply_voltage_V)
        throw std::invalid_argument("simulate_rig: command exceeds the supply voltage");

    const StateSpace ss = to_state_space(config.plant);
    const DiscreteStateSpace dss = discretize_zoh(ss, dt);

    const Index n = command.values.size();
    Vector drive_force(n), true_disp(n);

    // Coil current: L i' = v - R i - Kf x'. Within one sample the command,
    // force and velocity are held, so the current ODE is linear with constant
    // drive; ten Runge-Kutta substeps integrate it far inside stability for
    // any sane R/L.
    const double R = config.coil_resistance_ohm;
    const double L = config.coil_inductance_H;
    const double kf = config.force_constant_N_per_A;
    constexpr int kSubsteps = 10;
    const double h = dt / kSubsteps;

    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    double current = 0.0;
    for (Index k = 0; k < n; ++k) {
        const double force = clamp_abs(kf * current, config.force_limit_N);
        drive_force[k] = force;
        true_disp[k] = dss.C * x + dss.D * force;

        const double velocity = ss.C * (ss.A * x + ss.B * force);
        const double v = command.values[k];
        const auto didt = [&](double i) { return (v - R * i - kf * velocity) / L; };
        for (int s = 0; s < kSubsteps; ++s) {
            const double k1 = didt(current);
            const double k2 = didt(current + 0.5 * h * k1);
            const double k3 = didt(current + 0.5 * h * k2);
            const double k4 = didt(current + h * k3);
            current += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }

        x = dss.Ad * x + dss.Bd * force;
    }

    RigOutput out;
    out.true_force = TimeSeries{dt, drive_force};
    out.true_displacement = TimeSeries{dt, true_disp};

    // Force record: what the sense amplifier sees is the drive force scaled
    // to volts; the RC sections act on that voltage and the record is scaled
    // back to newtons. The scale factors cancel around the linear filter but
    // are kept explicit to mirror the measurement chain.
    Vector recorded_force = drive_force;
    if (config.filter_enabled) {
        TimeSeries sensed{dt, drive_force * config.sense_conversion_V_per_N};
        recorded_force =
            rc_filter2(sensed, config.filter_knee_hz).values / config.sense_conversion_V_per_N;
        // The sense chain saturates at the same rail as the drive; an
        // under-sampled filter section can ring past a step and the record
        // must still respect the physical limit.
        for (Index k = 0; k < n; ++k)
            recorded_force[k] = clamp_abs(recorded_force[k], config.force_limit_N);
    }

    // Displacement record: clamp to physical travel, add sensor noise,
    // quantize, clamp again (the reported value can never leave the rails).
    GaussianSource noise(config.seed);
    Vector noisy(n);
    for (Index k = 0; k < n; ++k) {
        const double clamped = clamp_abs(true_disp[k], config.travel_limit_m);
        noisy[k] = clamped + (config.displacement_noise_std_m > 0.0
                                  ? config.displacement_noise_std_m * noise()
                                  : 0.0);
    }
    out.noisy_displacement = TimeSeries{dt, noisy};

    TimeSeries quantized = quantize(out.noisy_displacement, config.quantization_step_m);
    for (Index k = 0; k < n; ++k)
        quantized.values[k] = clamp_abs(quantized.values[k], config.travel_limit_m);

    out.recorded = Dataset{dt, recorded_force, quantized.values};
    return out;
}

}  // namespace arrowid
