#pragma once

#include <cstdint>

#include "arrowid/models.hpp"
#include "arrowid/types.hpp"

namespace arrowid {

/// Synthetic measurement rig: a voice-coil actuator driving the mechanical
/// model, with the measurement chain (sense filter, quantizer, noise) between
/// the true signals and the recorded ones.
///
/// Electrical side:  L di/dt = v - R i - Kf dx/dt   (back EMF)
/// Force on shaft:   F = clamp(Kf * i, +/- force_limit_N)
/// Force record:     two-stage RC low-pass of the drive force (when enabled)
/// Displacement:     clamped to +/- travel_limit_m, Gaussian noise added,
///                   quantized to quantization_step_m, clamped again.
struct RigConfig {
    SecondOrderModel plant;

    double supply_voltage_V = 25.2;     // command magnitude may not exceed this
    double coil_resistance_ohm = 5.3;
    double coil_inductance_H = 1e-3;
    double force_constant_N_per_A = 10.0;  // also the back-EMF constant, V s/m
    double sense_conversion_V_per_N = 0.36;

    bool filter_enabled = true;
    double filter_knee_hz = 2000.0;

    double sample_rate_hz = 4000.0;
    double quantization_step_m = 1e-5;
    double force_limit_N = 89.0;
    double travel_limit_m = 3e-3;
    double displacement_noise_std_m = 0.0;
    std::uint64_t seed = 0;
};

/// What the rig hands back: the recorded dataset an experimenter would see,
/// plus the underlying truth for validation. noisy_displacement is the
/// clamped true displacement with noise added but before quantization, so the
/// quantizer's half-step error bound can be checked directly.
struct RigOutput {
    Dataset recorded;
    TimeSeries true_force;          // clamped drive force, before the sense chain
    TimeSeries true_displacement;   // noise-free, unquantized
    TimeSeries noisy_displacement;  // noise added, not yet quantized
};

/// Runs the rig over one command-voltage record. command.dt must equal
/// 1 / sample_rate_hz and |command| may not exceed the supply voltage. The
/// command is held across each sample interval; the coil current integrates
/// with ten fixed Runge-Kutta substeps per sample and the mechanical state
/// steps with the exact zero-order-hold discretization. Deterministic for a
/// given config (noise is drawn from the seeded generator).
RigOutput simulate_rig(const RigConfig& config, const TimeSeries& command);

/// Two identical cascaded first-order RC sections, each discretized with the
/// bilinear transform at the series' own sample rate. Unity gain at DC.
TimeSeries rc_filter2(const TimeSeries& input, double knee_hz);

/// Mid-tread uniform quantizer: step * round(value / step), ties away from
/// zero. step = 0 passes the signal through untouched.
TimeSeries quantize(const TimeSeries& input, double step);

}  // namespace arrowid
