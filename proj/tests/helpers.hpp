// Shared builders for test datasets.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "arrowid/models.hpp"
#include "arrowid/signals.hpp"
#include "arrowid/types.hpp"
#include "oracles.hpp"

namespace testhelp {

using arrowid::Dataset;
using arrowid::Index;
using arrowid::TimeSeries;
using arrowid::Vector;

/// Noiseless synthetic dataset: PRBS force through the model's exact
/// zero-order-hold response.
inline Dataset synth_dataset(const arrowid::SecondOrderModel& m, double dt, Index n,
                             double amplitude, std::uint64_t seed, Index hold = 4) {
    const TimeSeries u = arrowid::generate_prbs(n, amplitude, hold, seed, dt);
    const TimeSeries y = arrowid::simulate_zoh(m, u);
    return Dataset{dt, u.values, y.values};
}

/// Additive white Gaussian noise on the displacement channel.
inline Dataset with_output_noise(Dataset d, double noise_std, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    for (Index i = 0; i < d.displacement.size(); ++i)
        d.displacement[i] += noise_std * testoracle::gauss(eng);
    return d;
}

/// Largest relative element difference, scaled by the larger vector's
/// infinity norm (0 when both are identically zero).
inline double rel_inf_diff(const Vector& a, const Vector& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    if (scale == 0.0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace testhelp
