#pragma once

#include <cstdint>

#include "arrowid/types.hpp"

namespace arrowid {

/// Biased correlation estimates r[0..max_lag-1]; values[k] is the lag-k
/// estimate and dt is carried along from the operand series so downstream
/// consumers can stay in continuous-time units.
struct CorrelationVector {
    double dt = 0.0;
    Vector values;
};

/// Relative ridge weight applied to the diagonal of the normal equations in
/// toeplitz_solve (scaled by the zero-lag autocorrelation).
inline constexpr double kToeplitzRidge = 1e-8;

/// Pseudo-random binary excitation: a level of +/-amplitude is drawn once per
/// hold block of hold_samples consecutive samples. The same seed always yields
/// the same sequence, on every platform.
TimeSeries generate_prbs(Index num_samples, double amplitude, Index hold_samples,
                         std::uint64_t seed, double dt);

/// Biased cross-correlation estimate
///   r[k] = (1/N) * sum_{n=0}^{N-1-k} x[n] * y[n+k],  k = 0..max_lag-1.
/// The 1/N normalization is deliberate: it keeps the implied normal equations
/// positive semi-definite. With detrend set, sample means are removed first.
CorrelationVector correlation(const TimeSeries& x, const TimeSeries& y, Index max_lag,
                              bool detrend = false);

/// Solves the symmetric Toeplitz normal equations
///   T(r_uu) * (h * dt) = r_uy
/// for the impulse-response taps h, with a small ridge (kToeplitzRidge *
/// r_uu[0]) added to the diagonal for conditioning. Throws numerical_error,
/// carrying a condition estimate, if the factorization fails or produces
/// non-finite taps.
Vector toeplitz_solve(const CorrelationVector& r_uu, const CorrelationVector& r_uy);

/// Discrete convolution against continuous-scale taps:
///   y[n] = dt * sum_{k=0}^{min(n, K-1)} taps[k] * u[n-k].
/// The input is treated as zero before n = 0 (system at rest). dt must match
/// u.dt; it is spelled out at the call site because the taps carry 1/s units.
TimeSeries convolve(const TimeSeries& u, const Vector& taps, double dt);

/// Variance accounted for, in percent:
///   100 * (1 - var(measured - predicted) / var(measured)),
/// with sample means removed inside both variances. 100 for a perfect match,
/// negative when the prediction is worse than the measured mean.
double vaf(const Vector& measured, const Vector& predicted);
double vaf(const TimeSeries& measured, const TimeSeries& predicted);

}  // namespace arrowid
