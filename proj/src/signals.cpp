#include "arrowid/signals.hpp"

#include <Eigen/Cholesky>

#include <random>
#include <stdexcept>

namespace arrowid {

void validate(const TimeSeries& s, const char* who) {
    if (!(s.dt > 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be positive");
    if (s.values.size() < 1) throw std::invalid_argument(std::string(who) + ": empty");
    if (!s.values.allFinite())
        throw std::invalid_argument(std::string(who) + ": non-finite samples");
}

void validate(const Dataset& d, const char* who) {
    if (!(d.dt > 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be positive");
    if (d.force.size() != d.displacement.size())
        throw std::invalid_argument(std::string(who) + ": channel lengths differ");
    if (d.force.size() < 2) throw std::invalid_argument(std::string(who) + ": too short");
    if (!d.force.allFinite() || !d.displacement.allFinite())
        throw std::invalid_argument(std::string(who) + ": non-finite samples");
}

TimeSeries generate_prbs(Index num_samples, double amplitude, Index hold_samples,
                         std::uint64_t seed, double dt) {
    if (num_samples < 1) throw std::invalid_argument("generate_prbs: num_samples must be >= 1");
    if (hold_samples < 1) throw std::invalid_argument("generate_prbs: hold_samples must be >= 1");
    if (!(amplitude > 0.0)) throw std::invalid_argument("generate_prbs: amplitude must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("generate_prbs: dt must be positive");

    // One engine draw per hold block; the low bit picks the sign. Using the
    // raw mt19937_64 stream keeps the sequence identical across platforms and
    // standard libraries.
    std::mt19937_64 engine(seed);
    TimeSeries out{dt, Vector(num_samples)};
    double level = 0.0;
    for (Index n = 0; n < num_samples; ++n) {
        if (n % hold_samples == 0) level = (engine() & 1u) ? amplitude : -amplitude;
        out.values[n] = level;
    }
    return out;
}

CorrelationVector correlation(const TimeSeries& x, const TimeSeries& y, Index max_lag,
                              bool detrend) {
    validate(x, "correlation: x");
    validate(y, "correlation: y");
    if (x.values.size() != y.values.size())
        throw std::invalid_argument("correlation: series lengths differ");
    if (x.dt != y.dt) throw std::invalid_argument("correlation: sample intervals differ");
    const Index n = x.values.size();
    if (max_lag < 1 || max_lag > n)
        throw std::invalid_argument("correlation: max_lag must be in [1, length]");

    Vector xv = x.values;
    Vector yv = y.values;
    if (detrend) {
        xv.array() -= xv.mean();
        yv.array() -= yv.mean();
    }

    CorrelationVector r{x.dt, Vector(max_lag)};
    for (Index k = 0; k < max_lag; ++k)
        r.values[k] = xv.head(n - k).dot(yv.tail(n - k)) / static_cast<double>(n);
    return r;
}

Vector toeplitz_solve(const CorrelationVector& r_uu, const CorrelationVector& r_uy) {
    const Index m = r_uu.values.size();
    if (m < 1 || r_uy.values.size() != m)
        throw std::invalid_argument("toeplitz_solve: correlation lengths must match and be >= 1");
    if (!(r_uu.dt > 0.0) || r_uu.dt != r_uy.dt)
        throw std::invalid_argument("toeplitz_solve: sample intervals must match and be positive");
    if (!r_uu.values.allFinite() || !r_uy.values.allFinite())
        throw std::invalid_argument("toeplitz_solve: non-finite correlation values");
    if (!(r_uu.values[0] > 0.0))
        throw std::invalid_argument("toeplitz_solve: zero-lag autocorrelation must be positive");

    Matrix T(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) T(i, j) = r_uu.values[i >= j ? i - j : j - i];
    T.diagonal().array() += kToeplitzRidge * r_uu.values[0];

    Eigen::LDLT<Matrix> ldlt(T);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("toeplitz_solve: factorization failed", 1.0 / ldlt.rcond());
    Vector h_dt = ldlt.solve(r_uy.values);
    if (!h_dt.allFinite())
        throw numerical_error("toeplitz_solve: solution not finite", 1.0 / ldlt.rcond());
    return h_dt / r_uu.dt;
}

TimeSeries convolve(const TimeSeries& u, const Vector& taps, double dt) {
    validate(u, "convolve: input");
    if (taps.size() < 1) throw std::invalid_argument("convolve: empty taps");
    if (!taps.allFinite()) throw std::invalid_argument("convolve: non-finite taps");
    if (dt != u.dt) throw std::invalid_argument("convolve: dt does not match the input series");

    const Index n = u.values.size();
    const Index m = std::min<Index>(taps.size(), n);
    TimeSeries y{u.dt, Vector::Zero(n)};
    // Accumulate shifted copies (axpy per tap) rather than a dot per output
    // sample; both are O(n m) but this order is contiguous.
    for (Index k = 0; k < m; ++k) y.values.tail(n - k) += taps[k] * u.values.head(n - k);
    y.values *= dt;
    return y;
}

double vaf(const Vector& measured, const Vector& predicted) {
    if (measured.size() != predicted.size())
        throw std::invalid_argument("vaf: series lengths differ");
    if (measured.size() < 2) throw std::invalid_argument("vaf: too short");
    if (!measured.allFinite() || !predicted.allFinite())
        throw std::invalid_argument("vaf: non-finite samples");

    const auto variance = [](const Vector& v) {
        return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
    };
    const double var_m = variance(measured);
    if (!(var_m > 0.0)) throw std::invalid_argument("vaf: measured signal has zero variance");
    return 100.0 * (1.0 - variance(measured - predicted) / var_m);
}

double vaf(const TimeSeries& measured, const TimeSeries& predicted) {
    if (measured.dt != predicted.dt)
        throw std::invalid_argument("vaf: sample intervals differ");
    return vaf(measured.values, predicted.values);
}

}  // namespace arrowid
