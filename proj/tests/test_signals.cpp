#include <random>
#include <stdexcept>

#include "arrowid/models.hpp"
#include "arrowid/signals.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace arrowid;
using testhelp::rel_inf_diff;

namespace {

TimeSeries series(double dt, std::initializer_list<double> vals) {
    Vector v(static_cast<Index>(vals.size()));
    Index i = 0;
    for (double x : vals) v[i++] = x;
    return TimeSeries{dt, v};
}

}  // namespace

TEST_SUITE("signals") {

TEST_CASE("prbs: levels, holds, determinism") {
    const TimeSeries s = generate_prbs(4, 1.0, 4, 42, 1e-3);
    CHECK(s.values.size() == 4);
    CHECK(s.dt == 1e-3);
    // Hold spans the whole signal: all four samples identical and +/-1.
    CHECK(std::abs(s.values[0]) == 1.0);
    for (Index i = 1; i < 4; ++i) CHECK(s.values[i] == s.values[0]);

    const TimeSeries a = generate_prbs(8, 2.0, 1, 7, 1e-3);
    const TimeSeries b = generate_prbs(8, 2.0, 1, 7, 1e-3);
    CHECK(a.values == b.values);  // bit-identical
    for (Index i = 0; i < 8; ++i) CHECK(std::abs(a.values[i]) == 2.0);

    const TimeSeries c = generate_prbs(256, 1.0, 1, 8, 1e-3);
    const TimeSeries d = generate_prbs(256, 1.0, 1, 9, 1e-3);
    CHECK(c.values != d.values);

    // Level may switch only at hold boundaries.
    const TimeSeries h = generate_prbs(1000, 1.0, 5, 3, 1e-3);
    for (Index i = 0; i < 1000; ++i) CHECK(h.values[i] == h.values[5 * (i / 5)]);
}

TEST_CASE("prbs: long-run mean is near zero") {
    const TimeSeries s = generate_prbs(1000000, 1.0, 2, 1, 1e-3);
    CHECK(std::abs(s.values.mean()) < 0.01);
}

TEST_CASE("prbs: argument validation") {
    CHECK_THROWS_AS(generate_prbs(0, 1.0, 1, 0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(4, 0.0, 1, 0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(4, -1.0, 1, 0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(4, 1.0, 0, 0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(4, 1.0, 1, 0, 0.0), std::invalid_argument);
}

TEST_CASE("correlation: hand-computed biased estimates") {
    const TimeSeries ones = series(1.0, {1, 1, 1, 1});
    const CorrelationVector r = correlation(ones, ones, 4);
    REQUIRE(r.values.size() == 4);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.values[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.values[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.values[3] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.dt == 1.0);

    const TimeSeries x = series(1.0, {1, -1});
    const TimeSeries y = series(1.0, {1, 1});
    const CorrelationVector rxy = correlation(x, y, 1);
    REQUIRE(rxy.values.size() == 1);
    CHECK(rxy.values[0] == doctest::Approx(0.0).epsilon(1e-15));
    // One more lag: r[1] = (1/2) * x[0]*y[1] = 0.5.
    const CorrelationVector rxy2 = correlation(x, y, 2);
    CHECK(rxy2.values[1] == doctest::Approx(0.5).epsilon(1e-15));

    const TimeSeries delta = series(1.0, {1, 0, 0, 0});
    const CorrelationVector rd = correlation(delta, delta, 4);
    CHECK(rd.values[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(rd.values[1] == 0.0);
    CHECK(rd.values[2] == 0.0);
    CHECK(rd.values[3] == 0.0);
}

TEST_CASE("correlation: matches naive reference on random data") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 50 + 30 * trial;
        Vector x(n), y(n);
        for (Index i = 0; i < n; ++i) {
            x[i] = testoracle::urange(eng, -1, 1);
            y[i] = testoracle::urange(eng, -1, 1);
        }
        const TimeSeries xs{1e-3, x}, ys{1e-3, y};
        const CorrelationVector r = correlation(xs, ys, 20);
        const Vector want = testoracle::naive_correlation(x, y, 20);
        CHECK(rel_inf_diff(r.values, want) < 1e-13);
    }
}

TEST_CASE("correlation: autocorrelation properties") {
    std::mt19937_64 eng(5);
    Vector x(200);
    for (Index i = 0; i < 200; ++i) x[i] = testoracle::urange(eng, -2, 2);
    const TimeSeries xs{1e-3, x};
    const CorrelationVector r = correlation(xs, xs, 200);
    // Zero lag equals the mean square.
    CHECK(r.values[0] == doctest::Approx(x.squaredNorm() / 200.0).epsilon(1e-12));
    // Biased estimator: zero lag dominates every other lag.
    for (Index k = 1; k < 200; ++k) CHECK(r.values[0] >= std::abs(r.values[k]));
}

TEST_CASE("correlation: detrend removes sample means first") {
    const TimeSeries flat = series(1.0, {3, 3, 3, 3});
    const CorrelationVector r = correlation(flat, flat, 4, true);
    for (Index k = 0; k < 4; ++k) CHECK(r.values[k] == 0.0);

    // Equivalent to correlating manually centered series.
    std::mt19937_64 eng(17);
    Vector x(64), y(64);
    for (Index i = 0; i < 64; ++i) {
        x[i] = testoracle::urange(eng, 0, 1) + 5.0;
        y[i] = testoracle::urange(eng, 0, 1) - 2.0;
    }
    const TimeSeries xs{1e-3, x}, ys{1e-3, y};
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    const CorrelationVector a = correlation(xs, ys, 16, true);
    const CorrelationVector b = correlation(TimeSeries{1e-3, xc}, TimeSeries{1e-3, yc}, 16);
    CHECK(rel_inf_diff(a.values, b.values) < 1e-14);
}

TEST_CASE("correlation: argument validation") {
    const TimeSeries x = series(1.0, {1, 2, 3});
    const TimeSeries y2 = series(1.0, {1, 2});
    const TimeSeries ydt = series(2.0, {1, 2, 3});
    CHECK_THROWS_AS(correlation(x, y2, 2), std::invalid_argument);
    CHECK_THROWS_AS(correlation(x, ydt, 2), std::invalid_argument);
    CHECK_THROWS_AS(correlation(x, x, 0), std::invalid_argument);
    CHECK_THROWS_AS(correlation(x, x, 4), std::invalid_argument);  // max_lag > N
}

TEST_CASE("toeplitz_solve: white input reduces to a scaled copy") {
    const double dt = 0.25;
    CorrelationVector r_uu{dt, Vector(3)};
    r_uu.values << 4.0, 0.0, 0.0;  // sigma^2 = 4
    CorrelationVector r_uy{dt, Vector(3)};
    r_uy.values << 1.0, -2.0, 0.5;
    const Vector h = toeplitz_solve(r_uu, r_uy);
    REQUIRE(h.size() == 3);
    for (Index k = 0; k < 3; ++k)
        CHECK(h[k] == doctest::Approx(r_uy.values[k] / (4.0 * dt)).epsilon(1e-6));
}

TEST_CASE("toeplitz_solve: zero cross-correlation gives zero taps") {
    CorrelationVector r_uu{1.0, Vector(4)};
    r_uu.values << 1.0, 0.3, 0.1, 0.0;
    CorrelationVector r_uy{1.0, Vector::Zero(4)};
    const Vector h = toeplitz_solve(r_uu, r_uy);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("toeplitz_solve: recovers known taps and matches the dense LS oracle") {
    // u = [1,1,0,0] convolved (with dt scaling) with taps [2,1].
    const double dt = 0.5;
    Vector u(4);
    u << 1, 1, 0, 0;
    Vector taps_true(2);
    taps_true << 2, 1;
    const TimeSeries us{dt, u};
    const TimeSeries ys = convolve(us, taps_true, dt);

    const CorrelationVector r_uu = correlation(us, us, 2);
    const CorrelationVector r_uy = correlation(us, ys, 2);
    const Vector h = toeplitz_solve(r_uu, r_uy);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(h[1] == doctest::Approx(1.0).epsilon(1e-6));

    // The regularized least-squares FIR problem posed directly on the
    // zero-padded convolution matrix has the same normal equations; its QR
    // solution must agree to solver precision.
    const Vector h_ls =
        testoracle::dense_fir_ls(u, ys.values, 2, dt, kToeplitzRidge);
    CHECK(rel_inf_diff(h, h_ls) < 1e-9);
}

TEST_CASE("toeplitz_solve: matches a dense full-pivot solve on random systems") {
    std::mt19937_64 eng(23);
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = 100 + 50 * trial;
        const Index m = 5 + 5 * trial;
        Vector u(n);
        for (Index i = 0; i < n; ++i) u[i] = testoracle::urange(eng, -1, 1);
        Vector y(n);
        for (Index i = 0; i < n; ++i) y[i] = testoracle::urange(eng, -1, 1);
        const TimeSeries us{1e-3, u}, ys{1e-3, y};
        const CorrelationVector r_uu = correlation(us, us, m);
        const CorrelationVector r_uy = correlation(us, ys, m);
        const Vector got = toeplitz_solve(r_uu, r_uy);
        const Vector want = testoracle::dense_toeplitz_solve(r_uu, r_uy, kToeplitzRidge);
        CHECK(rel_inf_diff(got, want) < 1e-10);
    }
}

TEST_CASE("toeplitz_solve: argument validation") {
    CorrelationVector bad{1.0, Vector(2)};
    bad.values << 0.0, 0.1;  // r_uu[0] not positive
    CorrelationVector r_uy{1.0, Vector::Zero(2)};
    CHECK_THROWS_AS(toeplitz_solve(bad, r_uy), std::invalid_argument);

    CorrelationVector ok{1.0, Vector(2)};
    ok.values << 1.0, 0.1;
    CorrelationVector wrong_len{1.0, Vector::Zero(3)};
    CHECK_THROWS_AS(toeplitz_solve(ok, wrong_len), std::invalid_argument);
}

TEST_CASE("convolve: identity, hand example, zero input") {
    std::mt19937_64 eng(3);
    Vector u(32);
    for (Index i = 0; i < 32; ++i) u[i] = testoracle::urange(eng, -1, 1);
    const TimeSeries us{0.01, u};
    Vector ident(1);
    ident << 1.0 / 0.01;
    const TimeSeries same = convolve(us, ident, 0.01);
    CHECK(rel_inf_diff(same.values, u) < 1e-15);

    const TimeSeries ramp = series(1.0, {1, 2, 3});
    Vector h2(2);
    h2 << 1, 1;
    const TimeSeries y = convolve(ramp, h2, 1.0);
    CHECK(y.values[0] == 1.0);
    CHECK(y.values[1] == 3.0);
    CHECK(y.values[2] == 5.0);

    const TimeSeries zeros{1.0, Vector::Zero(5)};
    CHECK(convolve(zeros, h2, 1.0).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolve: step through sampled impulse response settles at the DC gain") {
    const auto m = make_no_zero(1e-3, 0.3, 250.0);
    const double dt = 1.0 / 4000.0;
    // Taps span past 10 / (zeta * omega) = 0.133 s.
    const Index taps_n = 600;
    const Vector taps = sampled_impulse_response(m, dt, taps_n);
    const TimeSeries step{dt, Vector::Ones(2 * taps_n)};
    const TimeSeries y = convolve(step, taps, dt);
    CHECK(testhelp::rel_err(y.values[y.values.size() - 1], 1e-3) < 1e-3);
}

TEST_CASE("convolve: linearity") {
    std::mt19937_64 eng(29);
    Vector u1(64), u2(64), h(9);
    for (Index i = 0; i < 64; ++i) {
        u1[i] = testoracle::urange(eng, -1, 1);
        u2[i] = testoracle::urange(eng, -1, 1);
    }
    for (Index i = 0; i < 9; ++i) h[i] = testoracle::urange(eng, -1, 1);
    const double a = 2.5, b = -1.25, dt = 1e-3;
    const TimeSeries mix{dt, a * u1 + b * u2};
    const Vector lhs = convolve(mix, h, dt).values;
    const Vector rhs = a * convolve(TimeSeries{dt, u1}, h, dt).values +
                       b * convolve(TimeSeries{dt, u2}, h, dt).values;
    CHECK(rel_inf_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("convolve: argument validation") {
    const TimeSeries u = series(1.0, {1, 2});
    CHECK_THROWS_AS(convolve(u, Vector(), 1.0), std::invalid_argument);
    Vector h(1);
    h << 1.0;
    CHECK_THROWS_AS(convolve(u, h, 0.5), std::invalid_argument);  // dt mismatch
}

TEST_CASE("vaf: exact and hand-computed values") {
    const TimeSeries m = series(1.0, {1, 2, 3, 4});
    CHECK(vaf(m, m) == 100.0);

    const TimeSeries mean_pred = series(1.0, {2.5, 2.5, 2.5, 2.5});
    CHECK(vaf(m, mean_pred) == doctest::Approx(0.0).epsilon(1e-12));

    // Prediction differing only by a constant offset is perfect after mean
    // removal.
    const TimeSeries shifted = series(1.0, {11, 12, 13, 14});
    CHECK(vaf(m, shifted) == doctest::Approx(100.0).epsilon(1e-12));

    // Anti-correlated and over-scaled: var(e) = 9 var(m) so VAF = -800.
    const TimeSeries sq = series(1.0, {1, -1, 1, -1});
    const TimeSeries bad = series(1.0, {-2, 2, -2, 2});
    CHECK(vaf(sq, bad) == doctest::Approx(-800.0).epsilon(1e-12));

    // e = [0,0,-1] against m = [1,2,3]: VAF = 100 * (1 - (2/9)/(2/3)).
    const TimeSeries m3 = series(1.0, {1, 2, 3});
    const TimeSeries p3 = series(1.0, {1, 2, 4});
    CHECK(vaf(m3, p3) == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("vaf: never exceeds 100") {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Vector m(50), p(50);
        for (Index i = 0; i < 50; ++i) {
            m[i] = testoracle::urange(eng, -1, 1);
            p[i] = testoracle::urange(eng, -1, 1);
        }
        CHECK(vaf(m, p) <= 100.0);
    }
}

TEST_CASE("vaf: argument validation") {
    const TimeSeries flat = series(1.0, {2, 2, 2});
    const TimeSeries any = series(1.0, {1, 2, 3});
    CHECK_THROWS_AS(vaf(flat, any), std::invalid_argument);  // zero variance
    const TimeSeries shorter = series(1.0, {1, 2});
    CHECK_THROWS_AS(vaf(any, shorter), std::invalid_argument);
}

}  // TEST_SUITE
