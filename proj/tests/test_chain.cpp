#include <doctest.h>

#include <cmath>
#include <numbers>

#include "morilab/chain.hpp"
#include "morilab/error.hpp"
#include "morilab/io.hpp"
#include "morilab/kernels.hpp"
#include "morilab/propagate.hpp"
#include "oracles.hpp"

using namespace morilab;

TEST_CASE("chains reject non-positive or non-finite coefficients") {
    CHECK_THROWS_AS(LanczosChain({1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(LanczosChain({-1.0}), InvalidArgument);
    CHECK_THROWS_AS(LanczosChain({std::nan("")}), InvalidArgument);
    const LanczosChain empty(std::vector<double>{});
    CHECK(empty.dimension() == 1);
    const LanczosChain c({1.0, 2.0, 3.0}, "x");
    CHECK(c.dimension() == 4);
    CHECK(c.b(1) == 1.0);
    CHECK(c.b(3) == 3.0);
    CHECK(c.max_coefficient() == 3.0);
}

TEST_CASE("dense generator layout") {
    const auto L2 = dense_generator(LanczosChain({2.0}));
    CHECK(L2.rows() == 2);
    CHECK(L2(0, 0) == 0.0);
    CHECK(L2(0, 1) == 2.0);
    CHECK(L2(1, 0) == 2.0);
    CHECK(L2(1, 1) == 0.0);

    const auto L3 = dense_generator(LanczosChain({1.0, std::sqrt(2.0)}));
    CHECK(L3(0, 1) == 1.0);
    CHECK(L3(1, 2) == std::sqrt(2.0));
    CHECK(L3(2, 1) == std::sqrt(2.0));
    CHECK(L3(0, 2) == 0.0);
    CHECK(L3.diagonal().isZero());
}

TEST_CASE("dense generator of sqrt(n) has the Hermite spectrum") {
    // Eigenvalues of the truncated Hermite Jacobi matrix are the zeros of He_50.
    std::vector<double> b(49);
    for (std::size_t n = 1; n <= b.size(); ++n) b[n - 1] = std::sqrt(static_cast<double>(n));
    const auto L = dense_generator(LanczosChain(b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    const auto& ev = es.eigenvalues();
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
        // Orthonormal Hermite recursion x h_k = sqrt(k+1) h_{k+1} + sqrt(k) h_{k-1}; h_50 vanishes on the spectrum.
        const double x = ev(j);
        double h0 = 1.0, h1 = x, scale = 1.0;
        for (int k = 1; k < 50; ++k) {
            const double h2 = (x * h1 - std::sqrt(static_cast<double>(k)) * h0) / std::sqrt(static_cast<double>(k + 1));
            h0 = h1;
            h1 = h2;
            scale = std::max(scale, std::abs(h0));
        }
        CHECK(std::abs(h1) < 1e-8 * scale);
    }
    CHECK(ev.sum() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("spectral width sum equals half the trace of L squared") {
    CHECK(spectral_width_sum(LanczosChain({2.0})) == 4.0);
    CHECK(spectral_width_sum(LanczosChain({1.0, 1.0, 1.0})) == 3.0);
    for (unsigned seed : {1u, 2u, 3u}) {
        const LanczosChain c(oracle::random_coefficients(99, 0.5, 1.5, seed));
        const auto L = dense_generator(c);
        const double half_trace = 0.5 * (L * L).trace();
        CHECK(std::abs(spectral_width_sum(c) - half_trace) <= 1e-12 * half_trace);
    }
}

TEST_CASE("propagation of trivial chains") {
    SUBCASE("d = 1 stays at one") {
        const auto r = propagate(LanczosChain(std::vector<double>{}), 0.1, 5.0);
        CHECK(r.series.size() == 51);
        for (double c : r.series.values) CHECK(c == 1.0);
    }
    SUBCASE("d = 2 oscillates as cos(b t)") {
        for (auto method : {PropagatorMethod::Chebyshev, PropagatorMethod::RungeKutta4}) {
            PropagationOptions o;
            o.method = method;
            const double b1 = 1.7;
            const auto r = propagate(LanczosChain({b1}), 0.01, 50.0, o);
            double err = 0.0;
            for (std::size_t n = 0; n < r.series.size(); ++n) {
                err = std::max(err, std::abs(r.series.values[n] - std::cos(b1 * r.series.time(n))));
            }
            CHECK(err < 1e-8);
        }
    }
}

TEST_CASE("both backends match the dense oracle on random chains") {
    for (unsigned seed = 10; seed < 15; ++seed) {
        const auto b = oracle::random_coefficients(199, 0.5, 1.5, seed);
        const oracle::DenseCorrelation dense(b);
        for (auto method : {PropagatorMethod::Chebyshev, PropagatorMethod::RungeKutta4}) {
            PropagationOptions o;
            o.method = method;
            const auto r = propagate(LanczosChain(b), 0.05, 20.0, o);
            double err = 0.0;
            for (std::size_t n = 0; n < r.series.size(); ++n) {
                err = std::max(err, std::abs(r.series.values[n] - dense(r.series.time(n))));
            }
            CHECK(err < 1e-8);
            CHECK(r.max_norm_drift <= 1e-9);
        }
    }
}

TEST_CASE("matrix-exponential oracle agrees and C is even in t") {
    const auto b = oracle::random_coefficients(30, 0.5, 1.5, 99);
    const oracle::DenseCorrelation dense(b);
    const auto r = propagate(LanczosChain(b), 0.25, 5.0);
    for (std::size_t n = 0; n < r.series.size(); n += 4) {
        const double t = r.series.time(n);
        CHECK(r.series.values[n] == doctest::Approx(oracle::expm_correlation(b, t)).epsilon(1e-9));
        CHECK(oracle::expm_correlation(b, -t) == doctest::Approx(oracle::expm_correlation(b, t)).epsilon(1e-12));
        CHECK(dense(-t) == dense(t));
    }
}

TEST_CASE("norm is conserved and snapshots start at delta_n0") {
    std::vector<double> b(399);
    for (std::size_t n = 1; n <= b.size(); ++n) b[n - 1] = 0.3 * static_cast<double>(n) + 1.0;
    PropagationOptions o;
    o.keep_snapshots = true;
    const auto r = propagate(LanczosChain(b), 0.02, 4.0, o);
    REQUIRE(r.snapshots.size() == r.series.size());
    CHECK(r.snapshots.front().phi[0] == 1.0);
    CHECK(r.snapshots.front().norm_squared() == 1.0);
    for (const auto& s : r.snapshots) CHECK(std::abs(s.norm_squared() - 1.0) <= 1e-9);
    CHECK(r.max_norm_drift <= 1e-9);
}

TEST_CASE("boundary reflection is flagged") {
    const LanczosChain c(std::vector<double>(49, 1.0));
    const auto early = propagate(c, 0.05, 5.0);
    CHECK_FALSE(early.boundary_flag);
    const auto late = propagate(c, 0.05, 60.0);
    CHECK(late.boundary_flag);
    CHECK(late.max_boundary_weight > 1e-6);
}

TEST_CASE("propagation errors") {
    const LanczosChain c({1.0, 2.0});
    CHECK_THROWS_AS(propagate(c, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(propagate(c, 0.1, -1.0), InvalidArgument);
    PropagationOptions o;
    o.method = PropagatorMethod::RungeKutta4;
    o.rk4_substep = 1.0;  // bound is 0.5 / 2 = 0.25
    try {
        propagate(c, 0.5, 1.0, o);
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        const std::string what = e.what();
        CHECK(what.find("0.25") != std::string::npos);
        CHECK(what.find("chebyshev") != std::string::npos);
    }
    CHECK(rk4_stability_bound(c) == 0.25);
}

TEST_CASE("sample count tolerates rounding of t_max / dt") {
    CHECK(sample_count(0.01, 30.0) == 3001);
    CHECK(sample_count(0.1, 0.3) == 4);
    CHECK(sample_count(0.5, 0.0) == 1);
}

TEST_CASE("spectral function of the two-site chain") {
    const double b1 = 1.5, eta = 0.05;
    const auto grid = uniform_grid(-4.0, 4.0, 801);
    const auto s = spectral_function(LanczosChain({b1}), grid, eta);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // 2 Re[z / (z^2 + b1^2)] = Lorentzians at +-b1 with width eta.
        const double w = grid[i];
        const double expected = eta / (eta * eta + (w - b1) * (w - b1)) + eta / (eta * eta + (w + b1) * (w + b1));
        CHECK(s.values[i] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(s.values[i] >= 0.0);
    }
    CHECK_THROWS_AS(spectral_function(LanczosChain({b1}), grid, 0.0), InvalidArgument);
}

TEST_CASE("spectral function of sqrt(n) is the broadened Gaussian and is normalized") {
    std::vector<double> b(1999);
    for (std::size_t n = 1; n <= b.size(); ++n) b[n - 1] = std::sqrt(static_cast<double>(n));
    const double eta = 0.2;
    const auto grid = uniform_grid(-60.0, 60.0, 24001);
    const auto s = spectral_function(LanczosChain(b), grid, eta);
    double integral = 0.0;
    const double h = grid[1] - grid[0];
    for (double v : s.values) integral += v * h;
    // Lorentzian tails beyond |omega| = 60 carry about 2 eta / (pi 60) of the weight.
    CHECK(integral / (2.0 * std::numbers::pi) == doctest::Approx(1.0 - 2.0 * eta / (std::numbers::pi * 60.0)).epsilon(1e-3));
    // Reference: 2 Re int_0^inf exp(-t^2/2 - eta t - i omega t) dt by Simpson on [0, 14].
    auto broadened = [eta](double w) {
        const std::size_t steps = 14000;
        const double dt = 14.0 / static_cast<double>(steps);
        double acc = 0.0;
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = dt * static_cast<double>(k);
            const double f = std::exp(-t * t / 2.0 - eta * t) * std::cos(w * t);
            acc += (k == 0 || k == steps ? 1.0 : (k % 2 ? 4.0 : 2.0)) * f;
        }
        return 2.0 * acc * dt / 3.0;
    };
    for (std::size_t i = 0; i < grid.size(); i += 25) {
        if (std::abs(grid[i]) > 4.0) continue;
        CHECK(s.values[i] == doctest::Approx(broadened(grid[i])).epsilon(1e-6).scale(1.0));
    }
    CHECK(default_broadening(2000, 0.01) == doctest::Approx(4.0 * std::numbers::pi / 20.0));
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
    const std::size_t d = 200000;
    const auto b = oracle::random_coefficients(d - 1, 0.5, 1.5, 5);
    std::vector<double> c(d + 1, 0.0);
    std::copy(b.begin(), b.end(), c.begin() + 1);
    const auto x = oracle::random_coefficients(d, -1.0, 1.0, 6);
    std::vector<double> y1(d), y2(d);
    kernels::apply_generator_serial(c, x, y1, d - 1, d - 1, 0.3);
    kernels::apply_generator_omp(c, x, y2, d - 1, d - 1, 0.3);
    CHECK(y1 == y2);
    std::vector<double> p1 = x, p2 = x;
    kernels::chebyshev_update_serial(c, y1, p1, d - 1, d - 1, 0.3);
    kernels::chebyshev_update_omp(c, y1, p2, d - 1, d - 1, 0.3);
    CHECK(p1 == p2);
    // Partial windows: x beyond hi_in is ignored.
    std::vector<double> z1(d, 7.0), z2(d, 7.0);
    kernels::apply_generator_serial(c, x, z1, 100, 101, 1.0);
    kernels::apply_generator_omp(c, x, z2, 100, 101, 1.0);
    CHECK(z1 == z2);
    CHECK(z1[101] == doctest::Approx(c[101] * x[100]));
}

TEST_CASE("correlation series CSV round-trips bit-exactly") {
    const auto r = propagate(LanczosChain(oracle::random_coefficients(20, 0.5, 1.5, 8)), 0.01, 1.0);
    const std::string csv = io::series_csv(r.series);
    CHECK(csv.rfind("t,C\n", 0) == 0);
    const auto back = io::series_from_csv(csv);
    CHECK(back.values == r.series.values);
    CHECK(back.dt == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(back.normalized);
}
