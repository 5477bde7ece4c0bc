#include <doctest.h>

#include <cmath>
#include <complex>
#include <algorithm>
#include <numbers>
#include <numeric>

#include "morilab/design.hpp"
#include "morilab/error.hpp"
#include "morilab/io.hpp"
#include "morilab/perturbation.hpp"
#include "morilab/rng.hpp"

using namespace morilab;

namespace {

double sum_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

TEST_CASE("amplitudes are jointly normalized") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = draw_noise(300, 100, seed);
        CHECK(d.x.size() == 100);
        CHECK(d.v.size() == 299);
        CHECK(std::abs(sum_squares(d.x) + sum_squares(d.y) - 1.0) < 1e-14);
    }
}

TEST_CASE("noise matches the trigonometric sum directly") {
    const auto d = draw_noise(97, 13, 5);
    for (std::size_t n = 1; n < 97; ++n) {
        double v = 0.0;
        for (std::size_t k = 1; k <= 13; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(n * k) / 97.0;
            v += d.x[k - 1] * std::cos(a) + d.y[k - 1] * std::sin(a);
        }
        CHECK(d.v[n - 1] == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("sum of v^2 is d/2 minus the missing n = 0 term") {
    // Orthogonality over the full period gives sum_{n=0}^{d-1} v_n^2 = d/2 for N_f < d/2,
    // and v_0 = sum_k x_k is the only term not in the stored sequence.
    std::size_t beyond_two = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto draw = draw_noise(2000, 666, seed);
        double v0 = 0.0;
        for (double x : draw.x) v0 += x;
        CHECK(sum_squares(draw.v) == doctest::Approx(1000.0 - v0 * v0).epsilon(1e-12));
        if (std::abs(sum_squares(draw.v) - 1000.0) > 2.0) ++beyond_two;
    }
    // v_0^2 is about Z^2 / 2, above 2 with probability P(|Z| > 2) = 4.6%.
    CHECK(beyond_two < 25);
}

TEST_CASE("draws are deterministic and seed-dependent") {
    const auto a = draw_noise(500, 100, 42);
    const auto b = draw_noise(500, 100, 42);
    const auto c = draw_noise(500, 100, 43);
    CHECK(a.v == b.v);
    CHECK(a.x == b.x);
    CHECK(a.v != c.v);
    NormalStream s1(7), s2(7);
    for (int i = 0; i < 5; ++i) CHECK(s1() == s2());
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
    CHECK(derive_seed(1, 0, 1) != derive_seed(1, 1, 0));
    CHECK(derive_seed(1, 3, 1) == derive_seed(1, 3, 1));
}

TEST_CASE("standard normal stream has unit variance") {
    NormalStream s(2024);
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s();
        m += z;
        v += z * z;
    }
    m /= n;
    v = v / n - m * m;
    CHECK(std::abs(m) < 5.0 / std::sqrt(n));
    CHECK(v == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("noise is band limited to N_f") {
    const std::size_t d = 256, nf = 40;
    const auto draw = draw_noise(d, nf, 9);
    for (std::size_t k = 0; k < d; ++k) {
        std::complex<double> acc = 0.0;
        // Include the n = 0 term so the DFT sees the full periodic sequence.
        double v0 = 0.0;
        for (double x : draw.x) v0 += x;
        acc += v0;
        for (std::size_t n = 1; n < d; ++n) {
            acc += draw.v[n - 1] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(n * k) / d);
        }
        const std::size_t folded = std::min(k, d - k);
        if (folded > nf || folded == 0) CHECK(std::abs(acc) < 1e-12 * d);
        else CHECK(std::abs(acc) == doctest::Approx(0.5 * d * std::hypot(draw.x[folded - 1], draw.y[folded - 1])));
    }
}

TEST_CASE("white-noise limit N_f = d is accepted; bad cutoffs are not") {
    const auto d = draw_noise(100, 100, 1);
    CHECK(d.n_f == 100);
    CHECK_THROWS_AS(draw_noise(100, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(draw_noise(100, 101, 1), InvalidArgument);
}

TEST_CASE("apply adds lambda v and floors") {
    const auto base = gaussian_chain(10, 200);
    const auto draw = draw_noise(200, 66, 3);
    const auto zero = apply(base, 0.0, draw);
    CHECK(zero.perturbed.coefficients().size() == base.coefficients().size());
    CHECK(std::equal(zero.perturbed.coefficients().begin(), zero.perturbed.coefficients().end(),
                     base.coefficients().begin()));
    CHECK(zero.clamp_count == 0);
    CHECK(zero.valid);

    const auto p = apply(base, 0.5, draw);
    for (std::size_t n = 1; n < 200; ++n) CHECK(p.perturbed.b(n) == base.b(n) + 0.5 * draw.v[n - 1]);
    CHECK_THROWS_AS(apply(base, -0.1, draw), InvalidArgument);
    CHECK_THROWS_AS(apply(gaussian_chain(10, 100), 0.5, draw), InvalidArgument);

    // A huge lambda floors many entries and invalidates the trial.
    const auto big = apply(base, 100.0, draw);
    CHECK(big.clamp_count > 2);
    CHECK_FALSE(big.valid);
    for (double b : big.perturbed.coefficients()) CHECK(b >= positivity_floor);
}

TEST_CASE("scaling report") {
    const auto base = gaussian_chain(150, 2000);
    const auto draw = draw_noise(2000, 666, 11);
    const auto r0 = scaling_check(apply(base, 0.0, draw));
    CHECK(r0.relative_cross == 0.0);
    CHECK(r0.cross_term == 0.0);

    const auto p = apply(base, 0.5, draw);
    const auto r = scaling_check(p);
    CHECK(r.sum_perturbed - r.sum_base - 0.25 * r.sum_noise == doctest::Approx(r.cross_term).epsilon(1e-9));
    CHECK(r.sum_base == doctest::Approx(spectral_width_sum(base)).epsilon(1e-15));
}

TEST_CASE("ensemble cross term averages to zero and the scaling law holds") {
    const auto base = gaussian_chain(150, 2000);
    const double lambda = 0.5;
    std::vector<double> cross, total, noise;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const auto p = apply(base, lambda, draw_noise(2000, 666, derive_seed(77, seed, 0)));
        const auto r = scaling_check(p);
        cross.push_back(r.cross_term);
        total.push_back(r.sum_perturbed);
        noise.push_back(r.sum_noise);
    }
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto se = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1) / v.size());
    };
    CHECK(std::abs(mean(cross)) <= 3.0 * se(cross));
    const double predicted = spectral_width_sum(base) + lambda * lambda * mean(noise);
    CHECK(std::abs(mean(total) - predicted) <= 3.0 * se(total));
}

TEST_CASE("relative cross term at paper scale vanishes only on average") {
    // The linear ramp has large low-frequency content, so single draws give |relative cross| of order one;
    // the ensemble mean is consistent with zero.
    const auto base = gaussian_chain(150, 10000);
    std::vector<double> rel;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        rel.push_back(scaling_check(apply(base, 0.5, draw_noise(10000, 3333, derive_seed(5, seed, 0)))).relative_cross);
    }
    const double m = std::accumulate(rel.begin(), rel.end(), 0.0) / rel.size();
    double ss = 0.0;
    for (double x : rel) ss += (x - m) * (x - m);
    const double se = std::sqrt(ss / (rel.size() - 1) / rel.size());
    CHECK(std::abs(m) <= 3.0 * se);
}

TEST_CASE("draw JSON replays bit-exactly") {
    const auto draw = draw_noise(400, 133, 1234);
    const auto text = io::draw_json(draw).dump();
    const auto back = io::draw_from_json(nlohmann::ordered_json::parse(text));
    CHECK(back.seed == 1234);
    CHECK(back.n_f == 133);
    CHECK(back.x == draw.x);
    CHECK(back.v == draw.v);
}
