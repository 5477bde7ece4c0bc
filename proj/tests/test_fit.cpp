#include <doctest.h>

#include <cmath>
#include <numbers>

#include "morilab/design.hpp"
#include "morilab/error.hpp"
#include "morilab/fit.hpp"
#include "morilab/io.hpp"
#include "morilab/propagate.hpp"

using namespace morilab;

namespace {

CorrelationSeries sample(const FitModel& m, double dt, double t_max) {
    CorrelationSeries s;
    s.dt = dt;
    const std::size_t n = sample_count(dt, t_max);
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(m(s.time(i)));
    return s;
}

}  // namespace

TEST_CASE("model names") {
    for (auto c : {ModelClass::Exp, ModelClass::Gauss, ModelClass::ExpCos, ModelClass::GaussCos}) {
        CHECK(parse_model_class(model_name(c)) == c);
    }
    CHECK(parse_model_class("gauss_cos") == ModelClass::GaussCos);
    CHECK_THROWS_AS(parse_model_class("LORENTZ"), InvalidArgument);
    CHECK(parameter_count(ModelClass::Exp) == 2);
    CHECK(parameter_count(ModelClass::ExpCos) == 4);
}

TEST_CASE("equilibration detection") {
    CorrelationSeries one;
    one.dt = 0.01;
    one.values.assign(1001, 1.0);
    const auto e1 = detect_equilibration(one);
    CHECK_FALSE(e1.equilibrated);
    CHECK(e1.n_eq == 1000);

    const auto decay = sample({ModelClass::Exp, 1.0, 0.24}, 0.01, 40.0);
    const auto e2 = detect_equilibration(decay);
    CHECK(e2.equilibrated);
    CHECK(e2.n_eq * 0.01 == doctest::Approx(std::log(100.0) / 0.24 + 5.0).epsilon(1e-3));

    EquilibrationOptions longer;
    longer.window = 8.0;
    CHECK(detect_equilibration(decay, longer).n_eq * 0.01 == doctest::Approx(std::log(100.0) / 0.24 + 8.0).epsilon(1e-3));

    // A revival interrupts the quiet window.
    CorrelationSeries bump = decay;
    bump.values[2400] = 0.5;
    CHECK(detect_equilibration(bump).n_eq > 2900);
    CHECK_THROWS_AS(detect_equilibration(CorrelationSeries{}), InvalidArgument);
}

TEST_CASE("epsilon and sigma normalization") {
    const FitModel m{ModelClass::Exp, 1.0, 0.5};
    const auto s = sample(m, 0.1, 10.0);
    CHECK(epsilon(s, m, 50) == 0.0);

    FitModel shifted = m;
    auto offset = s;
    for (auto& v : offset.values) v += 0.01;
    const std::size_t n_eq = 40;
    CHECK(epsilon(offset, m, n_eq) == doctest::Approx(0.01 * std::sqrt(41.0 / 40.0)).epsilon(1e-12));
    CHECK(sigma(offset, s, n_eq) == doctest::Approx(0.01 * std::sqrt(41.0 / 40.0)).epsilon(1e-12));
    CHECK(sigma(s, s, n_eq) == 0.0);

    auto other = s;
    other.dt = 0.2;
    CHECK_THROWS_AS(sigma(s, other, 10), InvalidArgument);
    CHECK_THROWS_AS(epsilon(s, m, 0), InvalidArgument);
    CHECK_THROWS_AS(epsilon(s, m, s.size()), InvalidArgument);
    (void)shifted;
}

TEST_CASE("epsilon is invariant under reparameterizations that fix f") {
    const FitModel m{ModelClass::ExpCos, 1.0, 0.4, 1.3, 0.7};
    const auto s = sample({ModelClass::ExpCos, 0.9, 0.5, 1.2, 0.6}, 0.05, 15.0);
    FitModel shifted = m;
    shifted.phi += 2.0 * std::numbers::pi;
    FitModel mirrored = m;
    mirrored.omega = -m.omega;
    mirrored.phi = -m.phi;
    CHECK(epsilon(s, shifted, 200) == doctest::Approx(epsilon(s, m, 200)).epsilon(1e-12));
    CHECK(epsilon(s, mirrored, 200) == doctest::Approx(epsilon(s, m, 200)).epsilon(1e-12));
}

TEST_CASE("self-fits recover the generating parameters") {
    SUBCASE("EXP") {
        const auto s = sample({ModelClass::Exp, 1.02, 0.24}, 0.01, 30.0);
        const auto r = fit(s, ModelClass::Exp, detect_equilibration(s).n_eq);
        CHECK(r.converged);
        CHECK(r.model.A == doctest::Approx(1.02).epsilon(1e-6));
        CHECK(r.model.mu == doctest::Approx(0.24).epsilon(1e-6));
        CHECK(r.epsilon <= 1e-8);
    }
    SUBCASE("GAUSS") {
        const auto s = sample({ModelClass::Gauss, 0.95, 0.5}, 0.01, 10.0);
        const auto r = fit(s, ModelClass::Gauss, 900);
        CHECK(r.model.A == doctest::Approx(0.95).epsilon(1e-6));
        CHECK(r.model.mu == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(r.epsilon <= 1e-8);
    }
    SUBCASE("EXP_COS") {
        const auto s = sample({ModelClass::ExpCos, 1.04, 0.57, 2.19, 0.32}, 0.01, 25.0);
        const auto r = fit(s, ModelClass::ExpCos, detect_equilibration(s).n_eq);
        CHECK(r.converged);
        CHECK(r.restarts_used == 12);
        CHECK(r.model.A == doctest::Approx(1.04).epsilon(1e-6));
        CHECK(r.model.mu == doctest::Approx(0.57).epsilon(1e-6));
        CHECK(r.model.omega == doctest::Approx(2.19).epsilon(1e-6));
        CHECK(r.model.phi == doctest::Approx(0.32).epsilon(1e-6));
        CHECK(r.epsilon <= 1e-8);
    }
    SUBCASE("GAUSS_COS with a phase that needs reduction") {
        const auto s = sample({ModelClass::GaussCos, 1.0, 0.125, 2.0, 5.0}, 0.01, 20.0);
        const auto r = fit(s, ModelClass::GaussCos, detect_equilibration(s).n_eq);
        CHECK(r.model.phi >= 0.0);
        CHECK(r.model.phi < 2.0 * std::numbers::pi);
        CHECK(r.model.phi == doctest::Approx(5.0).epsilon(1e-6));
        CHECK(r.model.omega == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.epsilon <= 1e-8);
    }
}

TEST_CASE("fits are idempotent") {
    const auto e = propagate(exponential_chain(1.2, 150, 2000), 0.01, 30.0).series;
    const auto r1 = fit(e, ModelClass::Exp, detect_equilibration(e).n_eq);
    const auto own = sample(r1.model, 0.01, 30.0);
    const auto r2 = fit(own, ModelClass::Exp, r1.n_eq);
    CHECK(r2.model.A == doctest::Approx(r1.model.A).epsilon(1e-9));
    CHECK(r2.model.mu == doctest::Approx(r1.model.mu).epsilon(1e-9));
}

TEST_CASE("multi-start returns the best restart") {
    const auto s = sample({ModelClass::ExpCos, 1.0, 0.3, 1.5, 2.0}, 0.02, 20.0);
    auto noisy = s;
    for (std::size_t n = 0; n < noisy.size(); ++n) noisy.values[n] += 0.02 * std::sin(7.3 * n);
    const std::size_t n_eq = noisy.size() - 1;
    const auto all = fit(noisy, ModelClass::ExpCos, n_eq);
    for (double phase : {0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469}) {
        FitOptions single;
        single.mu_scales = {1.0};
        single.phases = {phase};
        CHECK(all.epsilon <= fit(noisy, ModelClass::ExpCos, n_eq, single).epsilon + 1e-15);
    }
    // A warm start can only improve on itself.
    FitOptions warm;
    warm.warm_start = FitModel{ModelClass::ExpCos, 1.0, 0.3, 1.5, 2.0};
    const auto w = fit(noisy, ModelClass::ExpCos, n_eq, warm);
    CHECK(w.epsilon <= epsilon(noisy, *warm.warm_start, n_eq) + 1e-15);
    CHECK(w.restarts_used == 13);
}

TEST_CASE("fit preconditions") {
    const auto s = sample({ModelClass::Exp, 1.0, 0.5}, 0.1, 10.0);
    CHECK_THROWS_AS(fit(s, ModelClass::Exp, 6), InvalidArgument);
    CHECK_NOTHROW(fit(s, ModelClass::Exp, 7));
    CHECK_THROWS_AS(fit(s, ModelClass::Exp, s.size()), InvalidArgument);
}

TEST_CASE("bounds hold") {
    // A curve scaled by 3 cannot be matched: A stays at its upper bound.
    const auto s = sample({ModelClass::Exp, 3.0, 0.5}, 0.05, 15.0);
    const auto r = fit(s, ModelClass::Exp, s.size() - 1);
    CHECK(r.model.A <= 1.5);
    CHECK(r.model.A == doctest::Approx(1.5));
    CHECK(r.model.mu >= 0.0);
    CHECK(r.epsilon > 0.1);
}

TEST_CASE("unperturbed designs fit their documented parameters") {
    const auto e = propagate(exponential_chain(1.2, 150, 2000), 0.01, 30.0).series;
    const auto re = fit(e, ModelClass::Exp, detect_equilibration(e).n_eq);
    CHECK(re.model.A == doctest::Approx(1.02).epsilon(0.01));
    CHECK(re.model.mu == doctest::Approx(0.24).epsilon(0.02));

    const auto edo = propagate(edo_chain(2.0, 1.6, gdo_chain(2000).tail, 2000), 0.01, 25.0).series;
    const auto ro = fit(edo, ModelClass::ExpCos, detect_equilibration(edo).n_eq);
    CHECK(ro.model.A == doctest::Approx(1.04).epsilon(0.01));
    CHECK(ro.model.mu == doctest::Approx(0.57).epsilon(0.01));
    // Frequency and phase come out as 2.19 and 0.32 respectively.
    CHECK(ro.model.omega == doctest::Approx(2.19).epsilon(0.01));
    CHECK(ro.model.phi == doctest::Approx(0.32).epsilon(0.02));
}

TEST_CASE("fit JSON") {
    const auto s = sample({ModelClass::Gauss, 1.0, 0.5}, 0.01, 10.0);
    const auto j = io::fit_json(fit(s, ModelClass::Gauss, 500));
    CHECK(j["model"] == "GAUSS");
    CHECK(j["n_eq"] == 500);
    CHECK_FALSE(j.contains("omega"));
}
