#include "morilab/perturbation.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "morilab/error.hpp"
#include "morilab/rng.hpp"

namespace morilab {

std::vector<double> assemble_noise(std::size_t d, const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("noise amplitudes x and y differ in length");
    // cos/sin of 2 pi j / d for the residues j = n k mod d.
    std::vector<double> cos_table(d), sin_table(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(d);
        cos_table[j] = std::cos(a);
        sin_table[j] = std::sin(a);
    }
    std::vector<double> v(d - 1, 0.0);
    for (std::size_t n = 1; n < d; ++n) {
        double acc = 0.0;
        std::size_t j = 0;
        for (std::size_t k = 1; k <= x.size(); ++k) {
            j += n;
            if (j >= d) j -= d;
            acc += x[k - 1] * cos_table[j] + y[k - 1] * sin_table[j];
        }
        v[n - 1] = acc;
    }
    return v;
}

PerturbationDraw draw_noise(std::size_t d, std::size_t n_f, std::uint64_t seed) {
    if (d < 2) throw InvalidArgument("draw_noise: chain needs at least two sites");
    if (n_f < 1 || n_f > d) throw InvalidArgument(fmt::format("draw_noise: need 1 <= N_f <= d, got N_f = {}", n_f));
    NormalStream normal(seed);
    std::vector<double> x(n_f), y(n_f);
    for (std::size_t k = 0; k < n_f; ++k) {
        x[k] = normal();
        y[k] = normal();
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n_f; ++k) norm += x[k] * x[k] + y[k] * y[k];
    const double inv = 1.0 / std::sqrt(norm);
    for (std::size_t k = 0; k < n_f; ++k) {
        x[k] *= inv;
        y[k] *= inv;
    }
    return replay_noise(d, seed, std::move(x), std::move(y));
}

PerturbationDraw replay_noise(std::size_t d, std::uint64_t seed, std::vector<double> x, std::vector<double> y) {
    if (x.empty() || x.size() > d) throw InvalidArgument("replay_noise: need 1 <= N_f <= d");
    PerturbationDraw draw;
    draw.seed = seed;
    draw.d = d;
    draw.n_f = x.size();
    draw.v = assemble_noise(d, x, y);
    draw.x = std::move(x);
    draw.y = std::move(y);
    return draw;
}

PerturbedChain apply(const LanczosChain& base, double lambda, const PerturbationDraw& draw) {
    if (!(lambda >= 0.0)) throw InvalidArgument("perturbation strength lambda must be non-negative");
    if (draw.d != base.dimension()) {
        throw InvalidArgument(fmt::format("draw for d = {} applied to a chain with d = {}", draw.d, base.dimension()));
    }
    PerturbedChain out;
    out.base = base;
    out.lambda = lambda;
    out.draw = draw;
    const auto b = base.coefficients();
    std::vector<double> bt(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        bt[i] = b[i] + lambda * draw.v[i];
        if (bt[i] < positivity_floor) {
            bt[i] = positivity_floor;
            ++out.clamp_count;
        }
    }
    out.valid = static_cast<double>(out.clamp_count) <= 0.01 * static_cast<double>(base.dimension());
    out.perturbed = LanczosChain(std::move(bt), base.label());
    return out;
}

ScalingReport scaling_check(const PerturbedChain& p) {
    const auto b = p.base.coefficients();
    const auto bt = p.perturbed.coefficients();
    if (b.size() != bt.size() || p.draw.v.size() != b.size()) throw InvalidArgument("scaling_check: length mismatch");
    ScalingReport r;
    for (std::size_t i = 0; i < b.size(); ++i) {
        r.sum_base += b[i] * b[i];
        r.sum_perturbed += bt[i] * bt[i];
        r.sum_noise += p.draw.v[i] * p.draw.v[i];
        r.cross_term += 2.0 * p.lambda * b[i] * p.draw.v[i];
    }
    const double expected = p.lambda * p.lambda * r.sum_noise;
    r.relative_cross = expected > 0.0 ? (r.sum_perturbed - r.sum_base - expected) / expected : 0.0;
    return r;
}

}  // namespace morilab
