#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "morilab/chain.hpp"

namespace morilab {

/// Band-limited noise v_n = sum_{k=1}^{N_f} x_k cos(2 pi n k / d) + y_k sin(2 pi n k / d),
/// n = 1..d-1, with sum_k (x_k^2 + y_k^2) = 1.
struct PerturbationDraw {
    std::uint64_t seed = 0;
    std::size_t d = 0;
    std::size_t n_f = 0;
    std::vector<double> x;
    std::vector<double> y;
    /// v[n - 1] = v_n.
    std::vector<double> v;
};

/// Draws x_k, y_k i.i.d. standard normal, rescales them to unit total norm, and
/// assembles v. Requires 1 <= n_f <= d.
PerturbationDraw draw_noise(std::size_t d, std::size_t n_f, std::uint64_t seed);

/// Rebuilds a draw from stored amplitudes; bit-identical to the original.
PerturbationDraw replay_noise(std::size_t d, std::uint64_t seed, std::vector<double> x, std::vector<double> y);

std::vector<double> assemble_noise(std::size_t d, const std::vector<double>& x, const std::vector<double>& y);

inline constexpr double positivity_floor = 1e-6;

struct PerturbedChain {
    LanczosChain base;
    double lambda = 0.0;
    PerturbationDraw draw;
    LanczosChain perturbed;
    std::size_t clamp_count = 0;
    /// False when more than 1% of the coefficients hit the floor.
    bool valid = true;
};

/// b~_n = b_n + lambda v_n, floored at `positivity_floor`.
PerturbedChain apply(const LanczosChain& base, double lambda, const PerturbationDraw& draw);

struct ScalingReport {
    double sum_base = 0.0;
    double sum_perturbed = 0.0;
    double sum_noise = 0.0;
    /// 2 lambda sum b_n v_n (only the unclamped part is exact).
    double cross_term = 0.0;
    /// (sum b~^2 - sum b^2 - lambda^2 sum v^2) / (lambda^2 sum v^2); 0 when lambda = 0.
    double relative_cross = 0.0;
};

ScalingReport scaling_check(const PerturbedChain& perturbed);

}  // namespace morilab
