#pragma once

#include <cstddef>
#include <vector>

#include "morilab/chain.hpp"
#include "morilab/reverse.hpp"

namespace morilab {

/// Affine growth b_n = slope * n + intercept.
struct LinearTail {
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(std::size_t n) const noexcept { return slope * static_cast<double>(n) + intercept; }
};

struct DesignParams {
    std::size_t n_star = 150;
    double a = 1.2;
    double b1 = 2.0;
    double b2 = 1.6;
    std::size_t d = 2000;
};

/// Tangent to sqrt(n) at n_star: slope 1/(2 sqrt(n*)), intercept sqrt(n*)/2.
LinearTail tangent_tail(std::size_t n_star);

/// b_n = sqrt(n) for n <= n*, continued along the tangent line above. Requires 1 <= n* < d.
LanczosChain gaussian_chain(std::size_t n_star, std::size_t d);

/// b_1 = a, b_n = tangent_tail(n*)(n) for n >= 2.
LanczosChain exponential_chain(double a, std::size_t n_star, std::size_t d);

/// b_1, b_2 given, then b_n = tail(n) for n >= 3.
LanczosChain edo_chain(double b1, double b2, const LinearTail& tail, std::size_t d);

struct ContinuationOptions {
    /// Number of trailing prefix points fitted by the affine tail.
    std::size_t fit_points = 10;
    /// Indices over which the residual even/odd pattern fades out.
    std::size_t blend_window = 10;
};

struct ContinuationResult {
    LanczosChain chain;
    LinearTail tail;
    std::size_t prefix_length = 0;
};

/// Extends `prefix` (b_1..b_L) to d - 1 coefficients with an affine tail fitted to its
/// last `fit_points` entries. The residual pattern (mean residual per index parity)
/// is carried on and faded linearly to zero over `blend_window`.
ContinuationResult linear_continuation(const std::vector<double>& prefix, std::size_t d,
                                       const ContinuationOptions& options = {});

struct GdoOptions {
    std::size_t reverse_coefficients = 50;
    ContinuationOptions continuation;
    QuadratureOptions quadrature;
};

/// Reverse-engineered coefficients of exp(-t^2/8) cos(2t), continued linearly.
ContinuationResult gdo_chain(std::size_t d, const GdoOptions& options = {});

/// sum (b^A)^2 / sum (b^B)^2.
double q_ratio(const LanczosChain& a, const LanczosChain& b);

/// First time at which |C| drops below 1/e, or the horizon if it never does.
double relaxation_time(const CorrelationSeries& series) noexcept;

}  // namespace morilab
