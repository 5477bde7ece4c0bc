#include "morilab/design.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "morilab/error.hpp"

namespace morilab {

LinearTail tangent_tail(std::size_t n_star) {
    if (n_star < 1) throw InvalidArgument("transition index n* must be at least 1");
    const double r = std::sqrt(static_cast<double>(n_star));
    return {1.0 / (2.0 * r), r / 2.0};
}

LanczosChain gaussian_chain(std::size_t n_star, std::size_t d) {
    if (n_star < 1 || n_star >= d) {
        throw InvalidArgument(fmt::format("gaussian_chain: need 1 <= n* < d, got n* = {}, d = {}", n_star, d));
    }
    const LinearTail tail = tangent_tail(n_star);
    std::vector<double> b(d - 1);
    for (std::size_t n = 1; n < d; ++n) b[n - 1] = n <= n_star ? std::sqrt(static_cast<double>(n)) : tail(n);
    return LanczosChain(std::move(b), "g");
}

LanczosChain exponential_chain(double a, std::size_t n_star, std::size_t d) {
    if (!(a > 0.0)) throw InvalidArgument("exponential_chain: a must be positive");
    if (n_star < 1 || n_star >= d) {
        throw InvalidArgument(fmt::format("exponential_chain: need 1 <= n* < d, got n* = {}, d = {}", n_star, d));
    }
    const LinearTail tail = tangent_tail(n_star);
    std::vector<double> b(d - 1);
    for (std::size_t n = 1; n < d; ++n) b[n - 1] = n == 1 ? a : tail(n);
    return LanczosChain(std::move(b), "e");
}

LanczosChain edo_chain(double b1, double b2, const LinearTail& tail, std::size_t d) {
    if (!(b1 > 0.0) || !(b2 > 0.0)) throw InvalidArgument("edo_chain: b1 and b2 must be positive");
    if (d < 3) throw InvalidArgument("edo_chain: need d >= 3");
    std::vector<double> b(d - 1);
    b[0] = b1;
    b[1] = b2;
    for (std::size_t n = 3; n < d; ++n) b[n - 1] = tail(n);
    return LanczosChain(std::move(b), "edo");
}

ContinuationResult linear_continuation(const std::vector<double>& prefix, std::size_t d,
                                       const ContinuationOptions& options) {
    if (prefix.empty()) throw InvalidArgument("linear_continuation: prefix is empty");
    for (double v : prefix) {
        if (!(v > 0.0)) throw InvalidArgument("linear_continuation: prefix entries must be positive");
    }
    const std::size_t len = prefix.size();
    if (len + 1 > d) throw InvalidArgument("linear_continuation: prefix longer than the chain");
    const std::size_t m = std::min(options.fit_points, len);
    if (m < 2) throw InvalidArgument("linear_continuation: need at least two points to fit a slope");

    // Least squares on (n, b_n), n = len - m + 1 .. len.
    double sn = 0.0, sb = 0.0;
    for (std::size_t n = len - m + 1; n <= len; ++n) {
        sn += static_cast<double>(n);
        sb += prefix[n - 1];
    }
    const double mean_n = sn / static_cast<double>(m);
    const double mean_b = sb / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t n = len - m + 1; n <= len; ++n) {
        const double x = static_cast<double>(n) - mean_n;
        sxx += x * x;
        sxy += x * (prefix[n - 1] - mean_b);
    }
    const double slope = sxy / sxx;
    if (!(slope > 0.0)) {
        throw InvalidArgument(fmt::format(
            "linear_continuation: fitted slope {} is not positive; the tail would violate linear growth", slope));
    }
    const LinearTail tail{slope, mean_b - slope * mean_n};

    double residual[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t n = len - m + 1; n <= len; ++n) {
        residual[n % 2] += prefix[n - 1] - tail(n);
        ++count[n % 2];
    }
    for (int p = 0; p < 2; ++p) residual[p] = count[p] ? residual[p] / static_cast<double>(count[p]) : 0.0;

    std::vector<double> b(prefix);
    b.reserve(d - 1);
    const double window = static_cast<double>(options.blend_window);
    for (std::size_t n = len + 1; n < d; ++n) {
        const double k = static_cast<double>(n - len);
        const double fade = options.blend_window > 0 ? std::max(0.0, 1.0 - k / window) : 0.0;
        b.push_back(tail(n) + fade * residual[n % 2]);
    }
    return {LanczosChain(std::move(b)), tail, len};
}

ContinuationResult gdo_chain(std::size_t d, const GdoOptions& options) {
    CorrelationForm target;
    target.gauss_rate = 1.0 / 8.0;
    target.cos_freqs = {2.0};
    const auto spectrum = fourier_of_correlation(target, options.quadrature);
    const auto reversed = lanczos_from_spectrum(spectrum, options.reverse_coefficients);
    if (reversed.achieved < options.continuation.fit_points) {
        throw NumericalError(fmt::format("gdo_chain: only {} coefficients recovered", reversed.achieved));
    }
    auto result = linear_continuation(reversed.b, d, options.continuation);
    result.chain.set_label("gdo");
    return result;
}

double q_ratio(const LanczosChain& a, const LanczosChain& b) {
    const double denom = spectral_width_sum(b);
    if (!(denom > 0.0)) throw InvalidArgument("q_ratio: reference chain has no coefficients");
    return spectral_width_sum(a) / denom;
}

double relaxation_time(const CorrelationSeries& series) noexcept {
    const double level = std::exp(-1.0);
    for (std::size_t n = 0; n < series.size(); ++n) {
        if (std::abs(series.values[n]) < level) return series.time(n);
    }
    return series.size() ? series.time(series.size() - 1) : 0.0;
}

}  // namespace morilab
