#include "morilab/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace morilab::kernels {

namespace {

inline double stencil(std::span<const double> c, std::span<const double> x, std::size_t n,
                      std::size_t hi_in) noexcept {
    const double left = (n >= 1 && n - 1 <= hi_in) ? c[n] * x[n - 1] : 0.0;
    const double right = (n + 1 <= hi_in) ? c[n + 1] * x[n + 1] : 0.0;
    return left - right;
}

}  // namespace

void apply_generator_serial(std::span<const double> coupling, std::span<const double> x,
                            std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                            double scale) noexcept {
    for (std::size_t n = 0; n <= hi_out; ++n) y[n] = scale * stencil(coupling, x, n, hi_in);
}

void apply_generator_omp(std::span<const double> coupling, std::span<const double> x,
                         std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                         double scale) noexcept {
    const auto last = static_cast<long long>(hi_out);
#pragma omp parallel for schedule(static)
    for (long long n = 0; n <= last; ++n) {
        y[static_cast<std::size_t>(n)] = scale * stencil(coupling, x, static_cast<std::size_t>(n), hi_in);
    }
}

void apply_generator(std::span<const double> coupling, std::span<const double> x,
                     std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                     double scale) noexcept {
    if (hi_out + 1 >= parallel_threshold && !omp_in_parallel()) {
        apply_generator_omp(coupling, x, y, hi_in, hi_out, scale);
    } else {
        apply_generator_serial(coupling, x, y, hi_in, hi_out, scale);
    }
}

void chebyshev_update_serial(std::span<const double> coupling, std::span<const double> cur,
                             std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                             double scale) noexcept {
    const double two_scale = 2.0 * scale;
    for (std::size_t n = 0; n <= hi_out; ++n) {
        prev[n] += two_scale * stencil(coupling, cur, n, hi_cur);
    }
}

void chebyshev_update_omp(std::span<const double> coupling, std::span<const double> cur,
                          std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                          double scale) noexcept {
    const double two_scale = 2.0 * scale;
    const auto last = static_cast<long long>(hi_out);
#pragma omp parallel for schedule(static)
    for (long long n = 0; n <= last; ++n) {
        const auto i = static_cast<std::size_t>(n);
        prev[i] += two_scale * stencil(coupling, cur, i, hi_cur);
    }
}

void chebyshev_update(std::span<const double> coupling, std::span<const double> cur,
                      std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                      double scale) noexcept {
    if (hi_out + 1 >= parallel_threshold && !omp_in_parallel()) {
        chebyshev_update_omp(coupling, cur, prev, hi_cur, hi_out, scale);
    } else {
        chebyshev_update_serial(coupling, cur, prev, hi_cur, hi_out, scale);
    }
}

int worker_count() noexcept {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("MORILAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0) n = std::min(n, cap);
        } catch (...) {
        }
    }
    return std::max(n, 1);
}

}  // namespace morilab::kernels
