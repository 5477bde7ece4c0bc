#pragma once

#include <cstddef>
#include <span>

namespace morilab::kernels {

// Chain couplings are passed padded: coupling[0] = coupling[d] = 0 and
// coupling[n] = b_n for n = 1..d-1, so the stencil needs no boundary branches.

/// y_n = scale * (b_n x_{n-1} - b_{n+1} x_{n+1}) for n in [0, hi], with x_n = 0 beyond `hi_in`.
/// Reference implementation; the OpenMP kernel must reproduce it bit for bit.
void apply_generator_serial(std::span<const double> coupling, std::span<const double> x,
                            std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                            double scale) noexcept;

void apply_generator_omp(std::span<const double> coupling, std::span<const double> x,
                         std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                         double scale) noexcept;

/// Chebyshev three-term update, in place on `prev`:
///   prev_n <- 2 scale (A cur)_n + prev_n   for n in [0, hi_out].
/// `prev` must be zero beyond its own support.
void chebyshev_update_serial(std::span<const double> coupling, std::span<const double> cur,
                             std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                             double scale) noexcept;

void chebyshev_update_omp(std::span<const double> coupling, std::span<const double> cur,
                          std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                          double scale) noexcept;

void chebyshev_update(std::span<const double> coupling, std::span<const double> cur,
                      std::span<double> prev, std::size_t hi_cur, std::size_t hi_out,
                      double scale) noexcept;

/// Dispatches to the OpenMP kernel above `parallel_threshold` active sites.
void apply_generator(std::span<const double> coupling, std::span<const double> x,
                     std::span<double> y, std::size_t hi_in, std::size_t hi_out,
                     double scale) noexcept;

/// Active-site count above which `apply_generator` goes parallel.
inline constexpr std::size_t parallel_threshold = 1u << 16;

/// Worker cap from MORILAB_THREADS (0 or unset: OpenMP default).
int worker_count() noexcept;

}  // namespace morilab::kernels
