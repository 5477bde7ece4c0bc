#include "morilab/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "morilab/error.hpp"
#include "morilab/kernels.hpp"

namespace morilab {

namespace {

// coupling[0] = coupling[d] = 0, coupling[n] = b_n.
std::vector<double> padded_couplings(const LanczosChain& chain) {
    const auto b = chain.coefficients();
    std::vector<double> c(chain.dimension() + 1, 0.0);
    std::copy(b.begin(), b.end(), c.begin() + 1);
    return c;
}

// Expansion order: all Bessel weights beyond it are below 1e-18.
std::size_t chebyshev_order(double x) {
    constexpr double cutoff = 1e-18;
    constexpr std::size_t max_order = 20000;
    auto k = static_cast<std::size_t>(std::ceil(x)) + 1;
    while (std::abs(std::cyl_bessel_j(static_cast<double>(k), x)) >= cutoff) {
        if (++k > max_order) {
            throw NumericalError(fmt::format(
                "Chebyshev expansion needs more than {} terms (spectral radius x dt = {}); reduce dt", max_order, x));
        }
    }
    return k;
}

class Recorder {
public:
    Recorder(const PropagationOptions& options, std::size_t d, std::size_t samples, double dt)
        : options_(options), d_(d), edge_begin_(d - std::max<std::size_t>(1, (d + 99) / 100)) {
        result_.series.dt = dt;
        result_.series.normalized = true;
        result_.series.values.reserve(samples);
        if (options.keep_snapshots) result_.snapshots.reserve(samples);
    }

    void record(std::span<const double> phi, std::size_t hi, double t) {
        double norm = 0.0;
        double edge = 0.0;
        for (std::size_t n = 0; n <= hi; ++n) {
            const double w = phi[n] * phi[n];
            norm += w;
            if (n >= edge_begin_) edge += w;
        }
        result_.max_norm_drift = std::max(result_.max_norm_drift, std::abs(norm - 1.0));
        // d = 1 has no boundary to reflect from.
        if (d_ > 1) result_.max_boundary_weight = std::max(result_.max_boundary_weight, edge);
        result_.series.values.push_back(phi[0]);
        if (options_.keep_snapshots) {
            AmplitudeState s;
            s.phi.assign(phi.begin(), phi.end());
            s.t = t;
            result_.snapshots.push_back(std::move(s));
        }
    }

    PropagationResult finish(const char* method_hint) {
        if (result_.max_norm_drift > options_.norm_tolerance) {
            throw NumericalError(fmt::format(
                "norm drift {:.3e} exceeds tolerance {:.1e}; {}", result_.max_norm_drift,
                options_.norm_tolerance, method_hint));
        }
        result_.boundary_flag = result_.max_boundary_weight > options_.boundary_tolerance;
        return std::move(result_);
    }

    PropagationResult& result() { return result_; }

private:
    const PropagationOptions& options_;
    std::size_t d_;
    std::size_t edge_begin_;
    PropagationResult result_;
};

PropagationResult propagate_chebyshev(const LanczosChain& chain, double dt, std::size_t samples,
                                      const PropagationOptions& options) {
    const std::size_t d = chain.dimension();
    const auto coupling = padded_couplings(chain);
    const double radius = 2.0 * chain.max_coefficient();

    std::vector<double> phi(d, 0.0);
    phi[0] = 1.0;
    std::size_t hi = 0;

    Recorder rec(options, d, samples, dt);
    rec.record(phi, hi, 0.0);
    if (d == 1) {
        for (std::size_t s = 1; s < samples; ++s) rec.record(phi, hi, static_cast<double>(s) * dt);
        return rec.finish("");
    }

    const double x = radius * dt;
    const std::size_t order = chebyshev_order(x);
    std::vector<double> weight(order + 1);
    for (std::size_t k = 0; k <= order; ++k) {
        weight[k] = (k == 0 ? 1.0 : 2.0) * std::cyl_bessel_j(static_cast<double>(k), x);
    }
    rec.result().chebyshev_terms = order + 1;

    const double scale = 1.0 / radius;
    std::vector<double> prev(d, 0.0), cur(d, 0.0), acc(d, 0.0);
    for (std::size_t s = 1; s < samples; ++s) {
        const std::size_t reach = std::min(d - 1, hi + order);
        std::fill(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(reach + 1), 0.0);
        std::fill(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(reach + 1), 0.0);
        std::fill(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(reach + 1), 0.0);
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(hi + 1), prev.begin());

        // P_0 = 1, P_1 = y, P_{k+1} = 2 y P_k + P_{k-1} with y = A / R; then
        // exp(dt A) = sum_k w_k P_k(y), w_k = (2 - delta_k0) J_k(R dt).
        std::size_t hi_cur = std::min(d - 1, hi + 1);
        kernels::apply_generator(coupling, prev, cur, hi, hi_cur, scale);
        for (std::size_t n = 0; n <= hi_cur; ++n) acc[n] = weight[0] * prev[n] + weight[1] * cur[n];
        for (std::size_t k = 2; k <= order; ++k) {
            const std::size_t hi_next = std::min(d - 1, hi_cur + 1);
            kernels::chebyshev_update(coupling, cur, prev, hi_cur, hi_next, scale);
            const double w = weight[k];
            for (std::size_t n = 0; n <= hi_next; ++n) acc[n] += w * prev[n];
            std::swap(prev, cur);
            hi_cur = hi_next;
        }

        hi = hi_cur;
        std::copy(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(hi + 1), phi.begin());
        while (hi > 0 && std::abs(phi[hi]) < options.truncation) phi[hi--] = 0.0;
        rec.record(phi, hi, static_cast<double>(s) * dt);
    }
    return rec.finish("reduce dt");
}

PropagationResult propagate_rk4(const LanczosChain& chain, double dt, std::size_t samples,
                                const PropagationOptions& options) {
    const std::size_t d = chain.dimension();
    const auto coupling = padded_couplings(chain);
    const double bmax = chain.max_coefficient();
    const double bound = rk4_stability_bound(chain);
    const double horizon = std::max(dt, dt * static_cast<double>(samples - 1));

    double h = dt;
    if (options.rk4_substep > 0.0) {
        if (options.rk4_substep > bound * (1.0 + 1e-12)) {
            throw NumericalError(fmt::format(
                "Runge-Kutta substep {} exceeds the stability bound 0.5/max(b) = {}; use a substep <= {} "
                "or the chebyshev method",
                options.rk4_substep, bound, bound));
        }
        h = std::min(dt, options.rk4_substep);
    } else if (bmax > 0.0) {
        // Global error ~ T (2 bmax)^5 h^4 / 120.
        const double lambda = 2.0 * bmax;
        const double h_acc = std::pow(120.0 * options.rk4_target_error / (horizon * std::pow(lambda, 5)), 0.25);
        h = std::min({dt, bound, h_acc});
    }
    const auto substeps = static_cast<std::size_t>(std::ceil(dt / h - 1e-9));
    h = dt / static_cast<double>(substeps);

    std::vector<double> phi(d, 0.0), k1(d), k2(d), k3(d), k4(d), tmp(d);
    phi[0] = 1.0;
    const std::size_t hi = d - 1;

    Recorder rec(options, d, samples, dt);
    rec.result().rk4_substeps = substeps;
    rec.record(phi, hi, 0.0);
    for (std::size_t s = 1; s < samples; ++s) {
        for (std::size_t sub = 0; sub < substeps; ++sub) {
            kernels::apply_generator(coupling, phi, k1, hi, hi, 1.0);
            for (std::size_t n = 0; n < d; ++n) tmp[n] = phi[n] + 0.5 * h * k1[n];
            kernels::apply_generator(coupling, tmp, k2, hi, hi, 1.0);
            for (std::size_t n = 0; n < d; ++n) tmp[n] = phi[n] + 0.5 * h * k2[n];
            kernels::apply_generator(coupling, tmp, k3, hi, hi, 1.0);
            for (std::size_t n = 0; n < d; ++n) tmp[n] = phi[n] + h * k3[n];
            kernels::apply_generator(coupling, tmp, k4, hi, hi, 1.0);
            for (std::size_t n = 0; n < d; ++n) {
                phi[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
            }
        }
        rec.record(phi, hi, static_cast<double>(s) * dt);
    }
    return rec.finish(fmt::format("reduce the Runge-Kutta substep below {:.3e} or use the chebyshev method",
                                  0.5 * h).c_str());
}

}  // namespace

double rk4_stability_bound(const LanczosChain& chain) noexcept {
    const double bmax = chain.max_coefficient();
    return bmax > 0.0 ? 0.5 / bmax : std::numeric_limits<double>::infinity();
}

std::size_t sample_count(double dt, double t_max) {
    if (!(dt > 0.0)) throw InvalidArgument("time step dt must be positive");
    if (!(t_max >= 0.0)) throw InvalidArgument("horizon t_max must be non-negative");
    return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

PropagationResult propagate(const LanczosChain& chain, double dt, double t_max,
                            const PropagationOptions& options) {
    const std::size_t samples = sample_count(dt, t_max);
    switch (options.method) {
        case PropagatorMethod::RungeKutta4:
            return propagate_rk4(chain, dt, samples, options);
        case PropagatorMethod::Chebyshev:
        default:
            return propagate_chebyshev(chain, dt, samples, options);
    }
}

}  // namespace morilab
