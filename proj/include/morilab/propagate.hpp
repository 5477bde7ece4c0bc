#pragma once

#include <cstddef>
#include <vector>

#include "morilab/chain.hpp"

namespace morilab {

enum class PropagatorMethod {
    /// Chebyshev expansion of exp(dt A) with Bessel-function weights.
    Chebyshev,
    /// Classical fixed-step Runge-Kutta of order four.
    RungeKutta4,
};

struct PropagationOptions {
    PropagatorMethod method = PropagatorMethod::Chebyshev;
    bool keep_snapshots = false;
    /// Runge-Kutta substep; 0 picks one from `rk4_target_error`.
    double rk4_substep = 0.0;
    double rk4_target_error = 1e-10;
    double norm_tolerance = 1e-9;
    /// Trailing amplitudes below this magnitude are dropped from the active window.
    double truncation = 1e-30;
    /// Flag threshold for the summed weight on the last 1% of sites.
    double boundary_tolerance = 1e-6;
};

struct PropagationResult {
    CorrelationSeries series;
    std::vector<AmplitudeState> snapshots;
    double max_norm_drift = 0.0;
    double max_boundary_weight = 0.0;
    bool boundary_flag = false;
    std::size_t chebyshev_terms = 0;
    std::size_t rk4_substeps = 0;
};

/// Integrates d/dt phi_n = b_n phi_{n-1} - b_{n+1} phi_{n+1} from phi_n(0) = delta_{n0}
/// and records C(t_n) = phi_0(t_n) for t_n = n dt, n = 0..round(t_max / dt).
///
/// Throws NumericalError when the norm drifts beyond `norm_tolerance`, or when an
/// explicit Runge-Kutta substep exceeds the stability bound 0.5 / max(b).
PropagationResult propagate(const LanczosChain& chain, double dt, double t_max,
                            const PropagationOptions& options = {});

/// Largest admissible Runge-Kutta substep for `chain`.
double rk4_stability_bound(const LanczosChain& chain) noexcept;

/// Number of output samples for a horizon, tolerant to t_max/dt rounding.
std::size_t sample_count(double dt, double t_max);

}  // namespace morilab
