#include "morilab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/core.h>

#include "morilab/error.hpp"

namespace morilab {

LanczosChain::LanczosChain(std::vector<double> b, std::string label)
    : b_(std::move(b)), label_(std::move(label)) {
    for (std::size_t i = 0; i < b_.size(); ++i) {
        if (!(b_[i] > 0.0) || !std::isfinite(b_[i])) {
            throw InvalidArgument(fmt::format("Lanczos coefficient b_{} = {} is not positive", i + 1, b_[i]));
        }
    }
}

double LanczosChain::max_coefficient() const noexcept {
    return b_.empty() ? 0.0 : *std::max_element(b_.begin(), b_.end());
}

double AmplitudeState::norm_squared() const noexcept {
    double s = 0.0;
    for (double p : phi) s += p * p;
    return s;
}

Eigen::MatrixXd dense_generator(const LanczosChain& chain) {
    const auto d = static_cast<Eigen::Index>(chain.dimension());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
    const auto b = chain.coefficients();
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        L(n, n + 1) = b[static_cast<std::size_t>(n)];
        L(n + 1, n) = b[static_cast<std::size_t>(n)];
    }
    return L;
}

double spectral_width_sum(const LanczosChain& chain) noexcept {
    double s = 0.0;
    for (double b : chain.coefficients()) s += b * b;
    return s;
}

SpectralFunction spectral_function(const LanczosChain& chain, std::span<const double> omega_grid,
                                   double eta) {
    if (!(eta > 0.0)) {
        throw InvalidArgument("spectral_function: broadening eta must be positive on a finite chain");
    }
    SpectralFunction out;
    out.eta = eta;
    out.omega.assign(omega_grid.begin(), omega_grid.end());
    out.values.resize(omega_grid.size());
    const auto b = chain.coefficients();
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        const std::complex<double> z(eta, omega_grid[i]);
        std::complex<double> tail = z;
        for (std::size_t n = b.size(); n > 0; --n) tail = z + b[n - 1] * b[n - 1] / tail;
        out.values[i] = 2.0 * (1.0 / tail).real();
    }
    return out;
}

double default_broadening(std::size_t d, double dt) noexcept {
    return 4.0 * std::numbers::pi / (static_cast<double>(d) * dt);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw InvalidArgument("uniform_grid needs at least two points");
    std::vector<double> g(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + h * static_cast<double>(i);
    return g;
}

}  // namespace morilab
