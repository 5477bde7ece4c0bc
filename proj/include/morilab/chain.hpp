#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace morilab {

/// Hopping amplitudes b_1..b_{d-1} of a finite Mori chain with d sites.
///
/// Index convention: `b(n)` for n = 1..d-1 couples sites n-1 and n. The
/// constructor enforces b_n > 0 for every entry.
class LanczosChain {
public:
    LanczosChain() = default;
    explicit LanczosChain(std::vector<double> b, std::string label = {});

    /// Number of sites (Liouville-space dimension).
    std::size_t dimension() const noexcept { return b_.size() + 1; }
    /// b_n with 1-based n.
    double b(std::size_t n) const { return b_.at(n - 1); }
    std::span<const double> coefficients() const noexcept { return b_; }
    const std::string& label() const noexcept { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    double max_coefficient() const noexcept;

    friend bool operator==(const LanczosChain&, const LanczosChain&) = default;

private:
    std::vector<double> b_;
    std::string label_;
};

/// Site amplitudes phi_n(t), n = 0..d-1.
struct AmplitudeState {
    std::vector<double> phi;
    double t = 0.0;

    double norm_squared() const noexcept;
};

/// C(t_n) on the uniform grid t_n = n * dt.
struct CorrelationSeries {
    double dt = 0.0;
    std::vector<double> values;
    bool normalized = true;

    std::size_t size() const noexcept { return values.size(); }
    double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt; }
};

struct SpectralFunction {
    std::vector<double> omega;
    std::vector<double> values;
    double eta = 0.0;
};

/// Symmetric tridiagonal matrix with zero diagonal and off-diagonals b_n.
Eigen::MatrixXd dense_generator(const LanczosChain& chain);

/// Sum of b_n^2; equals Tr[L^2]/2 for the tridiagonal representation.
double spectral_width_sum(const LanczosChain& chain) noexcept;

/// Evaluates the finite continued fraction
///   Phi(omega) = 2 Re 1 / (z + b_1^2 / (z + b_2^2 / (... + b_{d-1}^2 / z)))
/// with z = eta + i omega, by backward recursion. eta must be positive.
SpectralFunction spectral_function(const LanczosChain& chain, std::span<const double> omega_grid,
                                   double eta);

/// 4 pi / (d * dt): a broadening comparable to the level spacing resolved on a grid of step dt.
double default_broadening(std::size_t d, double dt) noexcept;

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

}  // namespace morilab
