#pragma once

// Recovering Lanczos coefficients from a correlation function: the Lanczos
// recursion run on spectral functions (inner product = integral over omega,
// Liouvillian = multiplication by -omega), plus a dense-matrix
// tridiagonalization used as an oracle for the recursion itself.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "morilab/chain.hpp"

namespace morilab {

/// Closed-form even correlation function
///   C(t) = exp(-gauss_rate t^2) exp(-exp_rate |t|) prod_j cos(cos_freqs[j] t).
struct CorrelationForm {
    double gauss_rate = 0.0;
    double exp_rate = 0.0;
    std::vector<double> cos_freqs;

    double operator()(double t) const noexcept;
    bool decays() const noexcept { return gauss_rate > 0.0 || exp_rate > 0.0; }
};

/// Parses products of exp(a t), exp(a t^2) and cos(b t) with decimal or
/// rational literals, e.g. "exp(-t^2/8)*cos(2t)" or "exp(-0.24 t)".
CorrelationForm parse_correlation_form(const std::string& text);

enum class SpectrumSource { Analytic, Sampled };

struct QuadratureOptions {
    double points_per_unit = 40.0;
    /// Half-width W is the first grid point beyond which Phi < tail_floor * max Phi.
    double tail_floor = 1e-250;
    double max_half_width = 400.0;
};

/// Phi(omega) >= 0 on a uniform symmetric grid, normalized so that
/// (1/2pi) * integral Phi = C(0) = 1.
struct SpectralDensityInput {
    std::vector<double> omega;
    std::vector<double> values;
    double step = 0.0;
    SpectrumSource source = SpectrumSource::Analytic;
    bool decaying = true;
    std::vector<std::string> warnings;

    double half_width() const noexcept { return omega.empty() ? 0.0 : omega.back(); }
};

SpectralDensityInput fourier_of_correlation(const CorrelationForm& form, const QuadratureOptions& q = {});

/// Cosine transform Phi(omega) = 2 * integral_0^T C(t) cos(omega t) dt of an even,
/// sampled C. Non-decaying input is tapered and flagged.
SpectralDensityInput fourier_of_correlation(const CorrelationSeries& series, const QuadratureOptions& q = {});

enum class LanczosStop { Requested, SmallCoefficient, LostOrthogonality };

struct ReverseResult {
    std::vector<double> b;
    std::size_t achieved = 0;
    LanczosStop reason = LanczosStop::Requested;
    /// Largest |(f_n | omega f_n)|; zero for a symmetric spectrum.
    double max_diagonal = 0.0;
    /// Largest overlap of a new basis function with the previous ones.
    double max_overlap = 0.0;
    double normalization_drift = 0.0;
};

struct ReverseOptions {
    double min_b_squared = 1e-20;
    double max_overlap = 1e-6;
    double normalization_tolerance = 1e-6;
};

/// Lanczos recursion on the seed sqrt(Phi) with full reorthogonalization.
/// Stops early (and reports why) on a vanishing coefficient or lost orthogonality;
/// throws NumericalError when the quadrature does not reproduce C(0) = 1.
ReverseResult lanczos_from_spectrum(const SpectralDensityInput& spectrum, std::size_t n_max,
                                    const ReverseOptions& options = {});

struct TridiagonalizationResult {
    std::vector<double> b;
    /// Index n of the first b_n found to vanish, if the recursion broke down.
    std::optional<std::size_t> breakdown;
};

/// Lanczos on a dense symmetric matrix from a normalized seed, with full
/// reorthogonalization. Only the off-diagonal coefficients are returned.
TridiagonalizationResult tridiagonalize_dense(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& seed,
                                              double breakdown_tolerance = 1e-10);

}  // namespace morilab
