#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morilab/chain.hpp"

namespace morilab {

enum class ModelClass { Exp, Gauss, ExpCos, GaussCos };

std::string_view model_name(ModelClass cls) noexcept;
/// Accepts EXP, GAUSS, EXP_COS, GAUSS_COS (case-insensitive).
ModelClass parse_model_class(std::string_view name);
std::size_t parameter_count(ModelClass cls) noexcept;
bool is_oscillatory(ModelClass cls) noexcept;

/// A e^{-mu t} or A e^{-mu t^2}, optionally times cos(omega t - phi).
struct FitModel {
    ModelClass cls = ModelClass::Exp;
    double A = 1.0;
    double mu = 0.0;
    double omega = 0.0;
    double phi = 0.0;

    double operator()(double t) const noexcept;
    std::array<double, 4> parameters() const noexcept { return {A, mu, omega, phi}; }
};

struct EquilibrationOptions {
    double threshold = 0.01;
    /// Time span over which |C| must stay below the threshold.
    double window = 5.0;
};

struct Equilibration {
    std::size_t n_eq = 0;
    bool equilibrated = false;
};

/// First index closing an uninterrupted window of |C| < threshold; the final index
/// (flagged) when the series never settles.
Equilibration detect_equilibration(const CorrelationSeries& series, const EquilibrationOptions& options = {});

/// sqrt((1/N_eq) sum_{n=0}^{N_eq} (C_n - f(t_n))^2).
double epsilon(const CorrelationSeries& series, const FitModel& model, std::size_t n_eq);

/// Same norm applied to C~ - C. Grids must match.
double sigma(const CorrelationSeries& perturbed, const CorrelationSeries& unperturbed, std::size_t n_eq);

inline constexpr std::size_t min_fit_samples = 8;

struct FitOptions {
    int max_iterations = 200;
    std::vector<double> mu_scales{0.3, 1.0, 3.0};
    std::vector<double> phases{0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469};
    /// Extra starting point, e.g. the fit of the unperturbed curve.
    std::optional<FitModel> warm_start;
};

struct FitResult {
    FitModel model;
    double epsilon = 0.0;
    std::size_t n_eq = 0;
    bool converged = false;
    std::size_t restarts_used = 0;
};

/// Bounded Levenberg-Marquardt least squares (A in [0.5, 1.5], mu >= 0, omega >= 0)
/// over samples 0..n_eq, multi-started; returns the restart with the smallest objective.
FitResult fit(const CorrelationSeries& series, ModelClass cls, std::size_t n_eq, const FitOptions& options = {});

}  // namespace morilab
