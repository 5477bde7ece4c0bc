#include "morilab/fit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <ceres/ceres.h>
#include <fmt/core.h>

#include "morilab/error.hpp"

namespace morilab {

namespace {

constexpr double amplitude_lo = 0.5;
constexpr double amplitude_hi = 1.5;

double envelope_argument(ModelClass cls, double t) noexcept {
    return (cls == ModelClass::Gauss || cls == ModelClass::GaussCos) ? t * t : t;
}

// Value and gradient with respect to (A, mu, omega, phi).
double evaluate(ModelClass cls, const double* p, double t, double* grad) noexcept {
    const double s = envelope_argument(cls, t);
    const double e = std::exp(-p[1] * s);
    if (!is_oscillatory(cls)) {
        if (grad) {
            grad[0] = e;
            grad[1] = -s * p[0] * e;
        }
        return p[0] * e;
    }
    const double arg = p[2] * t - p[3];
    const double c = std::cos(arg);
    const double sn = std::sin(arg);
    if (grad) {
        grad[0] = e * c;
        grad[1] = -s * p[0] * e * c;
        grad[2] = -t * p[0] * e * sn;
        grad[3] = p[0] * e * sn;
    }
    return p[0] * e * c;
}

class ModelResidual final : public ceres::CostFunction {
public:
    ModelResidual(ModelClass cls, const CorrelationSeries& series, std::size_t n_eq)
        : cls_(cls), series_(series), count_(n_eq + 1), params_(parameter_count(cls)) {
        set_num_residuals(static_cast<int>(count_));
        mutable_parameter_block_sizes()->push_back(static_cast<int>(params_));
    }

    bool Evaluate(double const* const* parameters, double* residuals, double** jacobians) const override {
        const double* p = parameters[0];
        double grad[4];
        double* J = jacobians ? jacobians[0] : nullptr;
        for (std::size_t n = 0; n < count_; ++n) {
            const double t = series_.time(n);
            residuals[n] = evaluate(cls_, p, t, J ? grad : nullptr) - series_.values[n];
            if (J) std::copy(grad, grad + params_, J + n * params_);
        }
        return true;
    }

private:
    ModelClass cls_;
    const CorrelationSeries& series_;
    std::size_t count_;
    std::size_t params_;
};

double reduce_phase(double phi) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

// Rate from an affine fit of log(upper envelope) against t (or t^2).
double initial_rate(const CorrelationSeries& series, ModelClass cls, std::size_t n_eq) {
    std::vector<double> env(n_eq + 1);
    double running = 0.0;
    for (std::size_t k = n_eq + 1; k-- > 0;) {
        running = std::max(running, std::abs(series.values[k]));
        env[k] = running;
    }
    const double floor = 1e-3 * env[0];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t k = 0; k <= n_eq; ++k) {
        if (!(env[k] > floor)) break;
        const double x = envelope_argument(cls, series.time(k));
        const double y = std::log(env[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    double rate = 0.0;
    if (m >= 2) {
        const double den = static_cast<double>(m) * sxx - sx * sx;
        if (den > 0.0) rate = -(static_cast<double>(m) * sxy - sx * sy) / den;
    }
    if (!(rate > 1e-4) || !std::isfinite(rate)) {
        const double horizon = envelope_argument(cls, series.time(n_eq));
        rate = horizon > 0.0 ? 1.0 / horizon : 1.0;
    }
    return rate;
}

// Frequency of the largest discrete-Fourier magnitude of C over samples 0..n_eq.
double initial_frequency(const CorrelationSeries& series, std::size_t n_eq) {
    const double horizon = series.time(n_eq);
    const double nyquist = std::numbers::pi / series.dt;
    const double step = std::numbers::pi / (4.0 * std::max(horizon, series.dt));
    const double top = std::min(nyquist, 50.0);
    double best = 0.0, best_power = -1.0;
    for (double w = 0.0; w <= top; w += step) {
        const std::complex<double> rot = std::polar(1.0, -w * series.dt);
        std::complex<double> phase = 1.0, acc = 0.0;
        for (std::size_t n = 0; n <= n_eq; ++n) {
            acc += series.values[n] * phase;
            phase *= rot;
        }
        const double power = std::norm(acc);
        if (power > best_power) {
            best_power = power;
            best = w;
        }
    }
    return best;
}

struct Attempt {
    std::array<double, 4> p{};
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

Attempt solve_from(const CorrelationSeries& series, ModelClass cls, std::size_t n_eq, std::array<double, 4> start,
                   const FitOptions& options) {
    Attempt out;
    out.p = start;
    out.p[0] = std::clamp(out.p[0], amplitude_lo, amplitude_hi);
    out.p[1] = std::max(out.p[1], 0.0);
    out.p[2] = std::max(out.p[2], 0.0);

    ceres::Problem::Options problem_options;
    problem_options.cost_function_ownership = ceres::TAKE_OWNERSHIP;
    ceres::Problem problem(problem_options);
    double* block = out.p.data();
    problem.AddResidualBlock(new ModelResidual(cls, series, n_eq), nullptr, block);
    problem.SetParameterLowerBound(block, 0, amplitude_lo);
    problem.SetParameterUpperBound(block, 0, amplitude_hi);
    problem.SetParameterLowerBound(block, 1, 0.0);
    if (is_oscillatory(cls)) problem.SetParameterLowerBound(block, 2, 0.0);

    ceres::Solver::Options so;
    so.linear_solver_type = ceres::DENSE_QR;
    so.trust_region_strategy_type = ceres::LEVENBERG_MARQUARDT;
    so.max_num_iterations = options.max_iterations;
    so.function_tolerance = 1e-15;
    so.gradient_tolerance = 1e-15;
    so.parameter_tolerance = 1e-13;
    so.num_threads = 1;
    so.logging_type = ceres::SILENT;
    so.minimizer_progress_to_stdout = false;

    ceres::Solver::Summary summary;
    ceres::Solve(so, &problem, &summary);
    out.cost = summary.final_cost;
    out.converged = summary.termination_type == ceres::CONVERGENCE;
    if (!std::isfinite(out.cost)) out.cost = std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

std::string_view model_name(ModelClass cls) noexcept {
    switch (cls) {
        case ModelClass::Exp: return "EXP";
        case ModelClass::Gauss: return "GAUSS";
        case ModelClass::ExpCos: return "EXP_COS";
        case ModelClass::GaussCos: return "GAUSS_COS";
    }
    return "EXP";
}

ModelClass parse_model_class(std::string_view name) {
    std::string up(name);
    for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up == "EXP") return ModelClass::Exp;
    if (up == "GAUSS") return ModelClass::Gauss;
    if (up == "EXP_COS") return ModelClass::ExpCos;
    if (up == "GAUSS_COS") return ModelClass::GaussCos;
    throw InvalidArgument(fmt::format("unknown model class '{}' (expected EXP, GAUSS, EXP_COS or GAUSS_COS)", name));
}

std::size_t parameter_count(ModelClass cls) noexcept { return is_oscillatory(cls) ? 4 : 2; }

bool is_oscillatory(ModelClass cls) noexcept { return cls == ModelClass::ExpCos || cls == ModelClass::GaussCos; }

double FitModel::operator()(double t) const noexcept {
    const double p[4] = {A, mu, omega, phi};
    return evaluate(cls, p, t, nullptr);
}

Equilibration detect_equilibration(const CorrelationSeries& series, const EquilibrationOptions& options) {
    if (series.values.empty()) throw InvalidArgument("detect_equilibration: empty series");
    if (!(series.dt > 0.0)) throw InvalidArgument("detect_equilibration: series needs a positive dt");
    const std::size_t last = series.size() - 1;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t n = 0; n <= last; ++n) {
        if (std::abs(series.values[n]) < options.threshold) {
            if (!in_run) {
                in_run = true;
                run_start = n;
            }
            if (static_cast<double>(n - run_start) * series.dt >= options.window - 1e-9) return {n, true};
        } else {
            in_run = false;
        }
    }
    return {last, false};
}

double epsilon(const CorrelationSeries& series, const FitModel& model, std::size_t n_eq) {
    if (n_eq == 0 || n_eq >= series.size()) {
        throw InvalidArgument(fmt::format("epsilon: N_eq = {} outside 1..{}", n_eq, series.size() - 1));
    }
    double acc = 0.0;
    for (std::size_t n = 0; n <= n_eq; ++n) {
        const double r = series.values[n] - model(series.time(n));
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n_eq));
}

double sigma(const CorrelationSeries& perturbed, const CorrelationSeries& unperturbed, std::size_t n_eq) {
    if (perturbed.dt != unperturbed.dt) throw InvalidArgument("sigma: time grids differ in dt");
    if (n_eq == 0 || n_eq >= perturbed.size() || n_eq >= unperturbed.size()) {
        throw InvalidArgument(fmt::format("sigma: N_eq = {} exceeds a series length", n_eq));
    }
    double acc = 0.0;
    for (std::size_t n = 0; n <= n_eq; ++n) {
        const double r = perturbed.values[n] - unperturbed.values[n];
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n_eq));
}

FitResult fit(const CorrelationSeries& series, ModelClass cls, std::size_t n_eq, const FitOptions& options) {
    if (n_eq + 1 < min_fit_samples || n_eq >= series.size()) {
        throw InvalidArgument(fmt::format("fit: need {} <= N_eq + 1 <= {} samples, got N_eq = {}", min_fit_samples,
                                          series.size(), n_eq));
    }
    const double a0 = std::clamp(series.values[0], amplitude_lo, amplitude_hi);
    const double mu0 = initial_rate(series, cls, n_eq);

    std::vector<std::array<double, 4>> starts;
    if (options.warm_start && options.warm_start->cls == cls) starts.push_back(options.warm_start->parameters());
    if (is_oscillatory(cls)) {
        const double w0 = initial_frequency(series, n_eq);
        for (double scale : options.mu_scales)
            for (double phase : options.phases) starts.push_back({a0, mu0 * scale, w0, phase});
    } else {
        for (double scale : options.mu_scales) starts.push_back({a0, mu0 * scale, 0.0, 0.0});
    }

    Attempt best;
    for (const auto& start : starts) {
        Attempt a = solve_from(series, cls, n_eq, start, options);
        if (a.cost < best.cost) best = a;
    }

    FitResult out;
    out.n_eq = n_eq;
    out.restarts_used = starts.size();
    out.converged = best.converged && std::isfinite(best.cost);
    out.model.cls = cls;
    out.model.A = best.p[0];
    out.model.mu = best.p[1];
    if (is_oscillatory(cls)) {
        out.model.omega = best.p[2];
        out.model.phi = reduce_phase(best.p[3]);
    }
    out.epsilon = epsilon(series, out.model, n_eq);
    return out;
}

}  // namespace morilab
