#include "morilab/reverse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "morilab/error.hpp"
#include "morilab/propagate.hpp"

namespace morilab {

double CorrelationForm::operator()(double t) const noexcept {
    const double at = std::abs(t);
    double c = std::exp(-gauss_rate * t * t - exp_rate * at);
    for (double f : cos_freqs) c *= std::cos(f * t);
    return c;
}

// ---------------------------------------------------------------------------
// Target expression parser

namespace {

struct Token {
    enum Kind { Number, Ident, Symbol, End } kind;
    double number = 0.0;
    std::string text;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const double v = std::stod(s.substr(i), &used);
            out.push_back({Token::Number, v, s.substr(i, used)});
            i += used;
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Token::Ident, 0.0, s.substr(i, j - i)});
            i = j;
        } else if (std::string_view("+-*/^()").find(c) != std::string_view::npos) {
            out.push_back({Token::Symbol, 0.0, std::string(1, c)});
            ++i;
        } else {
            throw InvalidArgument(fmt::format("unexpected character '{}' in correlation expression", c));
        }
    }
    out.push_back({Token::End, 0.0, {}});
    return out;
}

class FormParser {
public:
    explicit FormParser(const std::string& text) : text_(text), tokens_(tokenize(text)) {}

    CorrelationForm parse() {
        CorrelationForm form;
        factor(form);
        while (peek_symbol("*")) {
            ++pos_;
            factor(form);
        }
        if (tokens_[pos_].kind != Token::End) fail("trailing input");
        return form;
    }

private:
    struct Monomial {
        double coef;
        int power;
    };

    bool peek_symbol(const char* s) const {
        return tokens_[pos_].kind == Token::Symbol && tokens_[pos_].text == s;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidArgument(fmt::format("cannot parse correlation expression \"{}\": {}", text_, why));
    }

    void expect(const char* s) {
        if (!peek_symbol(s)) fail(fmt::format("expected '{}'", s));
        ++pos_;
    }

    void factor(CorrelationForm& form) {
        const Token& tok = tokens_[pos_];
        if (tok.kind != Token::Ident) fail("expected exp(...) or cos(...)");
        const std::string name = tok.text;
        ++pos_;
        expect("(");
        const Monomial m = monomial();
        expect(")");
        if (name == "exp") {
            if (m.coef > 0.0) fail("growing exponentials are not correlation functions");
            if (m.power == 1) {
                form.exp_rate -= m.coef;
            } else if (m.power == 2) {
                form.gauss_rate -= m.coef;
            } else {
                fail("exp() argument must be linear or quadratic in t");
            }
        } else if (name == "cos") {
            if (m.power != 1) fail("cos() argument must be linear in t");
            form.cos_freqs.push_back(std::abs(m.coef));
        } else {
            fail(fmt::format("unknown function '{}'", name));
        }
    }

    // [sign] [number] [*] t [^ number] [/ number] [* number] ...
    Monomial monomial() {
        double coef = 1.0;
        int power = 0;
        bool divide = false;
        for (;;) {
            const Token& tok = tokens_[pos_];
            if (tok.kind == Token::Symbol && tok.text == "-") {
                coef = -coef;
            } else if (tok.kind == Token::Symbol && (tok.text == "+" || tok.text == "*")) {
            } else if (tok.kind == Token::Symbol && tok.text == "/") {
                divide = true;
            } else if (tok.kind == Token::Number) {
                if (divide) {
                    if (tok.number == 0.0) fail("division by zero");
                    coef /= tok.number;
                } else {
                    coef *= tok.number;
                }
                divide = false;
            } else if (tok.kind == Token::Ident && tok.text == "t") {
                if (divide) fail("division by t");
                ++power;
            } else if (tok.kind == Token::Symbol && tok.text == "^") {
                ++pos_;
                if (tokens_[pos_].kind != Token::Number || power == 0) fail("exponent must follow t");
                power += static_cast<int>(tokens_[pos_].number) - 1;
            } else {
                break;
            }
            ++pos_;
        }
        if (power == 0) fail("argument does not depend on t");
        return {coef, power};
    }

    std::string text_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// Trapezoid weights on a uniform grid.
std::vector<double> trapezoid_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    if (n > 0) {
        w.front() = 0.5 * h;
        w.back() = 0.5 * h;
    }
    return w;
}

SpectralDensityInput make_grid(double half_width, double h) {
    SpectralDensityInput s;
    const auto m = static_cast<long>(std::ceil(half_width / h));
    s.step = h;
    s.omega.resize(static_cast<std::size_t>(2 * m + 1));
    for (long i = -m; i <= m; ++i) s.omega[static_cast<std::size_t>(i + m)] = static_cast<double>(i) * h;
    return s;
}

void clip_negative(SpectralDensityInput& s) {
    const double peak = *std::max_element(s.values.begin(), s.values.end());
    std::size_t clipped = 0;
    for (double& v : s.values) {
        if (v >= 0.0) continue;
        if (v < -1e-6 * peak) {
            throw NumericalError(fmt::format(
                "spectral function has gross negative values ({:.3e} relative to the peak); "
                "sample C(t) on a longer or finer grid",
                v / peak));
        }
        if (v < -1e-10) ++clipped;
        v = 0.0;
    }
    if (clipped > 0) {
        s.warnings.push_back(fmt::format("clipped {} small negative spectral values to zero", clipped));
    }
}

}  // namespace

CorrelationForm parse_correlation_form(const std::string& text) { return FormParser(text).parse(); }

// ---------------------------------------------------------------------------
// Fourier transforms

SpectralDensityInput fourier_of_correlation(const CorrelationForm& form, const QuadratureOptions& q) {
    const bool gauss = form.gauss_rate > 0.0;
    const bool lorentz = form.exp_rate > 0.0;
    if (gauss == lorentz) {
        // Voigt profiles and non-decaying forms go through the sampled transform.
        const double rate = std::max(form.gauss_rate > 0.0 ? std::sqrt(form.gauss_rate) : 0.0, form.exp_rate);
        const double horizon = rate > 0.0 ? 40.0 / rate : 50.0;
        CorrelationSeries series;
        series.dt = std::min(0.01, horizon / 4000.0);
        const std::size_t n = sample_count(series.dt, horizon);
        series.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) series.values[i] = form(series.time(i));
        auto s = fourier_of_correlation(series, q);
        return s;
    }

    const double shift = [&] {
        double total = 0.0;
        for (double f : form.cos_freqs) total += f;
        return total;
    }();
    const double log_floor = -std::log(q.tail_floor);
    double width = gauss ? std::sqrt(4.0 * form.gauss_rate * log_floor) : form.exp_rate / std::sqrt(q.tail_floor);
    width = std::min(shift + width, q.max_half_width);

    auto base = [&](double w) {
        return gauss ? std::sqrt(std::numbers::pi / form.gauss_rate) * std::exp(-w * w / (4.0 * form.gauss_rate))
                     : 2.0 * form.exp_rate / (form.exp_rate * form.exp_rate + w * w);
    };

    SpectralDensityInput s = make_grid(width, 1.0 / q.points_per_unit);
    s.source = SpectrumSource::Analytic;
    s.values.assign(s.omega.size(), 0.0);
    const std::size_t m = form.cos_freqs.size();
    const double share = std::ldexp(1.0, -static_cast<int>(m));
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        double offset = 0.0;
        for (std::size_t j = 0; j < m; ++j) offset += ((mask >> j) & 1u) ? form.cos_freqs[j] : -form.cos_freqs[j];
        for (std::size_t i = 0; i < s.omega.size(); ++i) s.values[i] += share * base(s.omega[i] - offset);
    }
    return s;
}

SpectralDensityInput fourier_of_correlation(const CorrelationSeries& series, const QuadratureOptions& q) {
    if (series.size() < 2) throw InvalidArgument("fourier_of_correlation needs at least two samples");
    const double dt = series.dt;
    const std::size_t n = series.size();
    const double horizon = dt * static_cast<double>(n - 1);

    std::vector<double> c(series.values);
    const double c0 = c.front();
    if (c0 != 0.0 && std::abs(c0 - 1.0) > 1e-12) {
        for (double& v : c) v /= c0;
    }

    bool decaying = true;
    const std::size_t tail_begin = n - std::max<std::size_t>(1, n / 20);
    for (std::size_t i = tail_begin; i < n; ++i) decaying = decaying && std::abs(c[i]) < 1e-3;
    std::vector<std::string> warnings;
    if (!decaying) {
        warnings.push_back("correlation does not decay within the sampled window; applied a Gaussian taper");
        for (std::size_t i = 0; i < n; ++i) {
            const double u = 5.0 * static_cast<double>(i) / static_cast<double>(n - 1);
            c[i] *= std::exp(-u * u);
        }
    }

    const auto w = trapezoid_weights(n, dt);
    auto transform = [&](double om) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * c[i] * std::cos(om * series.time(i));
        return 2.0 * acc;
    };

    const double h = 1.0 / q.points_per_unit;
    const double nyquist = std::numbers::pi / dt;
    const double limit = std::min(q.max_half_width, 0.5 * nyquist);
    const double floor = std::max(q.tail_floor, 1e-13);
    std::vector<double> positive;
    double peak = 0.0;
    std::size_t quiet = 0;
    const auto quiet_needed = static_cast<std::size_t>(q.points_per_unit);
    for (std::size_t i = 0;; ++i) {
        const double om = static_cast<double>(i) * h;
        if (om > limit) break;
        const double v = transform(om);
        positive.push_back(v);
        peak = std::max(peak, v);
        quiet = std::abs(v) < floor * peak ? quiet + 1 : 0;
        if (quiet >= quiet_needed && om > 2.0 / horizon) break;
    }

    const std::size_t m = positive.size() - 1;
    SpectralDensityInput s = make_grid(static_cast<double>(m) * h, h);
    s.source = SpectrumSource::Sampled;
    s.decaying = decaying;
    s.warnings = std::move(warnings);
    s.values.resize(s.omega.size());
    for (std::size_t i = 0; i <= m; ++i) {
        s.values[m + i] = positive[i];
        s.values[m - i] = positive[i];
    }
    clip_negative(s);
    return s;
}

// ---------------------------------------------------------------------------
// Function-space Lanczos

ReverseResult lanczos_from_spectrum(const SpectralDensityInput& spectrum, std::size_t n_max,
                                    const ReverseOptions& options) {
    if (n_max < 1) throw InvalidArgument("lanczos_from_spectrum: n_max must be at least 1");
    const std::size_t m = spectrum.omega.size();
    if (m < 3 || spectrum.values.size() != m) throw InvalidArgument("spectral density grid is malformed");
    for (double v : spectrum.values) {
        if (v < 0.0) throw InvalidArgument("spectral density must be non-negative");
    }

    const auto w = trapezoid_weights(m, spectrum.step);
    double mass = 0.0;
    double coarse = 0.0;
    for (std::size_t i = 0; i < m; ++i) mass += w[i] * spectrum.values[i];
    // Same integral with every other node, to detect an under-resolved grid.
    {
        const std::size_t half = (m - 1) / 2;
        const auto w2 = trapezoid_weights(half + 1, 2.0 * spectrum.step);
        for (std::size_t i = 0; i <= half; ++i) coarse += w2[i] * spectrum.values[2 * i];
    }
    ReverseResult out;
    out.normalization_drift = std::abs(mass / (2.0 * std::numbers::pi) - 1.0);
    if (out.normalization_drift > options.normalization_tolerance) {
        throw NumericalError(fmt::format(
            "quadrature does not reproduce C(0) = 1 (drift {:.3e}); widen the half-width or refine the grid",
            out.normalization_drift));
    }
    if (std::abs(coarse - mass) > options.normalization_tolerance * mass) {
        throw NumericalError(fmt::format(
            "quadrature is under-resolved (halving the grid changes the norm by {:.3e}); refine the grid",
            std::abs(coarse - mass) / mass));
    }

    // Work with sqrt(weight) * f so that inner products become dot products.
    Eigen::VectorXd omega(static_cast<Eigen::Index>(m));
    Eigen::VectorXd seed(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        omega[static_cast<Eigen::Index>(i)] = spectrum.omega[i];
        seed[static_cast<Eigen::Index>(i)] = std::sqrt(w[i] * spectrum.values[i]);
    }
    const std::size_t cols = std::min(n_max + 1, m);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cols));
    basis.col(0) = seed / seed.norm();

    double b_prev = 0.0;
    for (std::size_t n = 1; n < cols; ++n) {
        const auto k = static_cast<Eigen::Index>(n);
        Eigen::VectorXd q = -omega.cwiseProduct(basis.col(k - 1));
        out.max_diagonal = std::max(out.max_diagonal, std::abs(basis.col(k - 1).dot(q)));
        if (n >= 2) q -= b_prev * basis.col(k - 2);
        for (int pass = 0; pass < 2; ++pass) {
            const auto prev = basis.leftCols(k);
            q -= prev * (prev.transpose() * q);
        }
        const double bn = q.norm();
        if (bn * bn < options.min_b_squared) {
            out.reason = LanczosStop::SmallCoefficient;
            break;
        }
        q /= bn;
        const double overlap = (basis.leftCols(k).transpose() * q).cwiseAbs().maxCoeff();
        if (overlap > options.max_overlap) {
            out.reason = LanczosStop::LostOrthogonality;
            break;
        }
        out.max_overlap = std::max(out.max_overlap, overlap);
        basis.col(k) = q;
        out.b.push_back(bn);
        b_prev = bn;
    }
    out.achieved = out.b.size();
    return out;
}

TridiagonalizationResult tridiagonalize_dense(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& seed,
                                              double breakdown_tolerance) {
    const Eigen::Index d = matrix.rows();
    if (matrix.cols() != d || seed.size() != d) throw InvalidArgument("tridiagonalize_dense: size mismatch");
    if (!matrix.isApprox(matrix.transpose(), 1e-12)) throw InvalidArgument("tridiagonalize_dense: matrix must be symmetric");
    if (std::abs(seed.norm() - 1.0) > 1e-12) throw InvalidArgument("tridiagonalize_dense: seed must be normalized");

    TridiagonalizationResult out;
    Eigen::MatrixXd basis(d, d);
    basis.col(0) = seed;
    for (Eigen::Index n = 1; n < d; ++n) {
        Eigen::VectorXd q = matrix * basis.col(n - 1);
        const double alpha = basis.col(n - 1).dot(q);
        q -= alpha * basis.col(n - 1);
        if (n >= 2) q -= out.b.back() * basis.col(n - 2);
        for (int pass = 0; pass < 2; ++pass) {
            const auto prev = basis.leftCols(n);
            q -= prev * (prev.transpose() * q);
        }
        const double bn = q.norm();
        if (bn < breakdown_tolerance) {
            out.breakdown = static_cast<std::size_t>(n);
            break;
        }
        basis.col(n) = q / bn;
        out.b.push_back(bn);
    }
    return out;
}

}  // namespace morilab
