#include "morilab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/core.h>
#include <json.hpp>

#include "morilab/error.hpp"
#include "morilab/fit.hpp"
#include "morilab/io.hpp"

namespace morilab::plots {

namespace {

constexpr double width = 720, height = 450;
constexpr double left_margin = 72, right_margin = 150, top_margin = 40, bottom_margin = 56;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 6.0) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) {
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

std::string chart(const Frame& frame, const std::vector<Curve>& curves, const std::vector<Bars>& bars) {
    Range xr, yr;
    for (const auto& c : curves) {
        for (double v : c.x) xr.add(v);
        for (double v : c.y) yr.add(v);
    }
    for (const auto& b : bars) {
        for (std::size_t i = 0; i < b.left.size(); ++i) {
            xr.add(b.left[i]);
            xr.add(b.left[i] + b.width);
            yr.add(b.count[i]);
        }
        yr.add(0.0);
    }
    for (const auto& [x, _] : frame.marks) xr.add(x);
    xr.settle();
    yr.settle();
    if (frame.diagonal) {
        xr.lo = yr.lo = std::min(xr.lo, yr.lo);
        xr.hi = yr.hi = std::max(xr.hi, yr.hi);
    }
    const double pw = width - left_margin - right_margin;
    const double ph = height - top_margin - bottom_margin;
    auto px = [&](double x) { return left_margin + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top_margin + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
        width, height);
    s += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     left_margin + pw / 2, escape(frame.title));
    s += fmt::format("<defs><clipPath id=\"plot\"><rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\"/>"
                     "</clipPath></defs>\n",
                     left_margin, top_margin, pw, ph);

    for (double t : ticks(xr.lo, xr.hi)) {
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#e5e5e5\"/>\n",
                         px(t), top_margin, top_margin + ph);
        s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px(t),
                         top_margin + ph + 18, t);
    }
    for (double t : ticks(yr.lo, yr.hi)) {
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#e5e5e5\"/>\n",
                         left_margin, py(t), left_margin + pw);
        s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", left_margin - 6,
                         py(t) + 4, t);
    }
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                     "stroke=\"black\"/>\n",
                     left_margin, top_margin, pw, ph);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left_margin + pw / 2,
                     height - 14, escape(frame.x_label));
    s += fmt::format("<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}"
                     "</text>\n",
                     top_margin + ph / 2, escape(frame.y_label));

    s += "<g clip-path=\"url(#plot)\">\n";
    for (const auto& b : bars) {
        for (std::size_t i = 0; i < b.left.size(); ++i) {
            if (b.count[i] <= 0.0) continue;
            const double x0 = px(b.left[i]), x1 = px(b.left[i] + b.width);
            s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
                             "fill-opacity=\"0.55\"/>\n",
                             x0, py(b.count[i]), std::max(x1 - x0, 0.5), py(0.0) - py(b.count[i]), b.color);
        }
    }
    if (frame.diagonal) {
        s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" "
                         "stroke-dasharray=\"4 3\"/>\n",
                         px(xr.lo), py(xr.lo), px(xr.hi), py(xr.hi));
    }
    for (const auto& c : curves) {
        const std::size_t n = std::min(c.x.size(), c.y.size());
        if (c.markers) {
            for (std::size_t i = 0; i < n; ++i) {
                s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                                 px(c.x[i]), py(c.y[i]), c.color);
            }
            continue;
        }
        const std::size_t stride = std::max<std::size_t>(1, n / 800);
        std::string pts;
        for (std::size_t i = 0; i < n; i += stride) pts += fmt::format("{:.2f},{:.2f} ", px(c.x[i]), py(c.y[i]));
        if (n > 0 && (n - 1) % stride != 0) pts += fmt::format("{:.2f},{:.2f} ", px(c.x[n - 1]), py(c.y[n - 1]));
        s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", pts,
                         c.color, c.dashed ? " stroke-dasharray=\"6 4\"" : "");
    }
    for (const auto& [x, color] : frame.marks) {
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\" "
                         "stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
                         px(x), top_margin, top_margin + ph, color);
    }
    s += "</g>\n";

    double ly = top_margin + 10;
    auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
        if (label.empty()) return;
        const double lx = left_margin + pw + 12;
        s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
                         "stroke-width=\"3\"{}/>\n",
                         lx, ly, lx + 22, ly, color, dashed ? " stroke-dasharray=\"6 4\"" : "");
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", lx + 28, ly + 4, escape(label));
        ly += 18;
    };
    for (const auto& b : bars) legend(b.label, b.color, false);
    for (const auto& c : curves) legend(c.label, c.color, c.dashed);
    s += "</svg>\n";
    return s;
}

std::string family_color(const std::string& label, std::size_t index) {
    if (label == "e" || label == "edo") return "#1f5fb4";
    if (label == "g" || label == "gdo") return "#c62828";
    static const char* palette[] = {"#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"};
    return palette[index % 4];
}

std::vector<std::string> render_run(const std::filesystem::path& dir) {
    using nlohmann::ordered_json;
    const ordered_json summary = ordered_json::parse(io::read_text(dir / "summary.json"));
    std::vector<std::string> labels;
    std::map<std::string, FitModel> unperturbed_fits;
    std::map<std::string, double> means;
    for (const auto& f : summary.at("families")) {
        const auto label = f.at("label").get<std::string>();
        labels.push_back(label);
        means[label] = f.at("mean_epsilon").get<double>();
        const auto& u = f.at("unperturbed_fit");
        FitModel m;
        m.cls = parse_model_class(u.at("model").get<std::string>());
        m.A = u.at("A").get<double>();
        m.mu = u.at("mu").get<double>();
        m.omega = u.value("omega", 0.0);
        m.phi = u.value("phi", 0.0);
        unperturbed_fits[label] = m;
    }
    const std::string scenario = summary.at("scenario").get<std::string>();
    auto color = [&](const std::string& label) {
        const auto it = std::find(labels.begin(), labels.end(), label);
        return family_color(label, static_cast<std::size_t>(it - labels.begin()));
    };
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& svg) {
        io::write_text(dir / name, svg);
        written.push_back(name);
    };

    {
        std::vector<Curve> curves;
        for (const auto& label : labels) {
            const auto table = io::parse_csv(io::read_text(dir / ("chain_" + label + ".csv")));
            Curve c{label, color(label), {}, {}};
            // The head carries the design; the linear tail is visible in the first 100 entries.
            const std::size_t n = std::min<std::size_t>(table.rows.size(), 100);
            for (std::size_t i = 0; i < n; ++i) {
                c.x.push_back(io::parse_double(table.rows[i][0]));
                c.y.push_back(io::parse_double(table.rows[i][1]));
            }
            curves.push_back(std::move(c));
        }
        emit("coefficients.svg", chart({"Lanczos coefficients (" + scenario + ")", "n", "b_n", {}, false}, curves));
    }
    {
        std::vector<Curve> curves;
        for (const auto& label : labels) {
            const auto series = io::series_from_csv(io::read_text(dir / ("unperturbed_" + label + ".csv")));
            Curve c{label, color(label), {}, {}}, f{label + " fit", color(label), {}, {}, true};
            for (std::size_t n = 0; n < series.size(); ++n) {
                c.x.push_back(series.time(n));
                c.y.push_back(series.values[n]);
                f.x.push_back(series.time(n));
                f.y.push_back(unperturbed_fits[label](series.time(n)));
            }
            curves.push_back(std::move(c));
            curves.push_back(std::move(f));
        }
        emit("correlations.svg", chart({"Unperturbed dynamics and fits", "t", "C(t)", {}, false}, curves));
    }
    {
        const auto table = io::parse_csv(io::read_text(dir / "exemplars.csv"));
        const std::size_t cf = table.column("family"), ctr = table.column("trial"), ct = table.column("t"),
                          cc = table.column("C"), cfit = table.column("fit");
        for (const auto& label : labels) {
            std::vector<Curve> curves;
            std::map<std::string, std::size_t> slot;
            static const char* shades[] = {"#000000", "#555555", "#999999"};
            for (const auto& row : table.rows) {
                if (row[cf] != label) continue;
                auto [it, fresh] = slot.emplace(row[ctr], curves.size());
                if (fresh) {
                    const std::string shade = shades[(curves.size() / 2) % 3];
                    curves.push_back({fmt::format("trial {}", row[ctr]), shade, {}, {}});
                    curves.push_back({"", color(label), {}, {}, true});
                }
                const double t = io::parse_double(row[ct]);
                curves[it->second].x.push_back(t);
                curves[it->second].y.push_back(io::parse_double(row[cc]));
                curves[it->second + 1].x.push_back(t);
                curves[it->second + 1].y.push_back(io::parse_double(row[cfit]));
            }
            if (!curves.empty()) curves[1].label = "fits";
            emit("exemplars_" + label + ".svg",
                 chart({"Perturbed dynamics near the mean deviation (" + label + ")", "t", "C(t)", {}, false},
                       curves));
        }
    }
    {
        const auto table = io::parse_csv(io::read_text(dir / "histogram.csv"));
        const std::size_t cl = table.column("bin_left"), cr = table.column("bin_right"), cf = table.column("family"),
                          cn = table.column("count");
        std::vector<Bars> bars;
        Frame frame{"Histogram of epsilon", "epsilon", "count", {}, false};
        for (const auto& label : labels) {
            Bars b{label, color(label), 0.0, {}, {}};
            for (const auto& row : table.rows) {
                if (row[cf] != label) continue;
                const double l = io::parse_double(row[cl]);
                b.width = io::parse_double(row[cr]) - l;
                b.left.push_back(l);
                b.count.push_back(io::parse_double(row[cn]));
            }
            bars.push_back(std::move(b));
            frame.marks.emplace_back(means[label], color(label));
        }
        emit("histogram.svg", chart(frame, {}, bars));
    }
    {
        const auto table = io::parse_csv(io::read_text(dir / "scatter.csv"));
        const std::size_t cf = table.column("family"), cs = table.column("sigma"), ce = table.column("epsilon");
        std::vector<Curve> curves;
        for (const auto& label : labels) {
            Curve c{label, color(label), {}, {}, false, true};
            for (const auto& row : table.rows) {
                if (row[cf] != label) continue;
                c.x.push_back(io::parse_double(row[cs]));
                c.y.push_back(io::parse_double(row[ce]));
            }
            curves.push_back(std::move(c));
        }
        emit("scatter.svg", chart({"Deviation vs. alteration", "sigma", "epsilon", {}, true}, curves));
    }
    return written;
}

}  // namespace morilab::plots
