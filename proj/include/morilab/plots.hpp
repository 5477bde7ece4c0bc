#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace morilab::plots {

struct Curve {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    /// Draw points instead of a polyline.
    bool markers = false;
};

struct Bars {
    std::string label;
    std::string color;
    double width = 0.0;
    std::vector<double> left;
    std::vector<double> count;
};

struct Frame {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Vertical dashed reference lines (x, color).
    std::vector<std::pair<double, std::string>> marks;
    bool diagonal = false;
};

/// Standalone SVG; output depends only on the arguments.
std::string chart(const Frame& frame, const std::vector<Curve>& curves, const std::vector<Bars>& bars = {});

/// Stable color per chain family: exponential classes blue, Gaussian classes red.
std::string family_color(const std::string& label, std::size_t index);

/// Re-renders every figure of a run directory from its CSV and JSON outputs.
/// Returns the written file names.
std::vector<std::string> render_run(const std::filesystem::path& dir);

}  // namespace morilab::plots
