#include "riskstrat/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "riskstrat/errors.hpp"
#include "riskstrat/rng.hpp"

namespace riskstrat {

std::string format_fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

namespace {

constexpr const char* kPositiveColor = "#d1495b";  // risk-increasing
constexpr const char* kNegativeColor = "#30638e";  // risk-decreasing

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
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

// Margins around the plotting area.
struct Frame {
    double left = 170.0;
    double right = 40.0;
    double top = 60.0;
    double bottom = 60.0;
    double width;
    double height;

    Frame(const FigureSpec& spec, double left_margin = 170.0)
        : left(left_margin), width(spec.width), height(spec.height) {
        if (spec.width <= 0 || spec.height <= 0) {
            throw InputError("InvalidConfig", "figure dimensions must be positive");
        }
    }

    double plot_width() const { return width - left - right; }
    double plot_height() const { return height - top - bottom; }
    double x(double unit) const { return left + unit * plot_width(); }        // unit in [0,1]
    double y(double unit) const { return top + (1.0 - unit) * plot_height(); }
};

class SvgBuilder {
public:
    SvgBuilder(const FigureSpec& spec, const std::string& default_title) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width
             << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
             << spec.height << "\">\n";
        rect(0, 0, spec.width, spec.height, "#ffffff", "none");
        const std::string title = spec.title.empty() ? default_title : spec.title;
        text(spec.width / 2.0, 28, title, 18, "middle", "#222222");
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke) {
        out_ << "  <rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
             << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
             << "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              bool dashed = false, double width = 1.0) {
        out_ << "  <line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
             << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
             << num(width) << "\"";
        if (dashed) out_ << " stroke-dasharray=\"6,4\"";
        out_ << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                  double width = 2.0) {
        out_ << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
             << num(width) << "\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i) out_ << ' ';
            out_ << num(points[i].first) << ',' << num(points[i].second);
        }
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        out_ << "  <circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
             << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& content, int size,
              const std::string& anchor = "start", const std::string& fill = "#333333",
              const std::string& extra = "") {
        out_ << "  <text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
             << "\"" << extra << ">" << escape_xml(content) << "</text>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    static std::string num(double v) { return format_fixed(v, 2); }

    std::ostringstream out_;
};

void draw_axes(SvgBuilder& svg, const Frame& frame, const FigureSpec& spec,
               const std::string& default_x, const std::string& default_y) {
    svg.line(frame.x(0), frame.y(0), frame.x(1), frame.y(0), "#444444");
    svg.line(frame.x(0), frame.y(0), frame.x(0), frame.y(1), "#444444");
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        svg.text(frame.x(t), frame.y(0) + 20, format_fixed(t, 2), 11, "middle");
        svg.text(frame.x(0) - 8, frame.y(t) + 4, format_fixed(t, 2), 11, "end");
    }
    svg.text((frame.x(0) + frame.x(1)) / 2.0, frame.height - 14,
             spec.x_label.empty() ? default_x : spec.x_label, 13, "middle");
    svg.text(18, (frame.y(0) + frame.y(1)) / 2.0,
             spec.y_label.empty() ? default_y : spec.y_label, 13, "middle", "#333333",
             " transform=\"rotate(-90 18 " + format_fixed((frame.y(0) + frame.y(1)) / 2.0, 2) +
                 ")\"");
}

}  // namespace

std::string render_waterfall(const Attribution& attribution, const FigureSpec& spec) {
    const auto steps = waterfall(attribution);
    SvgBuilder svg(spec, "Local explanation (probability units)");
    Frame frame(spec);

    // Value range covering every partial sum, padded.
    double lo = std::min(attribution.base_value, attribution.prediction);
    double hi = std::max(attribution.base_value, attribution.prediction);
    for (const auto& step : steps) {
        lo = std::min({lo, step.running_before, step.running_after});
        hi = std::max({hi, step.running_before, step.running_after});
    }
    const double pad = std::max(0.02, (hi - lo) * 0.15);
    lo -= pad;
    hi += pad;
    auto unit = [&](double v) { return (v - lo) / (hi - lo); };

    const std::size_t m = std::max<std::size_t>(steps.size(), 1);
    const double row_height = frame.plot_height() / static_cast<double>(m);
    const double bar_height = row_height * 0.55;

    svg.line(frame.x(0), frame.y(0), frame.x(1), frame.y(0), "#444444");
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        svg.text(frame.x(t), frame.y(0) + 20, format_fixed(lo + t * (hi - lo), 2), 11, "middle");
    }
    svg.text((frame.x(0) + frame.x(1)) / 2.0, frame.height - 14,
             spec.x_label.empty() ? "Predicted probability" : spec.x_label, 13, "middle");

    // Base and final markers.
    const double base_x = frame.x(unit(attribution.base_value));
    const double final_x = frame.x(unit(attribution.prediction));
    svg.line(base_x, frame.top, base_x, frame.y(0), "#888888", true);
    svg.text(base_x, frame.top - 6, "E[f(X)] = " + format_fixed(attribution.base_value, 2), 12,
             "middle", "#555555");
    svg.line(final_x, frame.top, final_x, frame.y(0), "#222222", true);
    svg.text(final_x, frame.top - 24, "f(x) = " + format_fixed(attribution.prediction, 2), 12,
             "middle", "#111111");

    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& step = steps[i];
        const double y = frame.top + row_height * static_cast<double>(i) +
                         (row_height - bar_height) / 2.0;
        const double x0 = frame.x(unit(std::min(step.running_before, step.running_after)));
        const double x1 = frame.x(unit(std::max(step.running_before, step.running_after)));
        const char* color = step.phi >= 0.0 ? kPositiveColor : kNegativeColor;
        svg.rect(x0, y, std::max(x1 - x0, 0.5), bar_height, color, "none");
        svg.text(frame.left - 10, y + bar_height / 2.0 + 4,
                 step.feature + " = " + format_fixed(step.value, 2), 12, "end");
        svg.text(x1 + 6, y + bar_height / 2.0 + 4,
                 (step.phi >= 0 ? "+" : "") + format_fixed(step.phi, 2), 11, "start", "#555555");
    }
    return svg.finish();
}

std::string render_summary(const GlobalImportance& importance, const FigureSpec& spec) {
    if (importance.phi_matrix.empty()) {
        throw InputError("EmptyCohort", "summary plot needs per-instance attributions");
    }
    SvgBuilder svg(spec, "Global feature importance");
    Frame frame(spec);

    const auto order = importance.ranking();
    const std::size_t m = order.size();
    const std::size_t n = importance.phi_matrix.size();

    double phi_abs_max = 1e-12;
    for (const auto& row : importance.phi_matrix) {
        for (double p : row) phi_abs_max = std::max(phi_abs_max, std::abs(p));
    }
    auto unit = [&](double phi) { return 0.5 + 0.5 * phi / (phi_abs_max * 1.1); };

    // Per-feature value range for the blue-to-red color map.
    std::vector<double> value_lo(m, 0.0), value_hi(m, 0.0);
    for (std::size_t f = 0; f < m; ++f) {
        double lo = importance.value_matrix[0][f], hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, importance.value_matrix[i][f]);
            hi = std::max(hi, importance.value_matrix[i][f]);
        }
        value_lo[f] = lo;
        value_hi[f] = hi;
    }
    auto color_for = [&](std::size_t f, double value) {
        const double range = value_hi[f] - value_lo[f];
        const double t = range > 0.0 ? (value - value_lo[f]) / range : 0.5;
        const int r = static_cast<int>(std::lround(48.0 + t * (209.0 - 48.0)));
        const int g = static_cast<int>(std::lround(99.0 + t * (73.0 - 99.0)));
        const int b = static_cast<int>(std::lround(142.0 + t * (91.0 - 142.0)));
        char buffer[8];
        std::snprintf(buffer, sizeof buffer, "#%02x%02x%02x", r, g, b);
        return std::string(buffer);
    };

    const double row_height = frame.plot_height() / static_cast<double>(m);
    const double zero_x = frame.x(unit(0.0));
    svg.line(zero_x, frame.top, zero_x, frame.y(0), "#888888", true);
    svg.line(frame.x(0), frame.y(0), frame.x(1), frame.y(0), "#444444");
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        const double phi = (t - 0.5) * 2.0 * phi_abs_max * 1.1;
        svg.text(frame.x(t), frame.y(0) + 20, format_fixed(phi, 2), 11, "middle");
    }
    svg.text((frame.x(0) + frame.x(1)) / 2.0, frame.height - 14,
             spec.x_label.empty() ? "Shapley value (impact on prediction)" : spec.x_label, 13,
             "middle");

    Rng jitter(42);  // fixed seed keeps rendering deterministic
    for (std::size_t rank = 0; rank < m; ++rank) {
        const std::size_t f = order[rank];
        const double center = frame.top + row_height * (static_cast<double>(rank) + 0.5);
        svg.text(frame.left - 10, center + 4, importance.feature_names[f], 12, "end");
        for (std::size_t i = 0; i < n; ++i) {
            const double jitter_y = (jitter.uniform() - 0.5) * row_height * 0.6;
            svg.circle(frame.x(unit(importance.phi_matrix[i][f])), center + jitter_y, 2.2,
                       color_for(f, importance.value_matrix[i][f]));
        }
    }
    return svg.finish();
}

std::string render_roc(const RocCurve& curve, const FigureSpec& spec) {
    SvgBuilder svg(spec, "ROC curve");
    Frame frame(spec, 80.0);
    draw_axes(svg, frame, spec, "False positive rate", "True positive rate");

    svg.line(frame.x(0), frame.y(0), frame.x(1), frame.y(1), "#999999", true);

    std::vector<std::pair<double, double>> points;
    points.reserve(curve.fpr.size());
    for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
        points.emplace_back(frame.x(curve.fpr[i]), frame.y(curve.tpr[i]));
    }
    svg.polyline(points, kNegativeColor);
    svg.text(frame.x(0.62), frame.y(0.08), "AUC = " + format_fixed(curve.auc, 2), 15, "start",
             "#222222");
    return svg.finish();
}

std::string render_calibration(const CalibrationCurve& curve, const FigureSpec& spec) {
    SvgBuilder svg(spec, "Reliability diagram");
    Frame frame(spec, 80.0);
    draw_axes(svg, frame, spec, "Mean predicted probability", "Observed frequency");

    svg.line(frame.x(0), frame.y(0), frame.x(1), frame.y(1), "#999999", true);

    std::vector<std::pair<double, double>> points;
    for (const auto& bin : curve.bins) {
        points.emplace_back(frame.x(bin.mean_predicted), frame.y(bin.observed_frequency));
    }
    svg.polyline(points, kPositiveColor);
    for (std::size_t i = 0; i < curve.bins.size(); ++i) {
        svg.circle(points[i].first, points[i].second, 4, kPositiveColor);
        svg.text(points[i].first, points[i].second - 10, "n=" + std::to_string(curve.bins[i].count),
                 10, "middle", "#777777");
    }
    return svg.finish();
}

}  // namespace riskstrat
