#pragma once

#include <string>

#include "riskstrat/eval.hpp"
#include "riskstrat/explain.hpp"

namespace riskstrat {

struct FigureSpec {
    int width = 900;
    int height = 600;
    std::string title;
    std::string x_label;
    std::string y_label;
};

// All renderers emit self-contained SVG 1.1 documents and are deterministic:
// identical inputs give byte-identical output.

// Local explanation: horizontal bars by descending |phi|, base and final
// markers labeled E[f(X)] and f(x). Probability units.
std::string render_waterfall(const Attribution& attribution, const FigureSpec& spec);

// Global explanation: one row per feature by descending mean |phi|, one dot
// per instance at x = phi, colored blue (low value) to red (high value),
// seeded vertical jitter.
std::string render_summary(const GlobalImportance& importance, const FigureSpec& spec);

// ROC polyline with dashed chance diagonal and AUC annotated to 2 decimals.
std::string render_roc(const RocCurve& curve, const FigureSpec& spec);

// Reliability diagram with dashed perfect-calibration diagonal and per-bin
// counts annotated.
std::string render_calibration(const CalibrationCurve& curve, const FigureSpec& spec);

// Round-half-to-even fixed-point formatting used for all numeric labels.
std::string format_fixed(double value, int decimals);

}  // namespace riskstrat
