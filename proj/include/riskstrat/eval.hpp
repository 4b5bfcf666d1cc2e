#pragma once

#include <cstddef>
#include <vector>

namespace riskstrat {

// Mann-Whitney AUC with half-credit for ties, via rank sums.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct RocCurve {
    std::vector<double> fpr;
    std::vector<double> tpr;
    std::vector<double> thresholds;  // thresholds[0] sits above every score
    double auc = 0.0;                // trapezoidal area of the stored points
};

// One point per distinct threshold, descending; prefixed with (0,0).
RocCurve roc_points(const std::vector<double>& scores, const std::vector<int>& labels);

struct CalibrationBin {
    double mean_predicted = 0.0;
    double observed_frequency = 0.0;
    std::size_t count = 0;
    std::size_t bin_index = 0;  // which equal-width interval this bin covers
};

struct CalibrationCurve {
    std::vector<CalibrationBin> bins;  // empty bins omitted
    int n_bins = 10;
};

// Equal-width bins over [0,1]; last bin right-closed.
CalibrationCurve calibration_curve(const std::vector<double>& scores,
                                   const std::vector<int>& labels, int n_bins = 10);

double brier_score(const std::vector<double>& scores, const std::vector<int>& labels);

enum class RecalibratorKind { Platt, Isotonic };

struct Recalibrator {
    RecalibratorKind kind = RecalibratorKind::Platt;
    // Platt: s -> sigmoid(a * logit(s) + b)
    double platt_a = 1.0;
    double platt_b = 0.0;
    // Isotonic: right-open step function; block i covers
    // [breakpoints[i], breakpoints[i+1]).
    std::vector<double> breakpoints;  // ascending block start scores
    std::vector<double> values;       // nondecreasing fitted values

    double apply(double score) const;
    std::vector<double> apply(const std::vector<double>& scores) const;
};

// Maximum-likelihood sigmoid fit on logit-transformed, clipped scores.
Recalibrator fit_platt(const std::vector<double>& scores, const std::vector<int>& labels);

// Pool-adjacent-violators over (score, label) sorted by score, ties pooled
// first.
Recalibrator fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace riskstrat
