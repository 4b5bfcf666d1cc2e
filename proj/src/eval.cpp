#include "riskstrat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskstrat/errors.hpp"
#include "riskstrat/model.hpp"

namespace riskstrat {

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw InputError("DimensionMismatch", "scores and labels must be equal-length, nonempty");
    }
}

std::pair<std::size_t, std::size_t> class_counts(const std::vector<int>& labels) {
    std::size_t pos = 0;
    for (int y : labels) pos += (y == 1);
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw InputError("SingleClass", "both classes required");
    return {pos, neg};
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    const auto [n_pos, n_neg] = class_counts(labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank-sum with midranks for ties gives half-credit tie handling.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

RocCurve roc_points(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    const auto [n_pos, n_neg] = class_counts(labels);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    // The (0,0) point corresponds to a threshold above every score.
    curve.thresholds.push_back(scores[order[0]] + 1.0);

    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // one point per distinct threshold; ties advance together
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
        curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
        curve.thresholds.push_back(threshold);
    }

    double area = 0.0;
    for (std::size_t k = 1; k < curve.fpr.size(); ++k) {
        area += 0.5 * (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]);
    }
    curve.auc = area;
    return curve;
}

CalibrationCurve calibration_curve(const std::vector<double>& scores,
                                   const std::vector<int>& labels, int n_bins) {
    check_lengths(scores, labels);
    if (n_bins < 2) throw InputError("InvalidConfig", "n_bins must be >= 2");
    for (double s : scores) {
        if (s < 0.0 || s > 1.0) throw InputError("InvalidValue", "scores must lie in [0,1]");
    }

    std::vector<double> sum_pred(n_bins, 0.0);
    std::vector<std::size_t> pos(n_bins, 0), count(n_bins, 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto bin = static_cast<std::size_t>(scores[i] * n_bins);
        if (bin >= static_cast<std::size_t>(n_bins)) bin = n_bins - 1;  // score == 1.0
        sum_pred[bin] += scores[i];
        pos[bin] += (labels[i] == 1);
        ++count[bin];
    }

    CalibrationCurve curve;
    curve.n_bins = n_bins;
    for (int b = 0; b < n_bins; ++b) {
        if (count[b] == 0) continue;
        CalibrationBin bin;
        bin.mean_predicted = sum_pred[b] / static_cast<double>(count[b]);
        bin.observed_frequency = static_cast<double>(pos[b]) / static_cast<double>(count[b]);
        bin.count = count[b];
        bin.bin_index = static_cast<std::size_t>(b);
        curve.bins.push_back(bin);
    }
    return curve;
}

double brier_score(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = scores[i] - static_cast<double>(labels[i]);
        total += d * d;
    }
    return total / static_cast<double>(scores.size());
}

double Recalibrator::apply(double score) const {
    if (kind == RecalibratorKind::Platt) {
        const double clipped = std::clamp(score, 1e-6, 1.0 - 1e-6);
        return sigmoid(platt_a * logit(clipped) + platt_b);
    }
    // Isotonic: block containing the score; scores below the first
    // breakpoint take the first value.
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
    const auto idx = it == breakpoints.begin()
                         ? std::size_t{0}
                         : static_cast<std::size_t>(it - breakpoints.begin() - 1);
    return values[idx];
}

std::vector<double> Recalibrator::apply(const std::vector<double>& scores) const {
    std::vector<double> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(apply(s));
    return out;
}

Recalibrator fit_platt(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    class_counts(labels);

    std::vector<double> x;
    x.reserve(scores.size());
    for (double s : scores) x.push_back(logit(std::clamp(s, 1e-6, 1.0 - 1e-6)));
    const auto n = static_cast<double>(x.size());

    // Newton-Raphson on the 2-parameter logistic NLL with step halving.
    double a = 1.0, b = 0.0;
    auto nll = [&](double pa, double pb) {
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = pa * x[i] + pb;
            total += (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) -
                     (labels[i] == 1 ? z : 0.0);
        }
        return total / n;
    };

    double loss = nll(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double p = sigmoid(a * x[i] + b);
            const double r = p - static_cast<double>(labels[i]);
            const double w = p * (1.0 - p);
            ga += r * x[i];
            gb += r;
            haa += w * x[i] * x[i];
            hab += w * x[i];
            hbb += w;
        }
        ga /= n; gb /= n; haa /= n; hab /= n; hbb /= n;
        if (std::max(std::abs(ga), std::abs(gb)) < 1e-10) break;

        const double det = haa * hbb - hab * hab;
        double da, db;
        if (std::abs(det) > 1e-12) {
            da = (hbb * ga - hab * gb) / det;
            db = (haa * gb - hab * ga) / det;
        } else {
            da = ga;  // gradient fallback for a degenerate Hessian
            db = gb;
        }
        if (!std::isfinite(da) || !std::isfinite(db)) {
            throw ComputeError("NonFinite", "Platt update is non-finite");
        }

        double step = 1.0;
        while (step > 1e-12) {
            const double trial = nll(a - step * da, b - step * db);
            if (std::isfinite(trial) && trial <= loss) {
                a -= step * da;
                b -= step * db;
                loss = trial;
                break;
            }
            step *= 0.5;
        }
        if (step <= 1e-12) break;
    }
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ComputeError("NonFinite", "Platt parameters diverged");
    }

    Recalibrator recal;
    recal.kind = RecalibratorKind::Platt;
    recal.platt_a = a;
    recal.platt_b = b;
    return recal;
}

Recalibrator fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    class_counts(labels);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    struct Block {
        double score_start;
        double sum;
        double count;
    };

    // Pool tied scores first so equal inputs always share one fitted value,
    // then run pool-adjacent-violators on the block stack.
    std::vector<Block> blocks;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        Block block{s, 0.0, 0.0};
        while (i < order.size() && scores[order[i]] == s) {
            block.sum += static_cast<double>(labels[order[i]]);
            block.count += 1.0;
            ++i;
        }
        blocks.push_back(block);

        while (blocks.size() >= 2) {
            auto& prev = blocks[blocks.size() - 2];
            auto& last = blocks.back();
            if (prev.sum / prev.count <= last.sum / last.count) break;
            prev.sum += last.sum;
            prev.count += last.count;
            blocks.pop_back();
        }
    }

    Recalibrator recal;
    recal.kind = RecalibratorKind::Isotonic;
    for (const auto& block : blocks) {
        recal.breakpoints.push_back(block.score_start);
        recal.values.push_back(block.sum / block.count);
    }
    return recal;
}

}  // namespace riskstrat
