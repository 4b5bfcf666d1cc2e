#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "riskstrat/data.hpp"
#include "riskstrat/model.hpp"

namespace riskstrat {

// A model under explanation is any function from a raw record to a real
// output; the trained classifier and the test stubs both fit.
using ModelFn = std::function<double(const RawRecord&)>;

// Wrap a trained classifier as a ModelFn over raw records.
ModelFn raw_predictor(const RiskModel& model);

struct BackgroundSet {
    std::vector<RawRecord> rows;
};

// Up to `size` rows sampled without replacement from a fully observed cohort.
BackgroundSet sample_background(const Cohort& cohort, std::size_t size, std::uint64_t seed);

struct Attribution {
    std::vector<std::string> feature_names;  // schema-level, one per feature
    std::vector<double> phi;
    double base_value = 0.0;  // mean model output over the background set
    double prediction = 0.0;
    RawRecord target;
};

// Interventional value v(S): mean over background rows of the model applied
// to (target on S, background elsewhere). `coalition` is a bitmask over
// schema features; categorical features move as whole units.
double coalition_value(const ModelFn& model, const RawRecord& target,
                       const BackgroundSet& background, std::uint32_t coalition);

// Exact Shapley values by full coalition enumeration (feature count <= 20).
Attribution exact_shap(const ModelFn& model, const std::vector<std::string>& feature_names,
                       const RawRecord& target, const BackgroundSet& background);
Attribution exact_shap(const RiskModel& model, const RawRecord& target,
                       const BackgroundSet& background);

// Permutation-sampling estimate with an additivity correction that closes
// the residual proportionally to |phi|.
Attribution sampled_shap(const ModelFn& model, const std::vector<std::string>& feature_names,
                         const RawRecord& target, const BackgroundSet& background,
                         int n_permutations, std::uint64_t seed);
Attribution sampled_shap(const RiskModel& model, const RawRecord& target,
                         const BackgroundSet& background, int n_permutations,
                         std::uint64_t seed);

struct GlobalImportance {
    std::vector<std::string> feature_names;
    std::vector<double> mean_abs_phi;
    // Per instance, per feature: the attribution and the raw feature value
    // (categorical values exported as their codes), for the summary plot.
    std::vector<std::vector<double>> phi_matrix;    // n x features
    std::vector<std::vector<double>> value_matrix;  // n x features

    // Feature indices ordered by descending mean |phi|.
    std::vector<std::size_t> ranking() const;
};

GlobalImportance global_importance(const RiskModel& model, const Cohort& cohort,
                                   const BackgroundSet& background);

struct WaterfallStep {
    std::string feature;
    double value = 0.0;  // raw feature value
    double phi = 0.0;
    double running_before = 0.0;
    double running_after = 0.0;
};

// Features ordered by descending |phi| (ties by schema order); partial sums
// run from base_value to prediction.
std::vector<WaterfallStep> waterfall(const Attribution& attribution);

}  // namespace riskstrat
