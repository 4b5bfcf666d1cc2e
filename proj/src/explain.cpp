#include "riskstrat/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "riskstrat/errors.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/rng.hpp"

namespace riskstrat {

namespace {

constexpr std::size_t kMaxExactFeatures = 20;

std::vector<std::string> schema_feature_names(const FeatureSchema& schema) {
    std::vector<std::string> names;
    names.reserve(schema.features.size());
    for (const auto& f : schema.features) names.push_back(f.name);
    return names;
}

// Factorials up to 20 fit a double exactly enough for Shapley weights.
double factorial(std::size_t k) {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

ModelFn raw_predictor(const RiskModel& model) {
    return [model](const RawRecord& record) { return predict_raw(model, record); };
}

BackgroundSet sample_background(const Cohort& cohort, std::size_t size, std::uint64_t seed) {
    if (cohort.rows.empty()) throw InputError("EmptyCohort", "background sample needs rows");
    std::vector<std::size_t> indices(cohort.rows.size());
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(seed);
    rng.shuffle(indices);
    const std::size_t take = std::min(size, indices.size());

    BackgroundSet background;
    background.rows.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        background.rows.push_back(cohort.raw_record(indices[i]));
    }
    return background;
}

double coalition_value(const ModelFn& model, const RawRecord& target,
                       const BackgroundSet& background, std::uint32_t coalition) {
    if (background.rows.empty()) throw InputError("EmptyCohort", "background set is empty");
    double total = 0.0;
    RawRecord composite(target.size());
    for (const auto& row : background.rows) {
        for (std::size_t f = 0; f < target.size(); ++f) {
            composite[f] = (coalition >> f) & 1u ? target[f] : row[f];
        }
        total += model(composite);
    }
    return total / static_cast<double>(background.rows.size());
}

Attribution exact_shap(const ModelFn& model, const std::vector<std::string>& feature_names,
                       const RawRecord& target, const BackgroundSet& background) {
    const std::size_t m = feature_names.size();
    if (m == 0 || target.size() != m) {
        throw InputError("DimensionMismatch", "target must have one value per feature");
    }
    if (m > kMaxExactFeatures) {
        throw InputError("TooManyFeatures",
                         std::to_string(m) + " features exceeds the exact enumeration limit");
    }

    const std::uint32_t n_masks = 1u << m;
    std::vector<double> value(n_masks);
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
        value[mask] = coalition_value(model, target, background, mask);
    }

    const double m_factorial = factorial(m);
    Attribution attribution;
    attribution.feature_names = feature_names;
    attribution.target = target;
    attribution.base_value = value[0];
    attribution.prediction = value[n_masks - 1];
    attribution.phi.assign(m, 0.0);

    for (std::size_t i = 0; i < m; ++i) {
        const std::uint32_t bit = 1u << i;
        double phi = 0.0;
        for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double weight = factorial(s) * factorial(m - s - 1) / m_factorial;
            phi += weight * (value[mask | bit] - value[mask]);
        }
        attribution.phi[i] = phi;
    }
    return attribution;
}

Attribution exact_shap(const RiskModel& model, const RawRecord& target,
                       const BackgroundSet& background) {
    return exact_shap(raw_predictor(model), schema_feature_names(model.recipe.schema), target,
                      background);
}

Attribution sampled_shap(const ModelFn& model, const std::vector<std::string>& feature_names,
                         const RawRecord& target, const BackgroundSet& background,
                         int n_permutations, std::uint64_t seed) {
    const std::size_t m = feature_names.size();
    if (m == 0 || target.size() != m) {
        throw InputError("DimensionMismatch", "target must have one value per feature");
    }
    if (n_permutations < 1) throw InputError("InvalidConfig", "n_permutations must be >= 1");

    // Coalition values are memoized by mask; for small m the sampler touches
    // every mask once and the permutations are nearly free.
    std::unordered_map<std::uint64_t, double> cache;
    auto v = [&](std::uint64_t mask) {
        auto it = cache.find(mask);
        if (it != cache.end()) return it->second;
        const double value =
            coalition_value(model, target, background, static_cast<std::uint32_t>(mask));
        cache.emplace(mask, value);
        return value;
    };

    const double base = v(0);
    const double prediction = v((std::uint64_t{1} << m) - 1);

    Rng rng(seed);
    std::vector<std::size_t> permutation(m);
    std::iota(permutation.begin(), permutation.end(), 0);
    std::vector<double> phi(m, 0.0);

    for (int p = 0; p < n_permutations; ++p) {
        rng.shuffle(permutation);
        std::uint64_t mask = 0;
        double previous = base;
        for (std::size_t f : permutation) {
            mask |= std::uint64_t{1} << f;
            const double current = v(mask);
            phi[f] += current - previous;
            previous = current;
        }
    }
    for (double& p : phi) p /= static_cast<double>(n_permutations);

    // Close the efficiency residual proportionally to |phi| so the waterfall
    // ends exactly at the prediction.
    double residual = prediction - base;
    double abs_total = 0.0;
    for (double p : phi) {
        residual -= p;
        abs_total += std::abs(p);
    }
    if (abs_total > 0.0) {
        for (double& p : phi) p += residual * std::abs(p) / abs_total;
    } else {
        for (double& p : phi) p += residual / static_cast<double>(m);
    }

    Attribution attribution;
    attribution.feature_names = feature_names;
    attribution.target = target;
    attribution.base_value = base;
    attribution.prediction = prediction;
    attribution.phi = std::move(phi);
    return attribution;
}

Attribution sampled_shap(const RiskModel& model, const RawRecord& target,
                         const BackgroundSet& background, int n_permutations,
                         std::uint64_t seed) {
    return sampled_shap(raw_predictor(model), schema_feature_names(model.recipe.schema), target,
                        background, n_permutations, seed);
}

std::vector<std::size_t> GlobalImportance::ranking() const {
    std::vector<std::size_t> order(mean_abs_phi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mean_abs_phi[a] > mean_abs_phi[b];
    });
    return order;
}

namespace {

// Per-feature dot product of the encoded feature block with its weights.
// The model logit is intercept + sum of these, which lets exact_shap over a
// whole cohort skip re-encoding composites for every coalition.
std::vector<double> feature_contributions(const RiskModel& model, const RawRecord& record) {
    const auto encoded = apply_recipe(model.recipe, record);
    const auto& schema = model.recipe.schema;
    std::vector<double> contributions(schema.features.size(), 0.0);
    std::size_t col = 0;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        const std::size_t span = schema.features[f].kind == FeatureKind::Continuous
                                     ? 1
                                     : model.recipe.categorical[f].indicator_levels.size();
        for (std::size_t j = 0; j < span; ++j, ++col) {
            contributions[f] += model.weights[col] * encoded[col];
        }
    }
    return contributions;
}

}  // namespace

GlobalImportance global_importance(const RiskModel& model, const Cohort& cohort,
                                   const BackgroundSet& background) {
    if (cohort.rows.empty()) throw InputError("EmptyCohort", "cohort is empty");
    if (background.rows.empty()) throw InputError("EmptyCohort", "background set is empty");
    const std::size_t m = cohort.schema.features.size();
    if (m > kMaxExactFeatures) {
        throw InputError("TooManyFeatures",
                         std::to_string(m) + " features exceeds the exact enumeration limit");
    }

    GlobalImportance importance;
    importance.feature_names = schema_feature_names(cohort.schema);
    importance.mean_abs_phi.assign(m, 0.0);
    importance.phi_matrix.reserve(cohort.size());
    importance.value_matrix.reserve(cohort.size());

    std::vector<std::vector<double>> bg_contributions;
    bg_contributions.reserve(background.rows.size());
    for (const auto& row : background.rows) {
        bg_contributions.push_back(feature_contributions(model, row));
    }

    const std::uint32_t n_masks = 1u << m;
    const double m_factorial = factorial(m);
    std::vector<double> value(n_masks);

    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const RawRecord record = cohort.raw_record(i);
        const auto target_contributions = feature_contributions(model, record);

        for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
            double total = 0.0;
            for (const auto& bg : bg_contributions) {
                double z = model.intercept;
                for (std::size_t f = 0; f < m; ++f) {
                    z += (mask >> f) & 1u ? target_contributions[f] : bg[f];
                }
                total += sigmoid(z);
            }
            value[mask] = total / static_cast<double>(bg_contributions.size());
        }

        std::vector<double> phi(m, 0.0);
        for (std::size_t f = 0; f < m; ++f) {
            const std::uint32_t bit = 1u << f;
            for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
                if (mask & bit) continue;
                const auto s = static_cast<std::size_t>(std::popcount(mask));
                const double weight = factorial(s) * factorial(m - s - 1) / m_factorial;
                phi[f] += weight * (value[mask | bit] - value[mask]);
            }
            importance.mean_abs_phi[f] += std::abs(phi[f]);
        }
        importance.phi_matrix.push_back(std::move(phi));
        importance.value_matrix.push_back(record);
    }
    for (double& v : importance.mean_abs_phi) v /= static_cast<double>(cohort.size());
    return importance;
}

std::vector<WaterfallStep> waterfall(const Attribution& attribution) {
    const std::size_t m = attribution.phi.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    // stable sort keeps schema order on ties
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(attribution.phi[a]) > std::abs(attribution.phi[b]);
    });

    std::vector<WaterfallStep> steps;
    steps.reserve(m);
    double running = attribution.base_value;
    for (std::size_t f : order) {
        WaterfallStep step;
        step.feature = attribution.feature_names[f];
        step.value = attribution.target.empty() ? 0.0 : attribution.target[f];
        step.phi = attribution.phi[f];
        step.running_before = running;
        running += attribution.phi[f];
        step.running_after = running;
        steps.push_back(step);
    }
    return steps;
}

}  // namespace riskstrat
