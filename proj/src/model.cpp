#include "riskstrat/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "riskstrat/errors.hpp"
#include "riskstrat/eval.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/rng.hpp"

namespace riskstrat {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

void TrainConfig::validate() const {
    if (l2_lambda < 0.0) throw InputError("InvalidConfig", "l2_lambda must be >= 0");
    if (max_iters <= 0) throw InputError("InvalidConfig", "max_iters must be positive");
    if (tolerance <= 0.0) throw InputError("InvalidConfig", "tolerance must be positive");
    if (learning_rate <= 0.0) throw InputError("InvalidConfig", "learning_rate must be positive");
    if (folds < 2) throw InputError("InvalidConfig", "folds must be >= 2");
}

namespace {

double linear_term(const std::vector<double>& row, const std::vector<double>& weights,
                   double intercept) {
    double z = intercept;
    for (std::size_t j = 0; j < row.size(); ++j) z += weights[j] * row[j];
    return z;
}

// log(1 + e^z) without overflow
double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

void check_classes(const std::vector<int>& labels) {
    const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
    const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
    if (!has_pos || !has_neg) {
        throw InputError("SingleClass", "training labels contain only one class");
    }
}

}  // namespace

double regularized_loss(const DesignMatrix& matrix, const std::vector<double>& weights,
                        double intercept, double l2_lambda) {
    const auto n = static_cast<double>(matrix.row_count());
    double nll = 0.0;
    for (std::size_t i = 0; i < matrix.row_count(); ++i) {
        const double z = linear_term(matrix.values[i], weights, intercept);
        // -[y*z - log(1+e^z)]
        nll += log1pexp(z) - (matrix.labels[i] == 1 ? z : 0.0);
    }
    double penalty = 0.0;
    for (double w : weights) penalty += w * w;
    return nll / n + (l2_lambda / (2.0 * n)) * penalty;
}

std::vector<double> loss_gradient(const DesignMatrix& matrix, const std::vector<double>& weights,
                                  double intercept, double l2_lambda) {
    const auto n = static_cast<double>(matrix.row_count());
    std::vector<double> gradient(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < matrix.row_count(); ++i) {
        const double z = linear_term(matrix.values[i], weights, intercept);
        const double residual = sigmoid(z) - static_cast<double>(matrix.labels[i]);
        gradient[0] += residual;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            gradient[j + 1] += residual * matrix.values[i][j];
        }
    }
    gradient[0] /= n;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        gradient[j + 1] = gradient[j + 1] / n + (l2_lambda / n) * weights[j];
    }
    return gradient;
}

RiskModel train(const DesignMatrix& matrix, const TrainConfig& config) {
    config.validate();
    if (matrix.row_count() < 2) throw InputError("EmptyCohort", "need at least 2 rows to train");
    check_classes(matrix.labels);

    RiskModel model;
    model.recipe = matrix.recipe;
    model.train_config = config;
    model.weights.assign(matrix.column_count(), 0.0);
    model.intercept = 0.0;

    double loss = regularized_loss(matrix, model.weights, model.intercept, config.l2_lambda);
    // Step size carries over between iterations and grows on acceptance, so
    // plain gradient descent still makes progress on flat directions.
    double step = config.learning_rate;
    model.stop_reason = StopReason::MaxIterations;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        const auto gradient =
            loss_gradient(matrix, model.weights, model.intercept, config.l2_lambda);
        double grad_max = 0.0;
        for (double g : gradient) grad_max = std::max(grad_max, std::abs(g));
        if (!std::isfinite(grad_max)) throw ComputeError("NonFinite", "gradient is non-finite");
        if (grad_max < config.tolerance) {
            model.stop_reason = StopReason::GradientTolerance;
            model.iterations = iter;
            break;
        }

        double grad_sq = 0.0;
        for (double g : gradient) grad_sq += g * g;

        // Backtracking halving with a mild Armijo condition; a step that
        // increases the loss is never accepted.
        bool accepted = false;
        while (step > 1e-16) {
            std::vector<double> trial_weights(model.weights.size());
            for (std::size_t j = 0; j < model.weights.size(); ++j) {
                trial_weights[j] = model.weights[j] - step * gradient[j + 1];
            }
            const double trial_intercept = model.intercept - step * gradient[0];
            const double trial_loss =
                regularized_loss(matrix, trial_weights, trial_intercept, config.l2_lambda);
            if (!std::isfinite(trial_loss)) {
                throw ComputeError("NonFinite", "loss is non-finite");
            }
            if (trial_loss <= loss - 1e-4 * step * grad_sq) {
                model.weights = std::move(trial_weights);
                model.intercept = trial_intercept;
                loss = trial_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            model.stop_reason = StopReason::GradientTolerance;
            model.iterations = iter;
            break;
        }
        step = std::min(step * 2.0, 1e6);
        model.iterations = iter + 1;
    }

    model.final_loss = loss;
    return model;
}

double predict_proba(const RiskModel& model, const std::vector<double>& encoded_row) {
    if (encoded_row.size() != model.weights.size()) {
        throw InputError("DimensionMismatch",
                         "row has " + std::to_string(encoded_row.size()) + " columns, model has " +
                             std::to_string(model.weights.size()));
    }
    return sigmoid(linear_term(encoded_row, model.weights, model.intercept));
}

double predict_raw(const RiskModel& model, const RawRecord& record) {
    return predict_proba(model, apply_recipe(model.recipe, record));
}

CVReport cross_validate(const DesignMatrix& matrix, const TrainConfig& config) {
    config.validate();
    check_classes(matrix.labels);
    const std::size_t n = matrix.row_count();
    const int folds = config.folds;

    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < n; ++i) {
        (matrix.labels[i] == 1 ? positives : negatives).push_back(i);
    }
    if (positives.size() < static_cast<std::size_t>(folds) ||
        negatives.size() < static_cast<std::size_t>(folds)) {
        throw InputError("TooFewPerClass", "each class needs at least one row per fold");
    }

    // Shuffle within class, then deal round-robin: fold sizes per class
    // differ by at most one.
    Rng rng(config.seed);
    rng.shuffle(positives);
    rng.shuffle(negatives);

    CVReport report;
    report.fold_of_row.assign(n, 0);
    report.oof_predictions.assign(n, 0.0);
    report.labels = matrix.labels;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        report.fold_of_row[positives[i]] = static_cast<int>(i % folds);
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        report.fold_of_row[negatives[i]] = static_cast<int>(i % folds);
    }

    for (int fold = 0; fold < folds; ++fold) {
        DesignMatrix train_matrix;
        train_matrix.columns = matrix.columns;
        train_matrix.recipe = matrix.recipe;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (report.fold_of_row[i] == fold) {
                test_rows.push_back(i);
            } else {
                train_matrix.values.push_back(matrix.values[i]);
                train_matrix.labels.push_back(matrix.labels[i]);
            }
        }

        const RiskModel fold_model = train(train_matrix, config);

        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i : test_rows) {
            const double p = predict_proba(fold_model, matrix.values[i]);
            report.oof_predictions[i] = p;
            scores.push_back(p);
            labels.push_back(matrix.labels[i]);
        }

        FoldStats stats;
        stats.n_test = test_rows.size();
        stats.brier = brier_score(scores, labels);
        stats.auc = auc(scores, labels);
        report.folds.push_back(stats);
    }
    return report;
}

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

json recipe_to_json(const EncodingRecipe& recipe) {
    json features = json::array();
    for (std::size_t f = 0; f < recipe.schema.features.size(); ++f) {
        const FeatureSpec& spec = recipe.schema.features[f];
        json entry;
        entry["name"] = spec.name;
        if (spec.kind == FeatureKind::Continuous) {
            entry["kind"] = "continuous";
            entry["mean"] = recipe.continuous[f].mean;
            entry["stddev"] = recipe.continuous[f].stddev;
        } else {
            entry["kind"] = "categorical";
            entry["valid_codes"] = spec.valid_codes;
            entry["missing_codes"] = spec.missing_codes;
            entry["reference_level"] = recipe.categorical[f].reference_level;
            entry["indicator_levels"] = recipe.categorical[f].indicator_levels;
        }
        features.push_back(entry);
    }
    return json{{"features", features}, {"label_name", recipe.schema.label_name}};
}

EncodingRecipe recipe_from_json(const json& j) {
    EncodingRecipe recipe;
    recipe.schema.label_name = j.at("label_name").get<std::string>();
    for (const auto& entry : j.at("features")) {
        FeatureSpec spec;
        spec.name = entry.at("name").get<std::string>();
        ContinuousRecipe cont;
        CategoricalRecipe cat;
        if (entry.at("kind") == "continuous") {
            spec.kind = FeatureKind::Continuous;
            cont.mean = entry.at("mean").get<double>();
            cont.stddev = entry.at("stddev").get<double>();
        } else {
            spec.kind = FeatureKind::Categorical;
            spec.valid_codes = entry.at("valid_codes").get<std::vector<int>>();
            spec.missing_codes = entry.at("missing_codes").get<std::vector<int>>();
            cat.reference_level = entry.at("reference_level").get<int>();
            cat.indicator_levels = entry.at("indicator_levels").get<std::vector<int>>();
        }
        recipe.schema.features.push_back(spec);
        recipe.continuous.push_back(cont);
        recipe.categorical.push_back(cat);
    }
    return recipe;
}

}  // namespace

std::string model_to_json(const RiskModel& model) {
    json feature_columns = json::array();
    // Column names are reproducible from the recipe; stored for readability.
    for (std::size_t f = 0; f < model.recipe.schema.features.size(); ++f) {
        const FeatureSpec& spec = model.recipe.schema.features[f];
        if (spec.kind == FeatureKind::Continuous) {
            feature_columns.push_back(spec.name);
        } else {
            for (int level : model.recipe.categorical[f].indicator_levels) {
                feature_columns.push_back(spec.name + "=" + std::to_string(level));
            }
        }
    }
    json doc;
    doc["version"] = kModelVersion;
    doc["feature_columns"] = feature_columns;
    doc["weights"] = model.weights;
    doc["intercept"] = model.intercept;
    doc["recipe"] = recipe_to_json(model.recipe);
    doc["train_config"] = {
        {"l2_lambda", model.train_config.l2_lambda},
        {"max_iters", model.train_config.max_iters},
        {"tolerance", model.train_config.tolerance},
        {"learning_rate", model.train_config.learning_rate},
        {"seed", model.train_config.seed},
        {"folds", model.train_config.folds},
    };
    return doc.dump(2) + "\n";
}

RiskModel model_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError("InvalidModel", e.what());
    }
    if (!doc.contains("version") || doc["version"].get<int>() != kModelVersion) {
        throw InputError("UnknownVersion", "expected model version " +
                                               std::to_string(kModelVersion));
    }
    RiskModel model;
    try {
        model.weights = doc.at("weights").get<std::vector<double>>();
        model.intercept = doc.at("intercept").get<double>();
        model.recipe = recipe_from_json(doc.at("recipe"));
        const auto& tc = doc.at("train_config");
        model.train_config.l2_lambda = tc.at("l2_lambda").get<double>();
        model.train_config.max_iters = tc.at("max_iters").get<int>();
        model.train_config.tolerance = tc.at("tolerance").get<double>();
        model.train_config.learning_rate = tc.at("learning_rate").get<double>();
        model.train_config.seed = tc.at("seed").get<std::uint64_t>();
        model.train_config.folds = tc.at("folds").get<int>();
    } catch (const json::exception& e) {
        throw InputError("InvalidModel", e.what());
    }
    if (!model.recipe.schema.features.empty() &&
        model.weights.size() != model.recipe.column_count()) {
        throw InputError("InvalidModel", "weight count does not match recipe columns");
    }
    return model;
}

}  // namespace riskstrat
