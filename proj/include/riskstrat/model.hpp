#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskstrat/data.hpp"

namespace riskstrat {

// Numerically stable logistic; monotone, never returns 0 or 1 for finite z
// until the floating point floor.
double sigmoid(double z);

double logit(double p);

struct TrainConfig {
    double l2_lambda = 1.0;
    int max_iters = 500;
    double tolerance = 1e-8;   // on gradient max-norm
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    int folds = 5;

    void validate() const;  // throws InputError on bad values
};

enum class StopReason { GradientTolerance, MaxIterations };

struct RiskModel {
    std::vector<double> weights;  // aligned with DesignMatrix columns
    double intercept = 0.0;
    EncodingRecipe recipe;
    TrainConfig train_config;
    StopReason stop_reason = StopReason::MaxIterations;
    int iterations = 0;
    double final_loss = 0.0;
};

// Mean negative log-likelihood + (lambda/2n)*||w||^2, intercept unpenalized.
double regularized_loss(const DesignMatrix& matrix, const std::vector<double>& weights,
                        double intercept, double l2_lambda);

// Analytic gradient of regularized_loss; gradient[0] is the intercept
// component, gradient[1..] the weight components.
std::vector<double> loss_gradient(const DesignMatrix& matrix, const std::vector<double>& weights,
                                  double intercept, double l2_lambda);

// Full-batch gradient descent with backtracking halving line search.
RiskModel train(const DesignMatrix& matrix, const TrainConfig& config);

double predict_proba(const RiskModel& model, const std::vector<double>& encoded_row);

// Convenience: encode a raw record through the model recipe then predict.
double predict_raw(const RiskModel& model, const RawRecord& record);

struct FoldStats {
    double auc = 0.0;
    double brier = 0.0;
    std::size_t n_test = 0;
};

struct CVReport {
    std::vector<FoldStats> folds;
    std::vector<double> oof_predictions;  // aligned with matrix rows
    std::vector<int> labels;
    std::vector<int> fold_of_row;
};

// Seeded stratified k-fold cross-validation; every row scored exactly once
// out of fold.
CVReport cross_validate(const DesignMatrix& matrix, const TrainConfig& config);

// Versioned JSON persistence.
std::string model_to_json(const RiskModel& model);
RiskModel model_from_json(const std::string& json_text);

}  // namespace riskstrat
