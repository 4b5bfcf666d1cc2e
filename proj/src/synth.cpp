#include "riskstrat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskstrat/errors.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/model.hpp"
#include "riskstrat/rng.hpp"

namespace riskstrat {

void SynthConfig::validate() const {
    if (n < 1) throw InputError("InvalidConfig", "n must be >= 1");
    if (age_min > age_max) throw InputError("InvalidConfig", "age range is empty");
    if (income_log_sd <= 0.0 || income_max <= 0.0) {
        throw InputError("InvalidConfig", "income marginal parameters invalid");
    }
    auto check_weights = [](auto weights, const char* what) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw InputError("InvalidConfig", std::string(what) + " weight < 0");
            total += w;
        }
        if (total <= 0.0) throw InputError("InvalidConfig", std::string(what) + " weights sum to 0");
    };
    check_weights(ethnicity_weights, "ethnicity");
    check_weights(mcq_weights, "MCQ010");
    if (gender_p2 < 0.0 || gender_p2 > 1.0) {
        throw InputError("InvalidConfig", "gender_p2 must be a probability");
    }
    for (double r : missing_rate) {
        if (r < 0.0 || r > 1.0) throw InputError("InvalidConfig", "missing_rate must be in [0,1]");
    }
}

double SynthConfig::true_logit(const RawRecord& record) const {
    // record order: RIDAGEYR, INDFMPIR, RIDRETH1, RIAGENDR, MCQ010
    double z = intercept;
    z += age_coef * (record[0] - age_mean) / age_sd;
    z += income_coef * (record[1] - income_mean) / income_sd;
    const int eth = static_cast<int>(std::lround(record[2]));
    z += ethnicity_offsets[static_cast<std::size_t>(eth - 1)];
    if (static_cast<int>(std::lround(record[3])) == 2) z += gender_coef;
    if (static_cast<int>(std::lround(record[4])) == 1) z += mcq_coef;
    return z;
}

SynthCohort generate_cohort(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    SynthCohort result;
    result.cohort.schema = FeatureSchema::default_schema();
    const std::size_t n_features = result.cohort.schema.features.size();
    result.cohort.missing_counts.assign(n_features, 0);
    result.cohort.fill_values.assign(n_features, std::nullopt);
    result.cohort.rows.reserve(config.n);
    result.true_probability.reserve(config.n);

    const std::array<int, 3> mcq_codes{1, 2, 9};

    for (std::size_t i = 0; i < config.n; ++i) {
        RawRecord record(n_features);
        record[0] = static_cast<double>(rng.uniform_int(config.age_min, config.age_max));
        record[1] = std::clamp(
            std::exp(config.income_log_mean + config.income_log_sd * rng.normal()), 0.0,
            config.income_max);
        record[2] = static_cast<double>(1 + rng.categorical(config.ethnicity_weights));
        record[3] = rng.uniform() < config.gender_p2 ? 2.0 : 1.0;
        record[4] = static_cast<double>(mcq_codes[rng.categorical(config.mcq_weights)]);

        // MCQ010 code 9 carries no signal; the logit treats it as "no
        // reported condition".
        const double z = config.true_logit(record);
        result.true_probability.push_back(sigmoid(z));
        const int label = rng.uniform() < sigmoid(z + config.miscalibration_shift) ? 1 : 0;

        Row row;
        row.label = label;
        row.values.resize(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            // A drawn code 9 for MCQ010 is itself a missing marker.
            const bool code_missing = f == 4 && record[f] == 9.0;
            const bool drawn_missing = rng.uniform() < config.missing_rate[f];
            if (code_missing || drawn_missing) {
                ++result.cohort.missing_counts[f];
            } else {
                row.values[f] = record[f];
            }
        }
        result.cohort.rows.push_back(std::move(row));
    }
    return result;
}

SynthConfig default_replica() {
    // Defaults were frozen after a Monte Carlo tuning run against the
    // target operating point (trained-model AUC 0.61).
    return SynthConfig{};
}

std::string cohort_to_csv(const Cohort& cohort) {
    std::ostringstream out;
    for (std::size_t f = 0; f < cohort.schema.features.size(); ++f) {
        out << cohort.schema.features[f].name << ',';
    }
    out << cohort.schema.label_name << '\n';

    for (const auto& row : cohort.rows) {
        for (std::size_t f = 0; f < row.values.size(); ++f) {
            if (row.values[f].has_value()) {
                const double v = *row.values[f];
                if (cohort.schema.features[f].kind == FeatureKind::Categorical ||
                    v == std::floor(v)) {
                    out << static_cast<long long>(std::llround(v));
                } else {
                    char buffer[32];
                    std::snprintf(buffer, sizeof buffer, "%.6f", v);
                    out << buffer;
                }
            }
            out << ',';
        }
        out << row.label << '\n';
    }
    return out.str();
}

std::string truth_to_csv(const SynthCohort& synth) {
    std::ostringstream out;
    out << "row,true_probability\n";
    for (std::size_t i = 0; i < synth.true_probability.size(); ++i) {
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.10f", synth.true_probability[i]);
        out << i << ',' << buffer << '\n';
    }
    return out.str();
}

}  // namespace riskstrat
