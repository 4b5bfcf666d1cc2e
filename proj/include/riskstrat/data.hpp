#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace riskstrat {

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<int> valid_codes;    // categorical only, sorted ascending
    std::vector<int> missing_codes;  // codes recorded as missing on load
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;
    std::string label_name = "RISK";

    std::size_t feature_count() const { return features.size(); }
    // Index of a feature by name, or -1.
    int index_of(const std::string& name) const;

    // The five survey variables in their canonical order.
    static FeatureSchema default_schema();
};

// One observation: a value slot per schema feature (nullopt = missing) plus
// a binary label.
struct Row {
    std::vector<std::optional<double>> values;
    int label = 0;
};

// A fully observed record, one value per schema feature, in schema order.
// Categorical values hold their integer code.
using RawRecord = std::vector<double>;

struct Cohort {
    FeatureSchema schema;
    std::vector<Row> rows;
    std::vector<std::size_t> missing_counts;         // per feature
    std::vector<std::optional<double>> fill_values;  // recorded by imputation

    std::size_t size() const { return rows.size(); }
    bool has_missing() const;
    // Requires no missing slots in the row.
    RawRecord raw_record(std::size_t i) const;
};

struct ContinuousRecipe {
    double mean = 0.0;
    double stddev = 1.0;  // sample (n-1) stddev; 0 marks a constant column
};

struct CategoricalRecipe {
    int reference_level = 0;           // lowest valid code, no column emitted
    std::vector<int> indicator_levels; // ascending, one column each
};

// Everything needed to re-encode a raw record exactly as the training
// cohort was encoded.
struct EncodingRecipe {
    FeatureSchema schema;
    std::vector<ContinuousRecipe> continuous;    // indexed by feature
    std::vector<CategoricalRecipe> categorical;  // indexed by feature

    std::size_t column_count() const;
};

enum class ColumnType { Standardized, Indicator };

struct ColumnDesc {
    std::size_t feature_index = 0;
    ColumnType type = ColumnType::Standardized;
    int level = 0;  // indicator columns only
    std::string name;
};

struct DesignMatrix {
    std::vector<ColumnDesc> columns;
    std::vector<std::vector<double>> values;  // n rows, columns.size() each
    std::vector<int> labels;
    EncodingRecipe recipe;
    std::vector<std::string> warnings;  // e.g. zero-variance notes

    std::size_t row_count() const { return values.size(); }
    std::size_t column_count() const { return columns.size(); }
};

}  // namespace riskstrat
