#include "riskstrat/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "riskstrat/errors.hpp"

namespace riskstrat {

int FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

FeatureSchema FeatureSchema::default_schema() {
    FeatureSchema schema;
    schema.features = {
        {"RIDAGEYR", FeatureKind::Continuous, {}, {}},
        {"INDFMPIR", FeatureKind::Continuous, {}, {}},
        {"RIDRETH1", FeatureKind::Categorical, {1, 2, 3, 4, 5}, {}},
        {"RIAGENDR", FeatureKind::Categorical, {1, 2}, {}},
        {"MCQ010", FeatureKind::Categorical, {1, 2}, {9}},
    };
    schema.label_name = "RISK";
    return schema;
}

bool Cohort::has_missing() const {
    for (const auto& row : rows) {
        for (const auto& v : row.values) {
            if (!v.has_value()) return true;
        }
    }
    return false;
}

RawRecord Cohort::raw_record(std::size_t i) const {
    const Row& row = rows.at(i);
    RawRecord record;
    record.reserve(row.values.size());
    for (const auto& v : row.values) {
        if (!v.has_value()) {
            throw InputError("MissingValue", "raw_record on a row with missing slots");
        }
        record.push_back(*v);
    }
    return record;
}

std::size_t EncodingRecipe::column_count() const {
    std::size_t count = 0;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        if (schema.features[f].kind == FeatureKind::Continuous) {
            ++count;
        } else {
            count += categorical[f].indicator_levels.size();
        }
    }
    return count;
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& text, const std::string& context, std::size_t row) {
    try {
        std::size_t pos = 0;
        double value = std::stod(text, &pos);
        if (pos != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw InputError("InvalidValue", "row " + std::to_string(row) + ", column " + context +
                                             ": cannot parse '" + text + "'");
    }
}

}  // namespace

Cohort load_cohort_text(const std::string& csv, const FeatureSchema& schema) {
    std::stringstream stream(csv);
    std::string line;
    if (!std::getline(stream, line)) throw InputError("EmptyCohort", "input has no header row");
    const auto header = split_csv_line(line);

    std::map<std::string, std::size_t> header_index;
    for (std::size_t i = 0; i < header.size(); ++i) header_index[header[i]] = i;

    std::vector<std::size_t> feature_col(schema.features.size());
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        auto it = header_index.find(schema.features[f].name);
        if (it == header_index.end()) {
            throw InputError("MissingColumn", schema.features[f].name);
        }
        feature_col[f] = it->second;
    }
    auto label_it = header_index.find(schema.label_name);
    if (label_it == header_index.end()) throw InputError("MissingColumn", schema.label_name);
    const std::size_t label_col = label_it->second;

    Cohort cohort;
    cohort.schema = schema;
    cohort.missing_counts.assign(schema.features.size(), 0);
    cohort.fill_values.assign(schema.features.size(), std::nullopt);

    std::size_t row_number = 0;
    while (std::getline(stream, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw InputError("InvalidValue",
                             "row " + std::to_string(row_number) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));
        }

        Row row;
        row.values.resize(schema.features.size());
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            const FeatureSpec& spec = schema.features[f];
            const std::string& cell = cells[feature_col[f]];
            if (cell.empty()) {
                ++cohort.missing_counts[f];
                continue;
            }
            const double value = parse_number(cell, spec.name, row_number);
            if (spec.kind == FeatureKind::Categorical) {
                const int code = static_cast<int>(std::lround(value));
                if (static_cast<double>(code) != value ||
                    (!std::count(spec.valid_codes.begin(), spec.valid_codes.end(), code) &&
                     !std::count(spec.missing_codes.begin(), spec.missing_codes.end(), code))) {
                    throw InputError("InvalidCode", spec.name + ", row " +
                                                        std::to_string(row_number) + ", code " + cell);
                }
                if (std::count(spec.missing_codes.begin(), spec.missing_codes.end(), code)) {
                    ++cohort.missing_counts[f];
                    continue;
                }
                row.values[f] = static_cast<double>(code);
            } else {
                row.values[f] = value;
            }
        }

        const std::string& label_cell = cells[label_col];
        const double label_value =
            label_cell.empty() ? -1.0 : parse_number(label_cell, schema.label_name, row_number);
        if (label_value != 0.0 && label_value != 1.0) {
            throw InputError("NonBinaryLabel", "row " + std::to_string(row_number) + ": '" +
                                                   label_cell + "'");
        }
        row.label = static_cast<int>(label_value);
        cohort.rows.push_back(std::move(row));
    }

    if (cohort.rows.empty()) throw InputError("EmptyCohort", "no data rows");
    return cohort;
}

Cohort load_cohort(const std::string& path, const FeatureSchema& schema) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("FileNotFound", path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return load_cohort_text(buffer.str(), schema);
}

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int mode_code(const std::vector<double>& values) {
    std::map<int, std::size_t> counts;
    for (double v : values) ++counts[static_cast<int>(std::lround(v))];
    int best = 0;
    std::size_t best_count = 0;
    for (const auto& [code, count] : counts) {
        if (count > best_count) {  // ties resolve to the lowest code
            best = code;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

Cohort impute_missing(const Cohort& cohort) {
    if (cohort.rows.empty()) throw InputError("EmptyCohort", "cannot impute an empty cohort");

    Cohort result = cohort;
    const std::size_t n_features = cohort.schema.features.size();

    for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> observed;
        for (const auto& row : cohort.rows) {
            if (row.values[f].has_value()) observed.push_back(*row.values[f]);
        }
        if (cohort.missing_counts[f] == 0) continue;
        if (observed.empty()) {
            throw InputError("AllMissingColumn", cohort.schema.features[f].name);
        }
        const double fill = cohort.schema.features[f].kind == FeatureKind::Continuous
                                ? median(observed)
                                : static_cast<double>(mode_code(observed));
        result.fill_values[f] = fill;
        for (auto& row : result.rows) {
            if (!row.values[f].has_value()) row.values[f] = fill;
        }
        result.missing_counts[f] = 0;
    }
    return result;
}

DesignMatrix encode(const Cohort& cohort) {
    if (cohort.has_missing()) {
        throw InputError("MissingValue", "encode requires a fully observed cohort");
    }
    const std::size_t n = cohort.rows.size();
    const std::size_t n_features = cohort.schema.features.size();

    DesignMatrix matrix;
    matrix.recipe.schema = cohort.schema;
    matrix.recipe.continuous.resize(n_features);
    matrix.recipe.categorical.resize(n_features);

    for (std::size_t f = 0; f < n_features; ++f) {
        const FeatureSpec& spec = cohort.schema.features[f];
        if (spec.kind == FeatureKind::Continuous) {
            double sum = 0.0;
            for (const auto& row : cohort.rows) sum += *row.values[f];
            const double mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (const auto& row : cohort.rows) {
                const double d = *row.values[f] - mean;
                ss += d * d;
            }
            const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
            matrix.recipe.continuous[f] = {mean, sd};
            if (sd == 0.0) {
                matrix.warnings.push_back("ZeroVariance: " + spec.name +
                                          " is constant; column emitted as zeros");
            }
            matrix.columns.push_back({f, ColumnType::Standardized, 0, spec.name});
        } else {
            CategoricalRecipe recipe;
            recipe.reference_level = spec.valid_codes.front();
            for (std::size_t i = 1; i < spec.valid_codes.size(); ++i) {
                recipe.indicator_levels.push_back(spec.valid_codes[i]);
                matrix.columns.push_back({f, ColumnType::Indicator, spec.valid_codes[i],
                                          spec.name + "=" + std::to_string(spec.valid_codes[i])});
            }
            matrix.recipe.categorical[f] = recipe;
        }
    }

    matrix.values.reserve(n);
    matrix.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        matrix.values.push_back(apply_recipe(matrix.recipe, cohort.raw_record(i)));
        matrix.labels.push_back(cohort.rows[i].label);
    }
    return matrix;
}

std::vector<double> apply_recipe(const EncodingRecipe& recipe, const RawRecord& record) {
    if (record.size() != recipe.schema.features.size()) {
        throw InputError("DimensionMismatch",
                         "record has " + std::to_string(record.size()) + " values, schema has " +
                             std::to_string(recipe.schema.features.size()));
    }
    std::vector<double> row;
    row.reserve(recipe.column_count());
    for (std::size_t f = 0; f < recipe.schema.features.size(); ++f) {
        const FeatureSpec& spec = recipe.schema.features[f];
        if (spec.kind == FeatureKind::Continuous) {
            const auto& cont = recipe.continuous[f];
            row.push_back(cont.stddev > 0.0 ? (record[f] - cont.mean) / cont.stddev : 0.0);
        } else {
            const int code = static_cast<int>(std::lround(record[f]));
            if (!std::count(spec.valid_codes.begin(), spec.valid_codes.end(), code)) {
                throw InputError("UnknownLevel", spec.name + ", code " + std::to_string(code));
            }
            for (int level : recipe.categorical[f].indicator_levels) {
                row.push_back(code == level ? 1.0 : 0.0);
            }
        }
    }
    return row;
}

}  // namespace riskstrat
