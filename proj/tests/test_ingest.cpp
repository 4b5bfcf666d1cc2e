#include <cmath>

#include "doctest.h"
#include "riskstrat/errors.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/rng.hpp"
#include "test_helpers.hpp"

using namespace riskstrat;
using riskstrat::testing::small_csv;

namespace {

// Independent recount of missing slots, used to cross-check missing_counts.
std::vector<std::size_t> recount_missing(const Cohort& cohort) {
    std::vector<std::size_t> counts(cohort.schema.features.size(), 0);
    for (const auto& row : cohort.rows) {
        for (std::size_t f = 0; f < row.values.size(); ++f) {
            if (!row.values[f].has_value()) ++counts[f];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("default schema lists the five survey features in order") {
    const auto schema = FeatureSchema::default_schema();
    REQUIRE(schema.features.size() == 5);
    CHECK(schema.features[0].name == "RIDAGEYR");
    CHECK(schema.features[1].name == "INDFMPIR");
    CHECK(schema.features[2].name == "RIDRETH1");
    CHECK(schema.features[3].name == "RIAGENDR");
    CHECK(schema.features[4].name == "MCQ010");
    CHECK(schema.features[2].valid_codes == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(schema.features[4].missing_codes == std::vector<int>{9});
    CHECK(schema.label_name == "RISK");
}

TEST_CASE("load_cohort parses a well-formed file") {
    const auto cohort = load_cohort_text(small_csv(), FeatureSchema::default_schema());
    REQUIRE(cohort.size() == 3);
    for (std::size_t f = 0; f < 5; ++f) CHECK(cohort.missing_counts[f] == 0);
    CHECK(cohort.rows[0].label == 0);
    CHECK(cohort.rows[1].label == 1);
    CHECK(cohort.rows[2].label == 1);
    CHECK(*cohort.rows[1].values[1] == 3.0);
}

TEST_CASE("load_cohort matches columns by header name, order-insensitive") {
    const std::string shuffled =
        "RISK,MCQ010,RIDAGEYR,RIAGENDR,INDFMPIR,RIDRETH1\n"
        "1,2,6,1,0.8,4\n";
    const auto cohort = load_cohort_text(shuffled, FeatureSchema::default_schema());
    CHECK(*cohort.rows[0].values[0] == 6.0);
    CHECK(*cohort.rows[0].values[1] == 0.8);
    CHECK(*cohort.rows[0].values[2] == 4.0);
    CHECK(cohort.rows[0].label == 1);
}

TEST_CASE("missing header raises MissingColumn") {
    const std::string csv = "RIDAGEYR,RIDRETH1,RIAGENDR,MCQ010,RISK\n4,3,1,2,0\n";
    CHECK_THROWS_WITH_AS(load_cohort_text(csv, FeatureSchema::default_schema()),
                         "[MissingColumn] INDFMPIR", InputError);
}

TEST_CASE("MCQ010 code 9 is recorded as missing") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,1.0,3,1,9,0\n"
        "8,3.0,3,2,1,1\n";
    const auto cohort = load_cohort_text(csv, FeatureSchema::default_schema());
    CHECK_FALSE(cohort.rows[0].values[4].has_value());
    CHECK(cohort.missing_counts[4] == 1);
    CHECK(cohort.missing_counts == recount_missing(cohort));
}

TEST_CASE("blank cells are missing") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,,3,1,2,0\n"
        "8,3.0,3,2,1,1\n";
    const auto cohort = load_cohort_text(csv, FeatureSchema::default_schema());
    CHECK(cohort.missing_counts[1] == 1);
    CHECK(cohort.missing_counts == recount_missing(cohort));
}

TEST_CASE("label must be binary") {
    const std::string csv = "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n4,1.0,3,1,2,2\n";
    CHECK_THROWS_AS(load_cohort_text(csv, FeatureSchema::default_schema()), InputError);
    try {
        load_cohort_text(csv, FeatureSchema::default_schema());
    } catch (const InputError& e) {
        CHECK(e.kind() == "NonBinaryLabel");
    }
}

TEST_CASE("categorical code outside valid and missing codes raises InvalidCode") {
    const std::string csv = "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n4,1.0,7,1,2,0\n";
    try {
        load_cohort_text(csv, FeatureSchema::default_schema());
        FAIL("expected InvalidCode");
    } catch (const InputError& e) {
        CHECK(e.kind() == "InvalidCode");
    }
}

TEST_CASE("empty input raises EmptyCohort") {
    const std::string csv = "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n";
    try {
        load_cohort_text(csv, FeatureSchema::default_schema());
        FAIL("expected EmptyCohort");
    } catch (const InputError& e) {
        CHECK(e.kind() == "EmptyCohort");
    }
}

TEST_CASE("load is deterministic: same bytes, same cohort") {
    const auto a = load_cohort_text(small_csv(), FeatureSchema::default_schema());
    const auto b = load_cohort_text(small_csv(), FeatureSchema::default_schema());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.rows[i].values == b.rows[i].values);
        CHECK(a.rows[i].label == b.rows[i].label);
    }
}

TEST_CASE("impute_missing is the identity on a complete cohort") {
    const auto cohort = load_cohort_text(small_csv(), FeatureSchema::default_schema());
    const auto imputed = impute_missing(cohort);
    REQUIRE(imputed.size() == cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        CHECK(imputed.rows[i].values == cohort.rows[i].values);
    }
    for (const auto& fill : imputed.fill_values) CHECK_FALSE(fill.has_value());
}

TEST_CASE("continuous fill is the median of observed values") {
    // observed INDFMPIR {1.0, 3.0}, median by hand = 2.0
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,1.0,3,1,2,0\n"
        "8,3.0,3,2,1,1\n"
        "12,,5,2,2,1\n";
    const auto imputed =
        impute_missing(load_cohort_text(csv, FeatureSchema::default_schema()));
    CHECK(*imputed.rows[2].values[1] == 2.0);
    CHECK(*imputed.fill_values[1] == 2.0);
    CHECK_FALSE(imputed.has_missing());
}

TEST_CASE("categorical fill is the modal observed code") {
    // observed RIDRETH1 {3, 3, 5}, mode by count = 3
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,1.0,3,1,2,0\n"
        "8,3.0,3,2,1,1\n"
        "10,2.0,5,1,2,0\n"
        "12,2.5,,2,2,1\n";
    const auto imputed =
        impute_missing(load_cohort_text(csv, FeatureSchema::default_schema()));
    CHECK(*imputed.rows[3].values[2] == 3.0);
    CHECK(*imputed.fill_values[2] == 3.0);
}

TEST_CASE("a fully missing column raises AllMissingColumn") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,,3,1,2,0\n"
        "8,,3,2,1,1\n";
    try {
        impute_missing(load_cohort_text(csv, FeatureSchema::default_schema()));
        FAIL("expected AllMissingColumn");
    } catch (const InputError& e) {
        CHECK(e.kind() == "AllMissingColumn");
    }
}

TEST_CASE("encode standardizes continuous features with sample stddev") {
    // ages {4, 8, 12}: mean 8, sample sd 4, z-scores {-1, 0, 1} by hand
    const auto matrix =
        encode(load_cohort_text(small_csv(), FeatureSchema::default_schema()));
    CHECK(matrix.values[0][0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(matrix.values[1][0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(matrix.values[2][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(matrix.recipe.continuous[0].mean == doctest::Approx(8.0));
    CHECK(matrix.recipe.continuous[0].stddev == doctest::Approx(4.0));
}

TEST_CASE("encode emits k-1 indicators with the lowest code as reference") {
    const auto matrix =
        encode(load_cohort_text(small_csv(), FeatureSchema::default_schema()));
    // columns: RIDAGEYR, INDFMPIR, RIDRETH1=2..5 (4), RIAGENDR=2 (1), MCQ010=2 (1)
    REQUIRE(matrix.column_count() == 8);
    CHECK(matrix.columns[2].name == "RIDRETH1=2");
    CHECK(matrix.columns[5].name == "RIDRETH1=5");
    CHECK(matrix.recipe.categorical[2].reference_level == 1);
    // row 2 has RIDRETH1 = 5
    CHECK(matrix.values[2][5] == 1.0);
    CHECK(matrix.values[2][2] == 0.0);
}

TEST_CASE("reference level rows have all-zero indicators") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,1.0,1,1,2,0\n"
        "8,3.0,3,2,1,1\n";
    const auto matrix = encode(load_cohort_text(csv, FeatureSchema::default_schema()));
    for (std::size_t j = 2; j < 6; ++j) CHECK(matrix.values[0][j] == 0.0);
}

TEST_CASE("single-valued categorical column still indicates its level") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,1.0,3,2,2,0\n"
        "8,3.0,3,2,1,1\n";
    const auto matrix = encode(load_cohort_text(csv, FeatureSchema::default_schema()));
    // RIAGENDR all 2: indicator column for level 2 is all ones
    CHECK(matrix.values[0][6] == 1.0);
    CHECK(matrix.values[1][6] == 1.0);
}

TEST_CASE("zero-variance continuous column becomes zeros with a warning") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "8,1.0,3,1,2,0\n"
        "8,3.0,3,2,1,1\n";
    const auto matrix = encode(load_cohort_text(csv, FeatureSchema::default_schema()));
    CHECK(matrix.values[0][0] == 0.0);
    CHECK(matrix.values[1][0] == 0.0);
    REQUIRE(matrix.warnings.size() == 1);
    CHECK(matrix.warnings[0].find("RIDAGEYR") != std::string::npos);
}

TEST_CASE("training columns are standardized to mean 0, sample sd 1") {
    // a larger random cohort exercises the numeric invariant
    Rng rng(11);
    std::string csv = "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n";
    for (int i = 0; i < 200; ++i) {
        csv += std::to_string(rng.uniform_int(2, 17)) + "," +
               std::to_string(1.0 + 3.0 * rng.uniform()) + "," +
               std::to_string(rng.uniform_int(1, 5)) + "," +
               std::to_string(rng.uniform_int(1, 2)) + "," +
               std::to_string(rng.uniform_int(1, 2)) + "," + std::to_string(i % 2) + "\n";
    }
    const auto matrix = encode(load_cohort_text(csv, FeatureSchema::default_schema()));
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (const auto& row : matrix.values) mean += row[j];
        mean /= static_cast<double>(matrix.row_count());
        double ss = 0.0;
        for (const auto& row : matrix.values) ss += (row[j] - mean) * (row[j] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(matrix.row_count() - 1));
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(sd - 1.0) < 1e-9);
    }
    // indicator exclusivity: at most one indicator per categorical per row
    for (const auto& row : matrix.values) {
        double eth = 0.0;
        for (std::size_t j = 2; j < 6; ++j) eth += row[j];
        CHECK((eth == 0.0 || eth == 1.0));
    }
}

TEST_CASE("apply_recipe round-trips every training row bit-exactly") {
    const auto cohort = load_cohort_text(small_csv(), FeatureSchema::default_schema());
    const auto matrix = encode(cohort);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        CHECK(apply_recipe(matrix.recipe, cohort.raw_record(i)) == matrix.values[i]);
    }
}

TEST_CASE("apply_recipe maps the recipe mean to exactly zero") {
    const auto matrix =
        encode(load_cohort_text(small_csv(), FeatureSchema::default_schema()));
    RawRecord record{8.0, matrix.recipe.continuous[1].mean, 3, 1, 2};
    const auto row = apply_recipe(matrix.recipe, record);
    CHECK(row[0] == 0.0);
    CHECK(row[1] == 0.0);
}

TEST_CASE("apply_recipe rejects unknown categorical codes") {
    const auto matrix =
        encode(load_cohort_text(small_csv(), FeatureSchema::default_schema()));
    try {
        apply_recipe(matrix.recipe, RawRecord{8.0, 1.0, 7, 1, 2});
        FAIL("expected UnknownLevel");
    } catch (const InputError& e) {
        CHECK(e.kind() == "UnknownLevel");
    }
}

TEST_CASE("row count is conserved through impute and encode") {
    const std::string csv =
        "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
        "4,,3,1,9,0\n"
        "8,3.0,3,2,1,1\n"
        "12,2.5,5,2,2,1\n";
    const auto cohort = load_cohort_text(csv, FeatureSchema::default_schema());
    const auto imputed = impute_missing(cohort);
    const auto matrix = encode(imputed);
    CHECK(imputed.size() == cohort.size());
    CHECK(matrix.row_count() == cohort.size());
}
