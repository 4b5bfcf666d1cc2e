#pragma once

#include <string>

#include "riskstrat/data.hpp"

namespace riskstrat {

// Parse a comma-delimited file with a header row into a validated cohort.
// Column order in the file is irrelevant; matching is by header name.
// Blank cells and configured missing codes become missing slots.
Cohort load_cohort(const std::string& path, const FeatureSchema& schema);

// Same, but from an in-memory CSV string (used by tests and the synth path).
Cohort load_cohort_text(const std::string& csv, const FeatureSchema& schema);

// Median fill for continuous features, modal code for categorical ones.
// Fill values used are recorded on the returned cohort.
Cohort impute_missing(const Cohort& cohort);

// Z-standardize continuous features (sample stddev) and one-hot encode
// categorical ones with the lowest code as dropped reference level.
// Requires a fully observed cohort.
DesignMatrix encode(const Cohort& cohort);

// Re-encode a single raw record exactly as `encode` would under `recipe`.
std::vector<double> apply_recipe(const EncodingRecipe& recipe, const RawRecord& record);

}  // namespace riskstrat
