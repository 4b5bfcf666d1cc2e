#pragma once

#include <string>
#include <vector>

#include "riskstrat/eval.hpp"
#include "riskstrat/explain.hpp"
#include "riskstrat/model.hpp"

namespace riskstrat {

struct EvalReport {
    double auc = 0.0;
    RocCurve roc;
    CalibrationCurve calibration;
    double brier = 0.0;
    std::vector<FoldStats> folds;
};

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& json_text);

// {base_value, prediction, contributions: [{feature, value, phi}...]}
// ordered as the waterfall.
std::string attribution_to_json(const Attribution& attribution);
Attribution attribution_from_json(const std::string& json_text);

// Write-temp-then-rename; never leaves a partial file at `path`.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace riskstrat
