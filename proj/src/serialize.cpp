#include "riskstrat/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "riskstrat/errors.hpp"

namespace riskstrat {

using nlohmann::json;

std::string eval_report_to_json(const EvalReport& report) {
    json roc = json::array();
    for (std::size_t i = 0; i < report.roc.fpr.size(); ++i) {
        roc.push_back({report.roc.fpr[i], report.roc.tpr[i], report.roc.thresholds[i]});
    }
    json calibration = json::array();
    for (const auto& bin : report.calibration.bins) {
        calibration.push_back({bin.mean_predicted, bin.observed_frequency, bin.count});
    }
    json folds = json::array();
    for (const auto& fold : report.folds) {
        folds.push_back({{"auc", fold.auc}, {"brier", fold.brier}, {"n_test", fold.n_test}});
    }
    json doc;
    doc["auc"] = report.auc;
    doc["roc"] = roc;
    doc["calibration"] = calibration;
    doc["brier"] = report.brier;
    doc["folds"] = folds;
    return doc.dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& json_text) {
    EvalReport report;
    try {
        const json doc = json::parse(json_text);
        report.auc = doc.at("auc").get<double>();
        report.brier = doc.at("brier").get<double>();
        for (const auto& point : doc.at("roc")) {
            report.roc.fpr.push_back(point.at(0).get<double>());
            report.roc.tpr.push_back(point.at(1).get<double>());
            report.roc.thresholds.push_back(point.at(2).get<double>());
        }
        report.roc.auc = report.auc;
        for (const auto& bin : doc.at("calibration")) {
            CalibrationBin parsed;
            parsed.mean_predicted = bin.at(0).get<double>();
            parsed.observed_frequency = bin.at(1).get<double>();
            parsed.count = bin.at(2).get<std::size_t>();
            report.calibration.bins.push_back(parsed);
        }
        for (const auto& fold : doc.at("folds")) {
            FoldStats stats;
            stats.auc = fold.at("auc").get<double>();
            stats.brier = fold.at("brier").get<double>();
            stats.n_test = fold.at("n_test").get<std::size_t>();
            report.folds.push_back(stats);
        }
    } catch (const json::exception& e) {
        throw InputError("InvalidReport", e.what());
    }
    return report;
}

std::string attribution_to_json(const Attribution& attribution) {
    json contributions = json::array();
    for (const auto& step : waterfall(attribution)) {
        contributions.push_back(
            {{"feature", step.feature}, {"value", step.value}, {"phi", step.phi}});
    }
    json doc;
    doc["base_value"] = attribution.base_value;
    doc["prediction"] = attribution.prediction;
    doc["units"] = "probability";
    doc["contributions"] = contributions;
    return doc.dump(2) + "\n";
}

Attribution attribution_from_json(const std::string& json_text) {
    Attribution attribution;
    try {
        const json doc = json::parse(json_text);
        attribution.base_value = doc.at("base_value").get<double>();
        attribution.prediction = doc.at("prediction").get<double>();
        for (const auto& entry : doc.at("contributions")) {
            attribution.feature_names.push_back(entry.at("feature").get<std::string>());
            attribution.target.push_back(entry.at("value").get<double>());
            attribution.phi.push_back(entry.at("phi").get<double>());
        }
    } catch (const json::exception& e) {
        throw InputError("InvalidReport", e.what());
    }
    return attribution;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("FileWrite", "cannot open " + temp);
        out << content;
        if (!out) throw InputError("FileWrite", "write failed for " + temp);
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) throw InputError("FileWrite", "rename to " + path + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("FileNotFound", path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace riskstrat
