#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "riskstrat/errors.hpp"
#include "riskstrat/eval.hpp"
#include "riskstrat/explain.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/model.hpp"
#include "riskstrat/report.hpp"
#include "riskstrat/serialize.hpp"
#include "riskstrat/synth.hpp"

namespace py = pybind11;
using namespace riskstrat;

namespace {

// Train directly on a pre-encoded matrix; the recipe is left empty, so the
// returned model only supports encoded-row prediction.
RiskModel train_on_matrix(const std::vector<std::vector<double>>& values,
                          const std::vector<int>& labels, double l2_lambda, int max_iters) {
    DesignMatrix matrix;
    matrix.values = values;
    matrix.labels = labels;
    if (!values.empty()) {
        for (std::size_t j = 0; j < values.front().size(); ++j) {
            matrix.columns.push_back({j, ColumnType::Standardized, 0, "x" + std::to_string(j)});
        }
    }
    TrainConfig config;
    config.l2_lambda = l2_lambda;
    config.max_iters = max_iters;
    return train(matrix, config);
}

py::dict cohort_to_dict(const Cohort& cohort) {
    py::dict out;
    py::list names;
    for (const auto& f : cohort.schema.features) names.append(f.name);
    out["feature_names"] = names;
    py::list rows;
    py::list labels;
    for (const auto& row : cohort.rows) {
        py::list values;
        for (const auto& v : row.values) {
            if (v.has_value()) {
                values.append(*v);
            } else {
                values.append(py::none());
            }
        }
        rows.append(values);
        labels.append(row.label);
    }
    out["rows"] = rows;
    out["labels"] = labels;
    out["missing_counts"] = cohort.missing_counts;
    return out;
}

}  // namespace

PYBIND11_MODULE(_riskstrat, m) {
    m.doc() = "Explainable risk stratification: classifier, evaluation, Shapley attribution";

    py::register_exception<Error>(m, "RiskstratError");

    m.def("sigmoid", &sigmoid, py::arg("z"));
    m.def("auc", &auc, py::arg("scores"), py::arg("labels"),
          "Mann-Whitney AUC with half-credit ties");
    m.def("brier_score", &brier_score, py::arg("scores"), py::arg("labels"));

    m.def(
        "roc_points",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            const RocCurve curve = roc_points(scores, labels);
            return py::make_tuple(curve.fpr, curve.tpr, curve.thresholds, curve.auc);
        },
        py::arg("scores"), py::arg("labels"), "Returns (fpr, tpr, thresholds, auc)");

    m.def(
        "calibration_curve",
        [](const std::vector<double>& scores, const std::vector<int>& labels, int n_bins) {
            const CalibrationCurve curve = calibration_curve(scores, labels, n_bins);
            py::list bins;
            for (const auto& bin : curve.bins) {
                bins.append(py::make_tuple(bin.mean_predicted, bin.observed_frequency, bin.count));
            }
            return bins;
        },
        py::arg("scores"), py::arg("labels"), py::arg("n_bins") = 10,
        "Equal-width bins as (mean_predicted, observed_frequency, count)");

    py::class_<Recalibrator>(m, "Recalibrator")
        .def("apply", py::overload_cast<double>(&Recalibrator::apply, py::const_))
        .def("apply",
             py::overload_cast<const std::vector<double>&>(&Recalibrator::apply, py::const_))
        .def_readonly("platt_a", &Recalibrator::platt_a)
        .def_readonly("platt_b", &Recalibrator::platt_b)
        .def_readonly("breakpoints", &Recalibrator::breakpoints)
        .def_readonly("values", &Recalibrator::values);

    m.def("fit_platt", &fit_platt, py::arg("scores"), py::arg("labels"));
    m.def("fit_isotonic", &fit_isotonic, py::arg("scores"), py::arg("labels"));

    py::class_<RiskModel>(m, "RiskModel")
        .def_readonly("weights", &RiskModel::weights)
        .def_readonly("intercept", &RiskModel::intercept)
        .def("predict_proba",
             [](const RiskModel& model, const std::vector<double>& row) {
                 return predict_proba(model, row);
             })
        .def("predict",
             [](const RiskModel& model, const std::vector<std::vector<double>>& rows) {
                 std::vector<double> out;
                 out.reserve(rows.size());
                 for (const auto& row : rows) out.push_back(predict_proba(model, row));
                 return out;
             })
        .def("to_json", &model_to_json);

    m.def("train", &train_on_matrix, py::arg("matrix"), py::arg("labels"),
          py::arg("l2_lambda") = 1.0, py::arg("max_iters") = 500,
          "L2-regularized logistic regression on an encoded matrix");
    m.def("model_from_json", &model_from_json, py::arg("text"));

    py::class_<Attribution>(m, "Attribution")
        .def_readonly("feature_names", &Attribution::feature_names)
        .def_readonly("phi", &Attribution::phi)
        .def_readonly("base_value", &Attribution::base_value)
        .def_readonly("prediction", &Attribution::prediction)
        .def("to_json", &attribution_to_json);

    m.def(
        "exact_shap",
        [](const std::function<double(const std::vector<double>&)>& model,
           const std::vector<std::string>& feature_names, const std::vector<double>& target,
           const std::vector<std::vector<double>>& background) {
            BackgroundSet bg;
            bg.rows = background;
            return exact_shap(model, feature_names, target, bg);
        },
        py::arg("model"), py::arg("feature_names"), py::arg("target"), py::arg("background"),
        "Exact Shapley attribution of a callable model over raw records");

    m.def(
        "sampled_shap",
        [](const std::function<double(const std::vector<double>&)>& model,
           const std::vector<std::string>& feature_names, const std::vector<double>& target,
           const std::vector<std::vector<double>>& background, int n_permutations,
           std::uint64_t seed) {
            BackgroundSet bg;
            bg.rows = background;
            return sampled_shap(model, feature_names, target, bg, n_permutations, seed);
        },
        py::arg("model"), py::arg("feature_names"), py::arg("target"), py::arg("background"),
        py::arg("n_permutations"), py::arg("seed") = 0);

    m.def(
        "generate_cohort",
        [](std::size_t n, std::uint64_t seed, double miscalibration_shift) {
            SynthConfig config = default_replica();
            config.n = n;
            config.seed = seed;
            config.miscalibration_shift = miscalibration_shift;
            const SynthCohort synth = generate_cohort(config);
            py::dict out = cohort_to_dict(synth.cohort);
            out["true_probability"] = synth.true_probability;
            return out;
        },
        py::arg("n") = 4000, py::arg("seed") = 7, py::arg("miscalibration_shift") = 0.0,
        "Seeded synthetic replica cohort as plain lists");

    m.def("render_roc_svg", [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return render_roc(roc_points(scores, labels), FigureSpec{});
    });
}
