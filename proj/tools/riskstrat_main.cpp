#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "riskstrat/errors.hpp"
#include "riskstrat/eval.hpp"
#include "riskstrat/explain.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/model.hpp"
#include "riskstrat/report.hpp"
#include "riskstrat/serialize.hpp"
#include "riskstrat/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace riskstrat;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RISKSTRAT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError("InvalidConfig", std::string("RISKSTRAT_SEED is not a number: ") + env);
        }
    }
    return 7;
}

struct Options {
    std::string input;
    std::string label_column = "RISK";
    std::string model_path;
    std::string eval_path;
    std::string out_dir = "out";
    std::string run_id = "run";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int folds = 5;
    double l2_lambda = 1.0;
    int bins = 10;
    std::size_t background_size = 128;
    std::size_t instance = 0;
    std::size_t n = 4000;
    double shift = 0.0;
    int permutations = 0;  // 0 = exact
    bool use_synth = false;
};

std::uint64_t effective_seed(const Options& opt) {
    return opt.seed_given ? opt.seed : default_seed();
}

FeatureSchema schema_for(const Options& opt) {
    FeatureSchema schema = FeatureSchema::default_schema();
    schema.label_name = opt.label_column;
    return schema;
}

TrainConfig train_config_for(const Options& opt) {
    TrainConfig config;
    config.l2_lambda = opt.l2_lambda;
    config.folds = opt.folds;
    config.seed = effective_seed(opt);
    return config;
}

Cohort load_ready_cohort(const Options& opt) {
    Cohort cohort = load_cohort(opt.input, schema_for(opt));
    return impute_missing(cohort);
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("FileWrite", "cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

int cmd_synth(const Options& opt) {
    SynthConfig config = default_replica();
    config.n = opt.n;
    config.seed = effective_seed(opt);
    config.miscalibration_shift = opt.shift;
    const SynthCohort synth = generate_cohort(config);
    ensure_out_dir(opt.out_dir);
    write_file_atomic(join(opt.out_dir, opt.run_id + "_cohort.csv"), cohort_to_csv(synth.cohort));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_truth.csv"), truth_to_csv(synth));
    std::cout << "wrote " << synth.cohort.size() << " rows to " << opt.out_dir << "\n";
    return kExitOk;
}

int cmd_train(const Options& opt) {
    const Cohort cohort = load_ready_cohort(opt);
    const DesignMatrix matrix = encode(cohort);
    const RiskModel model = train(matrix, train_config_for(opt));
    ensure_out_dir(opt.out_dir);
    const std::string path = join(opt.out_dir, opt.run_id + "_model.json");
    write_file_atomic(path, model_to_json(model));
    std::cout << "model written to " << path << " (iterations: " << model.iterations
              << ", stop: "
              << (model.stop_reason == StopReason::GradientTolerance ? "tolerance" : "max_iters")
              << ")\n";
    return kExitOk;
}

EvalReport build_eval_report(const DesignMatrix& matrix, const Options& opt) {
    const CVReport cv = cross_validate(matrix, train_config_for(opt));
    EvalReport report;
    report.auc = auc(cv.oof_predictions, cv.labels);
    report.roc = roc_points(cv.oof_predictions, cv.labels);
    report.calibration = calibration_curve(cv.oof_predictions, cv.labels, opt.bins);
    report.brier = brier_score(cv.oof_predictions, cv.labels);
    report.folds = cv.folds;
    return report;
}

int cmd_evaluate(const Options& opt) {
    const Cohort cohort = load_ready_cohort(opt);
    const DesignMatrix matrix = encode(cohort);
    const EvalReport report = build_eval_report(matrix, opt);
    ensure_out_dir(opt.out_dir);
    const std::string path = join(opt.out_dir, opt.run_id + "_eval.json");
    write_file_atomic(path, eval_report_to_json(report));
    std::cout << "AUC " << format_fixed(report.auc, 3) << ", Brier "
              << format_fixed(report.brier, 3) << " -> " << path << "\n";
    return kExitOk;
}

int cmd_explain(const Options& opt) {
    const Cohort cohort = load_ready_cohort(opt);
    const RiskModel model = model_from_json(read_file(opt.model_path));
    if (model.recipe.schema.features.size() != cohort.schema.features.size()) {
        throw InputError("SchemaMismatch", "model and cohort schemas disagree");
    }
    if (opt.instance >= cohort.size()) {
        throw InputError("IndexOutOfRange", "instance " + std::to_string(opt.instance) +
                                                " of " + std::to_string(cohort.size()));
    }
    const BackgroundSet background =
        sample_background(cohort, opt.background_size, effective_seed(opt));
    const RawRecord target = cohort.raw_record(opt.instance);
    const Attribution attribution =
        opt.permutations > 0
            ? sampled_shap(model, target, background, opt.permutations, effective_seed(opt))
            : exact_shap(model, target, background);

    ensure_out_dir(opt.out_dir);
    const std::string json_path = join(opt.out_dir, opt.run_id + "_attribution.json");
    write_file_atomic(json_path, attribution_to_json(attribution));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_waterfall.svg"),
                      render_waterfall(attribution, FigureSpec{}));
    std::cout << "instance " << opt.instance << ": f(x) = "
              << format_fixed(attribution.prediction, 3)
              << ", base = " << format_fixed(attribution.base_value, 3) << " -> " << json_path
              << "\n";
    return kExitOk;
}

int cmd_report(const Options& opt) {
    const EvalReport report = eval_report_from_json(read_file(opt.eval_path));
    ensure_out_dir(opt.out_dir);
    write_file_atomic(join(opt.out_dir, opt.run_id + "_roc.svg"),
                      render_roc(report.roc, FigureSpec{}));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_calibration.svg"),
                      render_calibration(report.calibration, FigureSpec{}));
    std::cout << "figures written to " << opt.out_dir << "\n";
    return kExitOk;
}

int cmd_pipeline(const Options& opt) {
    const std::uint64_t seed = effective_seed(opt);
    ensure_out_dir(opt.out_dir);

    Cohort cohort;
    if (opt.use_synth) {
        SynthConfig config = default_replica();
        config.n = opt.n;
        config.seed = seed;
        config.miscalibration_shift = opt.shift;
        const SynthCohort synth = generate_cohort(config);
        write_file_atomic(join(opt.out_dir, opt.run_id + "_cohort.csv"),
                          cohort_to_csv(synth.cohort));
        write_file_atomic(join(opt.out_dir, opt.run_id + "_truth.csv"), truth_to_csv(synth));
        cohort = impute_missing(synth.cohort);
    } else {
        if (opt.input.empty()) {
            throw InputError("InvalidConfig", "pipeline needs --input or --synth");
        }
        cohort = load_ready_cohort(opt);
    }

    const DesignMatrix matrix = encode(cohort);

    const EvalReport report = build_eval_report(matrix, opt);
    write_file_atomic(join(opt.out_dir, opt.run_id + "_eval.json"), eval_report_to_json(report));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_roc.svg"),
                      render_roc(report.roc, FigureSpec{}));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_calibration.svg"),
                      render_calibration(report.calibration, FigureSpec{}));

    const RiskModel model = train(matrix, train_config_for(opt));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_model.json"), model_to_json(model));

    const BackgroundSet background = sample_background(cohort, opt.background_size, seed);
    if (opt.instance >= cohort.size()) {
        throw InputError("IndexOutOfRange", "instance " + std::to_string(opt.instance) +
                                                " of " + std::to_string(cohort.size()));
    }
    const Attribution attribution =
        exact_shap(model, cohort.raw_record(opt.instance), background);
    write_file_atomic(join(opt.out_dir, opt.run_id + "_attribution.json"),
                      attribution_to_json(attribution));
    write_file_atomic(join(opt.out_dir, opt.run_id + "_waterfall.svg"),
                      render_waterfall(attribution, FigureSpec{}));

    const GlobalImportance importance = global_importance(model, cohort, background);
    write_file_atomic(join(opt.out_dir, opt.run_id + "_summary.svg"),
                      render_summary(importance, FigureSpec{}));

    const auto ranking = importance.ranking();
    std::cout << "rows: " << cohort.size() << "\n"
              << "out-of-fold AUC: " << format_fixed(report.auc, 3) << "\n"
              << "Brier score: " << format_fixed(report.brier, 3) << "\n"
              << "top features: " << importance.feature_names[ranking[0]] << " ("
              << format_fixed(importance.mean_abs_phi[ranking[0]], 4) << "), "
              << importance.feature_names[ranking[1]] << " ("
              << format_fixed(importance.mean_abs_phi[ranking[1]], 4) << ")\n"
              << "artifacts in: " << opt.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explainable risk stratification for tabular cohorts"};
    app.require_subcommand(1);

    Options opt;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "RNG seed (falls back to RISKSTRAT_SEED, then 7)")
            ->each([&](const std::string&) { opt.seed_given = true; });
    };
    auto add_common_io = [&](CLI::App* cmd) {
        cmd->add_option("--out-dir", opt.out_dir, "output directory");
        cmd->add_option("--run-id", opt.run_id, "prefix for artifact file names");
        add_seed(cmd);
    };
    auto add_data = [&](CLI::App* cmd, bool required) {
        auto* o = cmd->add_option("--input", opt.input, "cohort CSV path");
        if (required) o->required();
        cmd->add_option("--label-column", opt.label_column, "label column header");
    };
    auto add_training = [&](CLI::App* cmd) {
        cmd->add_option("--lambda", opt.l2_lambda, "L2 regularization strength");
        cmd->add_option("--folds", opt.folds, "cross-validation folds");
    };

    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic cohort");
    synth->add_option("--n", opt.n, "rows to generate");
    synth->add_option("--shift", opt.shift, "miscalibration shift applied to labels");
    add_common_io(synth);

    auto* train_cmd = app.add_subcommand("train", "fit the classifier on a cohort");
    add_data(train_cmd, true);
    add_training(train_cmd);
    add_common_io(train_cmd);

    auto* evaluate = app.add_subcommand("evaluate", "cross-validated discrimination/calibration");
    add_data(evaluate, true);
    add_training(evaluate);
    evaluate->add_option("--bins", opt.bins, "calibration bins");
    add_common_io(evaluate);

    auto* explain = app.add_subcommand("explain", "attribute one instance");
    add_data(explain, true);
    explain->add_option("--model", opt.model_path, "model JSON path")->required();
    explain->add_option("--instance", opt.instance, "row index to explain");
    explain->add_option("--background-size", opt.background_size, "background sample size");
    explain->add_option("--permutations", opt.permutations,
                        "sampling permutations (0 = exact enumeration)");
    add_common_io(explain);

    auto* report = app.add_subcommand("report", "render figures from an eval report");
    report->add_option("--eval", opt.eval_path, "eval report JSON path")->required();
    add_common_io(report);

    auto* pipeline = app.add_subcommand("pipeline", "run the whole pipeline end to end");
    add_data(pipeline, false);
    pipeline->add_flag("--synth", opt.use_synth, "use the synthetic replica cohort");
    pipeline->add_option("--n", opt.n, "synthetic rows");
    pipeline->add_option("--shift", opt.shift, "synthetic miscalibration shift");
    add_training(pipeline);
    pipeline->add_option("--bins", opt.bins, "calibration bins");
    pipeline->add_option("--instance", opt.instance, "row to explain locally");
    pipeline->add_option("--background-size", opt.background_size, "background sample size");
    add_common_io(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(opt);
        if (train_cmd->parsed()) return cmd_train(opt);
        if (evaluate->parsed()) return cmd_evaluate(opt);
        if (explain->parsed()) return cmd_explain(opt);
        if (report->parsed()) return cmd_report(opt);
        if (pipeline->parsed()) return cmd_pipeline(opt);
    } catch (const InputError& e) {
        std::cerr << "error " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error [Internal] " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
