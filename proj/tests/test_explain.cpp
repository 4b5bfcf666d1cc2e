#include <cmath>

#include "doctest.h"
#include "riskstrat/errors.hpp"
#include "riskstrat/explain.hpp"
#include "riskstrat/ingest.hpp"
#include "riskstrat/rng.hpp"
#include "riskstrat/synth.hpp"

using namespace riskstrat;

namespace {

BackgroundSet background_of(std::vector<RawRecord> rows) {
    BackgroundSet background;
    background.rows = std::move(rows);
    return background;
}

const std::vector<std::string> kTwoNames{"x1", "x2"};

// Output-additive stub: f(x) = 0.3 + 0.2*x1 - 0.1*x2.
double additive_stub(const RawRecord& record) {
    return 0.3 + 0.2 * record[0] - 0.1 * record[1];
}

}  // namespace

TEST_CASE("coalition_value at the full and empty coalitions") {
    const auto background = background_of({{0.0, 0.0}, {2.0, 4.0}});
    const RawRecord target{1.0, 1.0};
    const double full = coalition_value(additive_stub, target, background, 0b11);
    const double empty = coalition_value(additive_stub, target, background, 0b00);
    CHECK(full == doctest::Approx(additive_stub(target)).epsilon(1e-15));
    CHECK(empty == doctest::Approx(0.5 * (additive_stub({0.0, 0.0}) + additive_stub({2.0, 4.0})))
                       .epsilon(1e-15));
}

TEST_CASE("coalition_value composes at the raw-feature level") {
    // single background row: v(S) equals the model on the hand-built composite
    const RawRecord target{1.0, 5.0};
    const RawRecord bg_row{-2.0, 3.0};
    const auto background = background_of({bg_row});
    const double v = coalition_value(additive_stub, target, background, 0b01);  // S = {x1}
    CHECK(v == doctest::Approx(additive_stub({1.0, 3.0})).epsilon(1e-15));
}

TEST_CASE("constant model yields zero attributions") {
    const auto constant = [](const RawRecord&) { return 0.42; };
    const auto attribution =
        exact_shap(constant, kTwoNames, {1.0, 2.0}, background_of({{0.0, 0.0}}));
    CHECK(attribution.phi[0] == 0.0);
    CHECK(attribution.phi[1] == 0.0);
    CHECK(attribution.base_value == attribution.prediction);
}

TEST_CASE("dummy feature gets exactly zero") {
    const auto ignores_second = [](const RawRecord& r) { return 1.0 / (1.0 + std::exp(-r[0])); };
    const auto attribution = exact_shap(ignores_second, kTwoNames, {1.5, 9.0},
                                        background_of({{0.0, 1.0}, {-1.0, 7.0}}));
    CHECK(attribution.phi[1] == 0.0);
}

TEST_CASE("additive stub has closed-form Shapley values") {
    const auto attribution =
        exact_shap(additive_stub, kTwoNames, {1.0, 1.0}, background_of({{0.0, 0.0}}));
    CHECK(attribution.phi[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(attribution.phi[1] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(attribution.base_value == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(attribution.prediction == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("efficiency holds on a nonlinear model") {
    const auto interaction = [](const RawRecord& r) {
        return 1.0 / (1.0 + std::exp(-(r[0] * r[1] - 0.5 * r[2])));
    };
    Rng rng(83);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RawRecord> bg;
        for (int b = 0; b < 16; ++b) bg.push_back({rng.normal(), rng.normal(), rng.normal()});
        const RawRecord target{rng.normal(), rng.normal(), rng.normal()};
        const auto attribution =
            exact_shap(interaction, {"a", "b", "c"}, target, background_of(std::move(bg)));
        double total = attribution.base_value;
        for (double phi : attribution.phi) total += phi;
        CHECK(std::abs(total - attribution.prediction) < 1e-9);
    }
}

TEST_CASE("symmetric features receive identical attributions") {
    const auto symmetric = [](const RawRecord& r) { return std::tanh(r[0] + r[1]) + 0.3 * r[2]; };
    // identical target values and identical background marginals for x1, x2
    const auto attribution = exact_shap(symmetric, {"a", "b", "c"}, {0.7, 0.7, 2.0},
                                        background_of({{0.1, 0.1, 0.0}, {-0.4, -0.4, 1.0}}));
    CHECK(attribution.phi[0] == doctest::Approx(attribution.phi[1]).epsilon(1e-12));
}

TEST_CASE("attribution is linear in the model") {
    const auto g = [](const RawRecord& r) { return std::tanh(r[0]) * r[1]; };
    const auto h = [](const RawRecord& r) { return 0.5 * r[1] - r[0] * r[0]; };
    const auto sum = [&](const RawRecord& r) { return g(r) + h(r); };
    const auto background = background_of({{0.2, -1.0}, {1.3, 0.4}, {-0.7, 2.0}});
    const RawRecord target{0.9, 1.1};
    const auto pg = exact_shap(g, kTwoNames, target, background);
    const auto ph = exact_shap(h, kTwoNames, target, background);
    const auto psum = exact_shap(sum, kTwoNames, target, background);
    for (std::size_t f = 0; f < 2; ++f) {
        CHECK(psum.phi[f] == doctest::Approx(pg.phi[f] + ph.phi[f]).epsilon(1e-9));
    }
}

TEST_CASE("linear stub attribution equals a_i (x_i - background mean)") {
    Rng rng(89);
    for (int trial = 0; trial < 20; ++trial) {
        const double a1 = rng.normal();
        const double a2 = rng.normal();
        const double c = rng.normal();
        const auto linear = [&](const RawRecord& r) { return c + a1 * r[0] + a2 * r[1]; };
        std::vector<RawRecord> bg;
        double mean1 = 0.0, mean2 = 0.0;
        for (int b = 0; b < 8; ++b) {
            bg.push_back({rng.normal(), rng.normal()});
            mean1 += bg.back()[0];
            mean2 += bg.back()[1];
        }
        mean1 /= 8.0;
        mean2 /= 8.0;
        const RawRecord target{rng.normal(), rng.normal()};
        const auto attribution = exact_shap(linear, kTwoNames, target, background_of(bg));
        CHECK(std::abs(attribution.phi[0] - a1 * (target[0] - mean1)) < 1e-9);
        CHECK(std::abs(attribution.phi[1] - a2 * (target[1] - mean2)) < 1e-9);
    }
}

TEST_CASE("exact_shap guards the enumeration limit") {
    const auto constant = [](const RawRecord&) { return 0.0; };
    std::vector<std::string> names(21, "f");
    try {
        exact_shap(constant, names, RawRecord(21, 0.0), background_of({RawRecord(21, 0.0)}));
        FAIL("expected TooManyFeatures");
    } catch (const InputError& e) {
        CHECK(e.kind() == "TooManyFeatures");
    }
}

TEST_CASE("sampled_shap with one feature is exact for any permutation count") {
    const auto f = [](const RawRecord& r) { return r[0] * r[0]; };
    const auto background = background_of({{1.0}, {3.0}});
    const auto attribution = sampled_shap(f, {"x"}, {2.0}, background, 1, 0);
    CHECK(attribution.phi[0] ==
          doctest::Approx(attribution.prediction - attribution.base_value).epsilon(1e-12));
}

TEST_CASE("sampled_shap is deterministic under the seed") {
    const auto f = [](const RawRecord& r) { return std::sin(r[0]) + r[1] * r[2]; };
    const auto background = background_of({{0.0, 1.0, 2.0}, {1.0, 0.0, -1.0}});
    const auto a = sampled_shap(f, {"a", "b", "c"}, {0.5, 0.5, 0.5}, background, 50, 123);
    const auto b = sampled_shap(f, {"a", "b", "c"}, {0.5, 0.5, 0.5}, background, 50, 123);
    CHECK(a.phi == b.phi);
}

TEST_CASE("sampled_shap closes the efficiency gap exactly") {
    const auto f = [](const RawRecord& r) { return std::exp(r[0] * r[1] * 0.3); };
    const auto background = background_of({{0.3, -0.2}, {1.2, 0.8}});
    const auto attribution = sampled_shap(f, kTwoNames, {0.9, -0.4}, background, 7, 5);
    double total = attribution.base_value;
    for (double phi : attribution.phi) total += phi;
    CHECK(std::abs(total - attribution.prediction) < 1e-12);
}

TEST_CASE("sampled_shap converges to exact_shap on the replica model") {
    const auto synth = generate_cohort([] {
        auto config = default_replica();
        config.n = 400;
        config.seed = 12;
        return config;
    }());
    const auto cohort = impute_missing(synth.cohort);
    const auto matrix = encode(cohort);
    const auto model = train(matrix, TrainConfig{});
    const auto background = sample_background(cohort, 32, 1);

    for (std::size_t i : {std::size_t{0}, std::size_t{17}, std::size_t{211}}) {
        const auto target = cohort.raw_record(i);
        const auto exact = exact_shap(model, target, background);
        const auto sampled = sampled_shap(model, target, background, 2000, 99);
        for (std::size_t f = 0; f < 5; ++f) {
            CHECK(std::abs(exact.phi[f] - sampled.phi[f]) < 0.02);
        }
    }
}

TEST_CASE("global_importance agrees with per-row exact_shap") {
    const auto synth = generate_cohort([] {
        auto config = default_replica();
        config.n = 40;
        config.seed = 3;
        return config;
    }());
    const auto cohort = impute_missing(synth.cohort);
    const auto model = train(encode(cohort), TrainConfig{});
    const auto background = sample_background(cohort, 16, 2);

    const auto importance = global_importance(model, cohort, background);
    REQUIRE(importance.phi_matrix.size() == cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto reference = exact_shap(model, cohort.raw_record(i), background);
        for (std::size_t f = 0; f < 5; ++f) {
            CHECK(std::abs(importance.phi_matrix[i][f] - reference.phi[f]) < 1e-9);
        }
    }
    for (double v : importance.mean_abs_phi) CHECK(v >= 0.0);
}

TEST_CASE("a single dominant weight dominates global importance") {
    const auto synth = generate_cohort([] {
        auto config = default_replica();
        config.n = 200;
        config.seed = 8;
        return config;
    }());
    const auto cohort = impute_missing(synth.cohort);
    auto model = train(encode(cohort), TrainConfig{});
    // overwrite the fit: only age drives the model
    for (auto& w : model.weights) w = 0.0;
    model.weights[0] = 2.0;
    model.intercept = -0.5;

    const auto background = sample_background(cohort, 32, 4);
    const auto importance = global_importance(model, cohort, background);
    const auto ranking = importance.ranking();
    CHECK(importance.feature_names[ranking[0]] == "RIDAGEYR");
    for (std::size_t f = 1; f < 5; ++f) {
        CHECK(importance.mean_abs_phi[ranking[0]] > importance.mean_abs_phi[ranking[f]]);
    }
}

TEST_CASE("waterfall orders by |phi| and closes at the prediction") {
    Attribution attribution;
    attribution.feature_names = {"a", "b", "c"};
    attribution.phi = {0.05, -0.2, 0.1};
    attribution.base_value = 0.3;
    attribution.prediction = 0.25;
    attribution.target = {1.0, 2.0, 3.0};

    const auto steps = waterfall(attribution);
    REQUIRE(steps.size() == 3);
    CHECK(steps[0].feature == "b");
    CHECK(steps[1].feature == "c");
    CHECK(steps[2].feature == "a");
    CHECK(steps[0].running_before == doctest::Approx(0.3));
    CHECK(steps[2].running_after == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("waterfall breaks |phi| ties by schema order") {
    Attribution attribution;
    attribution.feature_names = {"a", "b"};
    attribution.phi = {-0.1, 0.1};
    attribution.base_value = 0.5;
    attribution.prediction = 0.5;
    const auto steps = waterfall(attribution);
    CHECK(steps[0].feature == "a");
    CHECK(steps[1].feature == "b");
}

TEST_CASE("all-zero attribution collapses to the base value") {
    Attribution attribution;
    attribution.feature_names = {"a", "b"};
    attribution.phi = {0.0, 0.0};
    attribution.base_value = 0.4;
    attribution.prediction = 0.4;
    const auto steps = waterfall(attribution);
    for (const auto& step : steps) {
        CHECK(step.running_before == 0.4);
        CHECK(step.running_after == 0.4);
    }
}
