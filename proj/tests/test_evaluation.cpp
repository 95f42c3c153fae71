#include <doctest.h>

#include <utility>
#include <vector>

#include "printwatch/errors.hpp"
#include "printwatch/evaluation.hpp"
#include "printwatch/rng.hpp"
#include "printwatch/synthesis.hpp"

#include "oracles.hpp"

using namespace printwatch;

TEST_CASE("metrics on the reference confusion matrix") {
    const ConfusionMatrix cm{.tp = 5498, .fp = 4, .tn = 8809, .fn = 2};
    const RateMetrics m = metrics(cm);
    CHECK(m.accuracy == doctest::Approx(0.99958).epsilon(1e-5));
    CHECK(m.fpr == doctest::Approx(4.54e-4).epsilon(1e-3));
    CHECK(std::fabs(m.fpr - 4.54e-4) < 1e-6);
    CHECK(m.tpr == doctest::Approx(0.99964).epsilon(1e-5));
}

TEST_CASE("metrics degenerate cases") {
    SUBCASE("all true positives") {
        const ConfusionMatrix cm{.tp = 10, .fp = 0, .tn = 0, .fn = 0};
        const RateMetrics m = metrics(cm);
        CHECK(m.accuracy == 1.0);
        CHECK(m.tpr == 1.0);
        CHECK(m.fpr == 0.0); // zero denominator maps to 0
    }
    SUBCASE("everything wrong on a balanced set") {
        const ConfusionMatrix cm{.tp = 0, .fp = 5, .tn = 0, .fn = 5};
        const RateMetrics m = metrics(cm);
        CHECK(m.accuracy == 0.0);
        CHECK(m.fpr == 1.0);
        CHECK(m.tpr == 0.0);
    }
    SUBCASE("empty matrix throws") {
        CHECK_THROWS_AS(metrics(ConfusionMatrix{}), ArgumentError);
    }
}

TEST_CASE("confusion matrix accumulates by truth and prediction") {
    ConfusionMatrix cm;
    cm.add(Label::Malicious, Label::Malicious);
    cm.add(Label::Malicious, Label::Benign);
    cm.add(Label::Benign, Label::Benign);
    cm.add(Label::Benign, Label::Malicious);
    CHECK(cm.tp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.total() == 4);
}

TEST_CASE("auc basics") {
    using S = std::vector<std::pair<double, Label>>;
    SUBCASE("perfect separation") {
        const S s{{0.9, Label::Malicious}, {0.8, Label::Malicious},
                  {0.2, Label::Benign}, {0.1, Label::Benign}};
        CHECK(roc_auc(s) == doctest::Approx(1.0));
    }
    SUBCASE("all scores equal") {
        const S s{{0.5, Label::Malicious}, {0.5, Label::Benign}, {0.5, Label::Malicious},
                  {0.5, Label::Benign}};
        CHECK(roc_auc(s) == doctest::Approx(0.5));
    }
    SUBCASE("three of four pairs ranked correctly") {
        const S s{{0.9, Label::Malicious}, {0.4, Label::Malicious},
                  {0.6, Label::Benign}, {0.1, Label::Benign}};
        CHECK(roc_auc(s) == doctest::Approx(0.75));
    }
    SUBCASE("single-label input throws") {
        const S s{{0.9, Label::Malicious}, {0.8, Label::Malicious}};
        CHECK_THROWS_AS(roc_auc(s), ArgumentError);
    }
}

TEST_CASE("auc equals the pairwise oracle and negation flips it") {
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 200));
        std::vector<std::pair<double, Label>> scored;
        for (int i = 0; i < n; ++i) {
            // Coarse scores so ties actually occur.
            const double score = std::floor(rng.uniform(0, 10)) / 10.0;
            scored.emplace_back(score, rng.uniform() < 0.5 ? Label::Malicious : Label::Benign);
        }
        scored[0].second = Label::Malicious;
        scored[n > 1 ? 1 : 0].second = Label::Benign;

        const double fast = roc_auc(scored);
        const double brute = oracles::pairwise_auc(scored);
        CHECK(std::fabs(fast - brute) <= 1e-12);

        std::vector<std::pair<double, Label>> negated(scored);
        for (auto& [s, l] : negated) s = -s;
        CHECK(std::fabs(roc_auc(negated) - (1.0 - fast)) <= 1e-12);
    }
}

namespace {

Dataset separable_dataset(int n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.schema = {"x", "noise"};
    for (int i = 0; i < n; ++i) {
        const bool mal = rng.uniform() < 0.4;
        ds.instances.push_back({{mal ? rng.uniform(10, 20) : rng.uniform(0, 5),
                                 rng.uniform(0, 1)},
                                mal ? Label::Malicious : Label::Benign,
                                {}});
    }
    ds.instances[0].label = Label::Benign;
    ds.instances[0].features[0] = 1.0;
    ds.instances[1].label = Label::Malicious;
    ds.instances[1].features[0] = 15.0;
    return ds;
}

} // namespace

TEST_CASE("cross-validation covers every instance exactly once") {
    const Dataset ds = separable_dataset(10, 5);
    const std::vector<ModelKind> kinds{ModelKind::DecisionTreeC45};
    const EvalReport report = cross_validate(ds, kinds, 5, 0);
    REQUIRE(report.results.size() == 1);
    CHECK(report.results[0].cm.total() == 10);
    CHECK(report.instances == 10);
    CHECK(report.folds == 5);
}

TEST_CASE("tree aces a threshold-separable dataset under cross-validation") {
    const Dataset ds = separable_dataset(400, 21);
    const std::vector<ModelKind> kinds{ModelKind::DecisionTreeC45};
    const EvalReport report = cross_validate(ds, kinds, 5, 0);
    CHECK(report.results[0].accuracy >= 0.99);
    CHECK(report.results[0].auc >= 0.99);
}

TEST_CASE("cross-validation is deterministic given the seed") {
    const Dataset ds = separable_dataset(120, 33);
    const std::vector<ModelKind> kinds{ModelKind::DecisionTreeC45, ModelKind::NaiveBayes,
                                       ModelKind::KMeans, ModelKind::LinearSvm};
    const EvalReport a = cross_validate(ds, kinds, 5, 9);
    const EvalReport b = cross_validate(ds, kinds, 5, 9);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        CHECK(a.results[i].accuracy == b.results[i].accuracy);
        CHECK(a.results[i].auc == b.results[i].auc);
        CHECK(a.results[i].fpr == b.results[i].fpr);
        CHECK(a.results[i].cm.tp == b.results[i].cm.tp);
    }
    CHECK(render_report(a, false) == render_report(b, false));
    CHECK(report_to_json(a, false) == report_to_json(b, false));
}

TEST_CASE("feature subset restricts the columns used") {
    const Dataset ds = separable_dataset(150, 8);
    const std::vector<ModelKind> kinds{ModelKind::DecisionTreeC45};
    const std::vector<std::size_t> subset{0};
    const EvalReport report = cross_validate(ds, kinds, 5, 0, subset);
    CHECK(report.features_used == 1);
    CHECK(report.results[0].accuracy >= 0.99);
}

TEST_CASE("training failures are annotated with the fold index") {
    // Single-label data makes kmeans fine but leaves the fold content legal;
    // instead provoke failure via k > n in a fold by using a tiny dataset
    // with kmeans_k = large.
    Dataset ds = separable_dataset(6, 4);
    Hyperparams hp;
    hp.kmeans_k = 10;
    const std::vector<ModelKind> kinds{ModelKind::KMeans};
    try {
        cross_validate(ds, kinds, 3, 0, {}, hp);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("fold") != std::string::npos);
    }
}

TEST_CASE("report renders one line per algorithm") {
    const Dataset ds = separable_dataset(60, 2);
    const std::vector<ModelKind> kinds{ModelKind::DecisionTreeC45, ModelKind::NaiveBayes};
    const EvalReport report = cross_validate(ds, kinds, 3, 1);
    const std::string table = render_report(report);
    CHECK(table.find("decision_tree_c45") != std::string::npos);
    CHECK(table.find("naive_bayes") != std::string::npos);
    CHECK(table.find("train_s") != std::string::npos);
    const std::string no_timing = render_report(report, false);
    CHECK(no_timing.find("train_s") == std::string::npos);
}
