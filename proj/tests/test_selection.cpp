#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "printwatch/errors.hpp"
#include "printwatch/rng.hpp"
#include "printwatch/selection.hpp"
#include "printwatch/synthesis.hpp"

#include "oracles.hpp"

using namespace printwatch;

namespace {

Dataset from_columns(const std::vector<std::vector<double>>& columns,
                     const std::vector<Label>& labels) {
    Dataset ds;
    for (std::size_t f = 0; f < columns.size(); ++f) {
        ds.schema.push_back("f" + std::to_string(f));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        LabeledInstance inst;
        inst.label = labels[i];
        for (const auto& col : columns) inst.features.push_back(col[i]);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

} // namespace

TEST_CASE("perfectly aligned binary feature on a balanced label scores 1 bit") {
    std::vector<Label> labels;
    std::vector<double> col;
    for (int i = 0; i < 40; ++i) {
        const bool mal = i % 2 == 0;
        labels.push_back(mal ? Label::Malicious : Label::Benign);
        col.push_back(mal ? 1.0 : 0.0);
    }
    const Dataset ds = from_columns({col}, labels);
    CHECK(rank_features(ds, RankMethod::InfoGain).scores[0] == doctest::Approx(1.0));
    CHECK(rank_features(ds, RankMethod::GainRatio).scores[0] == doctest::Approx(1.0));
    CHECK(rank_features(ds, RankMethod::Pearson).scores[0] == doctest::Approx(1.0));
}

TEST_CASE("constant feature scores 0 under all three methods") {
    std::vector<Label> labels;
    std::vector<double> constant, useful;
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
        labels.push_back(i < 15 ? Label::Benign : Label::Malicious);
        constant.push_back(7.25);
        useful.push_back(rng.uniform());
    }
    const Dataset ds = from_columns({constant, useful}, labels);
    for (RankMethod m : {RankMethod::InfoGain, RankMethod::GainRatio, RankMethod::Pearson}) {
        CHECK(rank_features(ds, m).scores[0] == 0.0);
    }
}

TEST_CASE("single-label dataset gives zero info gain, not an error") {
    std::vector<Label> labels(10, Label::Benign);
    std::vector<double> col;
    for (int i = 0; i < 10; ++i) col.push_back(i);
    const Dataset ds = from_columns({col}, labels);
    const FeatureRanking r = rank_features(ds, RankMethod::InfoGain);
    CHECK(r.scores[0] == doctest::Approx(0.0));
}

TEST_CASE("empty dataset is an argument error") {
    Dataset ds;
    ds.schema = {"x"};
    CHECK_THROWS_AS(rank_features(ds, RankMethod::InfoGain), ArgumentError);
}

TEST_CASE("near-copy of the label has |r| >= 0.99") {
    Rng rng(41);
    std::vector<Label> labels;
    std::vector<double> col;
    for (int i = 0; i < 100; ++i) {
        const bool mal = rng.uniform() < 0.5;
        labels.push_back(mal ? Label::Malicious : Label::Benign);
        col.push_back((mal ? 1.0 : 0.0) + rng.uniform(-0.01, 0.01));
    }
    const Dataset ds = from_columns({col}, labels);
    CHECK(rank_features(ds, RankMethod::Pearson).scores[0] >= 0.99);
}

TEST_CASE("info gain matches direct entropy computation on small data") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(4, 20));
        const int n_features = static_cast<int>(rng.uniform_int(1, 4));
        std::vector<Label> labels;
        for (int i = 0; i < n; ++i) {
            labels.push_back(rng.uniform() < 0.5 ? Label::Benign : Label::Malicious);
        }
        labels[0] = Label::Benign;
        labels[n - 1] = Label::Malicious;

        std::vector<std::vector<double>> columns;
        for (int f = 0; f < n_features; ++f) {
            std::vector<double> col;
            const int distinct = static_cast<int>(rng.uniform_int(1, 4));
            std::vector<double> pool;
            for (int d = 0; d < distinct; ++d) pool.push_back(rng.uniform(-10, 10));
            for (int i = 0; i < n; ++i) col.push_back(pool[rng.index(pool.size())]);
            columns.push_back(std::move(col));
        }
        const Dataset ds = from_columns(columns, labels);
        const FeatureRanking r = rank_features(ds, RankMethod::InfoGain);
        for (int f = 0; f < n_features; ++f) {
            const double direct = oracles::direct_info_gain(columns[f], labels);
            INFO("trial ", trial, " feature ", f);
            CHECK(oracles::close_rel(r.scores[f], direct));
        }
    }
}

TEST_CASE("gain ratio stays within [0, 1] and ranking ignores instance order") {
    Rng rng(5050);
    std::vector<Label> labels;
    std::vector<std::vector<double>> columns(5);
    for (int i = 0; i < 200; ++i) {
        labels.push_back(rng.uniform() < 0.4 ? Label::Malicious : Label::Benign);
        columns[0].push_back(rng.uniform());
        columns[1].push_back(rng.log_uniform(1, 1e6));
        columns[2].push_back(std::floor(rng.uniform(0, 3)));
        columns[3].push_back(labels.back() == Label::Malicious ? rng.uniform(5, 6)
                                                               : rng.uniform(0, 1));
        columns[4].push_back(1.0);
    }
    labels[0] = Label::Benign;
    labels[1] = Label::Malicious;
    const Dataset ds = from_columns(columns, labels);

    for (RankMethod m : {RankMethod::InfoGain, RankMethod::GainRatio, RankMethod::Pearson}) {
        const FeatureRanking r = rank_features(ds, m);
        for (double s : r.scores) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0 + 1e-12);
        }
        // The label-aligned column must rank first.
        CHECK(r.order[0] == 3);

        // Shuffling instances changes nothing.
        Dataset shuffled = ds;
        Rng shuffle_rng(1);
        shuffle_rng.shuffle(shuffled.instances);
        const FeatureRanking r2 = rank_features(shuffled, m);
        CHECK(r.scores == r2.scores);
        CHECK(r.order == r2.order);
    }
}

TEST_CASE("ties in score break toward the lower feature index") {
    std::vector<Label> labels;
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
        labels.push_back(i % 2 ? Label::Benign : Label::Malicious);
        a.push_back(i % 2);
        b.push_back(i % 2); // identical column, identical score
    }
    const Dataset ds = from_columns({a, b}, labels);
    const FeatureRanking r = rank_features(ds, RankMethod::InfoGain);
    CHECK(r.scores[0] == r.scores[1]);
    CHECK(r.order[0] == 0);
    CHECK(r.order[1] == 1);
}

TEST_CASE("top_k and projection") {
    Rng rng(8);
    std::vector<Label> labels;
    std::vector<std::vector<double>> columns(4);
    for (int i = 0; i < 50; ++i) {
        labels.push_back(rng.uniform() < 0.5 ? Label::Benign : Label::Malicious);
        for (auto& col : columns) col.push_back(rng.uniform());
    }
    const Dataset ds = from_columns(columns, labels);
    const FeatureRanking r = rank_features(ds, RankMethod::Pearson);

    SUBCASE("k equal to the schema size is an identity up to column order") {
        const auto idx = top_k(r, 4);
        const Dataset proj = project(ds, idx);
        CHECK(proj.schema.size() == 4);
        CHECK(proj.size() == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(proj.instances[i].label == ds.instances[i].label);
            for (std::size_t j = 0; j < idx.size(); ++j) {
                CHECK(proj.instances[i].features[j] == ds.instances[i].features[idx[j]]);
            }
        }
    }
    SUBCASE("k beyond the schema size throws") {
        CHECK_THROWS_AS(top_k(r, 5), ArgumentError);
    }
    SUBCASE("projection keeps schema names aligned") {
        const auto idx = top_k(r, 2);
        const Dataset proj = project(ds, idx);
        CHECK(proj.schema[0] == ds.schema[idx[0]]);
        CHECK(proj.schema[1] == ds.schema[idx[1]]);
    }
}

TEST_CASE("top-10 overlap between two methods is computable and reported") {
    SynthConfig cfg;
    cfg.seed = 14;
    cfg.n_benign = 120;
    cfg.n_malicious = 90;
    const Dataset ds = gen_corpus(cfg).dataset;

    const auto by_ig = top_k(rank_features(ds, RankMethod::InfoGain), 10);
    const auto by_gr = top_k(rank_features(ds, RankMethod::GainRatio), 10);
    std::set<std::size_t> ig_set(by_ig.begin(), by_ig.end());
    std::vector<std::string> shared;
    for (std::size_t idx : by_gr) {
        if (ig_set.count(idx)) shared.push_back(ds.schema[idx]);
    }
    INFO("features in both top-10 lists: ", shared.size());
    CHECK(shared.size() <= 10);
    // Both methods rank the same entropy signal, so some overlap must exist.
    CHECK(shared.size() >= 1);
}

TEST_CASE("ranking csv export lists descending scores") {
    std::vector<Label> labels;
    std::vector<double> good, noise;
    Rng rng(77);
    for (int i = 0; i < 60; ++i) {
        labels.push_back(i % 3 ? Label::Benign : Label::Malicious);
        good.push_back(i % 3 ? 0.0 : 1.0);
        noise.push_back(rng.uniform());
    }
    const Dataset ds = from_columns({noise, good}, labels);
    const FeatureRanking r = rank_features(ds, RankMethod::InfoGain);
    const std::string csv = ranking_to_csv(r, ds.schema);
    CHECK(csv.rfind("rank,feature_name,score,method\n", 0) == 0);
    CHECK(csv.find("1,f1,") != std::string::npos);
    CHECK(csv.find("info_gain") != std::string::npos);
}
