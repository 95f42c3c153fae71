#include "printwatch/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "printwatch/errors.hpp"
#include "printwatch/selection.hpp"

namespace printwatch {

void ConfusionMatrix::add(Label truth, Label predicted) {
    if (truth == Label::Malicious) {
        predicted == Label::Malicious ? ++tp : ++fn;
    } else {
        predicted == Label::Malicious ? ++fp : ++tn;
    }
}

RateMetrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ArgumentError("metrics: empty confusion matrix");
    RateMetrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    const double neg = static_cast<double>(cm.fp + cm.tn);
    const double pos = static_cast<double>(cm.tp + cm.fn);
    m.fpr = neg > 0.0 ? static_cast<double>(cm.fp) / neg : 0.0;
    m.tpr = pos > 0.0 ? static_cast<double>(cm.tp) / pos : 0.0;
    return m;
}

double roc_auc(std::span<const std::pair<double, Label>> scored) {
    std::size_t n_mal = 0, n_ben = 0;
    for (const auto& [score, label] : scored) {
        label == Label::Malicious ? ++n_mal : ++n_ben;
    }
    if (n_mal == 0 || n_ben == 0) {
        throw ArgumentError("roc_auc: both labels must be present");
    }

    std::vector<std::pair<double, Label>> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Rank-sum with average ranks over tied scores.
    double mal_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::size_t mal_in_tie = 0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            if (sorted[j].second == Label::Malicious) ++mal_in_tie;
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // 1-based
        mal_rank_sum += avg_rank * static_cast<double>(mal_in_tie);
        i = j;
    }

    const double nm = static_cast<double>(n_mal);
    const double nb = static_cast<double>(n_ben);
    return (mal_rank_sum - nm * (nm + 1.0) / 2.0) / (nm * nb);
}

EvalReport cross_validate(const Dataset& ds, std::span<const ModelKind> kinds, int k,
                          std::uint64_t seed,
                          const std::optional<std::vector<std::size_t>>& feature_subset,
                          const Hyperparams& hp) {
    if (ds.empty()) throw ArgumentError("cross_validate: empty dataset");
    if (k < 2) throw ArgumentError("cross_validate: k must be at least 2");

    const Dataset working = feature_subset ? project(ds, *feature_subset) : ds;
    const std::vector<Label> labels = working.labels();
    const std::vector<int> fold_of = make_folds(labels, k, seed);

    EvalReport report;
    report.folds = k;
    report.seed = seed;
    report.instances = working.size();
    report.features_used = working.schema.size();

    for (ModelKind kind : kinds) {
        AlgorithmResult res;
        res.kind = kind;
        std::vector<std::pair<double, Label>> pooled_scores;
        pooled_scores.reserve(working.size());
        double train_seconds = 0.0;

        for (int fold = 0; fold < k; ++fold) {
            Dataset train_split;
            train_split.schema = working.schema;
            std::vector<std::size_t> test_rows;
            for (std::size_t i = 0; i < working.size(); ++i) {
                if (fold_of[i] == fold) {
                    test_rows.push_back(i);
                } else {
                    train_split.instances.push_back(working.instances[i]);
                }
            }

            TrainedModel model = [&] {
                try {
                    return train(kind, train_split, hp, seed);
                } catch (const Error& e) {
                    throw TrainingError("fold " + std::to_string(fold) + ": " + e.what());
                }
            }();
            train_seconds += model.training_seconds();

            for (std::size_t i : test_rows) {
                const Prediction p = model.predict(working.instances[i].features);
                res.cm.add(working.instances[i].label, p.label);
                pooled_scores.emplace_back(p.malicious_score, working.instances[i].label);
            }
        }

        const RateMetrics m = metrics(res.cm);
        res.fpr = m.fpr;
        res.tpr = m.tpr;
        res.accuracy = m.accuracy;
        res.auc = roc_auc(pooled_scores);
        res.mean_training_seconds = train_seconds / static_cast<double>(k);
        report.results.push_back(std::move(res));
    }
    return report;
}

std::string render_report(const EvalReport& report, bool include_timing) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-18s %-9s %-9s %-9s %-10s%s\n", "algorithm", "fpr",
                  "tpr", "auc", "accuracy", include_timing ? " train_s" : "");
    out += line;
    for (const auto& r : report.results) {
        if (include_timing) {
            std::snprintf(line, sizeof(line), "%-18s %-9.6f %-9.6f %-9.6f %8.4f%%  %.3f\n",
                          to_string(r.kind).c_str(), r.fpr, r.tpr, r.auc,
                          r.accuracy * 100.0, r.mean_training_seconds);
        } else {
            std::snprintf(line, sizeof(line), "%-18s %-9.6f %-9.6f %-9.6f %8.4f%%\n",
                          to_string(r.kind).c_str(), r.fpr, r.tpr, r.auc,
                          r.accuracy * 100.0);
        }
        out += line;
    }
    std::snprintf(line, sizeof(line),
                  "(%zu instances, %zu features, %d folds, seed %llu)\n", report.instances,
                  report.features_used, report.folds,
                  static_cast<unsigned long long>(report.seed));
    out += line;
    return out;
}

std::string report_to_json(const EvalReport& report, bool include_timing) {
    nlohmann::json j;
    j["folds"] = report.folds;
    j["seed"] = report.seed;
    j["instances"] = report.instances;
    j["features_used"] = report.features_used;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : report.results) {
        nlohmann::json item = {
            {"algorithm", to_string(r.kind)},
            {"fpr", r.fpr},
            {"tpr", r.tpr},
            {"auc", r.auc},
            {"accuracy", r.accuracy},
            {"confusion",
             {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"tn", r.cm.tn}, {"fn", r.cm.fn}}},
        };
        if (include_timing) item["mean_training_seconds"] = r.mean_training_seconds;
        results.push_back(std::move(item));
    }
    j["results"] = std::move(results);
    return j.dump(2);
}

} // namespace printwatch
