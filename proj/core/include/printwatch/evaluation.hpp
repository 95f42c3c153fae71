#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "printwatch/dataset.hpp"
#include "printwatch/learners.hpp"

namespace printwatch {

// Positive class = malicious.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    void add(Label truth, Label predicted);
};

struct RateMetrics {
    double fpr = 0.0;
    double tpr = 0.0;
    double accuracy = 0.0;
};

/// accuracy = (tp+tn)/total, fpr = fp/(fp+tn), tpr = tp/(tp+fn); rates with
/// a zero denominator are 0. Throws ArgumentError on an empty matrix.
RateMetrics metrics(const ConfusionMatrix& cm);

/// Tie-aware AUC equal to the Mann-Whitney statistic, computed by rank
/// averaging over the sorted scores. Throws ArgumentError when only one
/// label is present.
double roc_auc(std::span<const std::pair<double, Label>> scored);

struct AlgorithmResult {
    ModelKind kind = ModelKind::DecisionTreeC45;
    ConfusionMatrix cm; // aggregated across folds
    double fpr = 0.0;
    double tpr = 0.0;
    double auc = 0.0;
    double accuracy = 0.0;
    double mean_training_seconds = 0.0;
};

struct EvalReport {
    std::vector<AlgorithmResult> results;
    int folds = 0;
    std::uint64_t seed = 0;
    std::size_t instances = 0;
    std::size_t features_used = 0;
};

/// k-fold cross-validation: per kind and fold, trains on the other folds
/// and predicts the held-out one; confusion counts are aggregated over
/// folds and AUC is computed over the pooled scores. When `feature_subset`
/// is given the dataset is projected onto those columns first. Training
/// errors are rethrown annotated with the fold index.
EvalReport cross_validate(const Dataset& ds, std::span<const ModelKind> kinds, int k,
                          std::uint64_t seed,
                          const std::optional<std::vector<std::size_t>>& feature_subset = {},
                          const Hyperparams& hp = {});

/// Fixed-width text table, one row per algorithm.
std::string render_report(const EvalReport& report, bool include_timing = true);

std::string report_to_json(const EvalReport& report, bool include_timing = true);

} // namespace printwatch
