#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "printwatch/dataset.hpp"

namespace printwatch {

enum class ModelKind {
    DecisionTreeC45,
    NaiveBayes,
    KMeans,
    LinearSvm,
};

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

struct Hyperparams {
    // decision_tree_c45: binary numeric splits chosen by gain ratio among
    // candidates whose information gain reaches the floor.
    int tree_min_leaf = 2;
    double tree_gain_floor = 1e-6;

    // naive_bayes
    double nb_var_floor = 1e-9;

    // kmeans (trained on standardized features)
    int kmeans_k = 2;
    double kmeans_tol = 1e-6;
    int kmeans_max_iter = 100;

    // linear_svm (Pegasos schedule, standardized features)
    double svm_lambda = 1e-4;
    int svm_epochs = 20;
};

struct Prediction {
    Label label = Label::Benign;
    double malicious_score = 0.0; // tree/nb/kmeans in [0,1]; svm signed margin
};

namespace detail {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  // feature <= threshold
    int right = -1; // feature > threshold
    double counts[2] = {0.0, 0.0}; // training class counts at this node
};

struct TreeParams {
    std::vector<TreeNode> nodes;
};

struct NaiveBayesParams {
    double priors[2] = {0.0, 0.0};
    std::vector<double> means[2];
    std::vector<double> vars[2]; // floored population variances
};

struct KMeansParams {
    std::vector<std::vector<double>> centroids; // standardized space
    std::vector<Label> centroid_labels;
};

struct SvmParams {
    std::vector<double> weights; // standardized space
    double bias = 0.0;
};

} // namespace detail

// One trained classifier. Immutable after training; predictions are
// deterministic. Models that standardize internally carry their scaler, so
// predict always takes raw feature values in schema order.
class TrainedModel {
public:
    ModelKind kind() const { return kind_; }
    const std::vector<std::string>& schema() const { return schema_; }
    double training_seconds() const { return training_seconds_; }
    std::uint64_t seed() const { return seed_; }
    const Hyperparams& hyperparams() const { return hyperparams_; }

    /// Label plus malicious score. Ties at the decision point go to
    /// malicious. Throws ContractError on a schema length mismatch.
    Prediction predict(std::span<const double> features) const;

    /// Versioned JSON document; loading reproduces bit-identical predictions.
    std::string to_json() const;
    static TrainedModel from_json(std::string_view text);

    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);

    friend TrainedModel train(ModelKind kind, const Dataset& ds,
                              const Hyperparams& hp, std::uint64_t seed);

private:
    ModelKind kind_ = ModelKind::DecisionTreeC45;
    std::vector<std::string> schema_;
    Hyperparams hyperparams_;
    std::uint64_t seed_ = 0;
    double training_seconds_ = 0.0;
    std::optional<Scaler> scaler_; // kmeans / svm only

    detail::TreeParams tree_;
    detail::NaiveBayesParams nb_;
    detail::KMeansParams kmeans_;
    detail::SvmParams svm_;
};

/// Fits one model. Throws TrainingError on an empty dataset or when kmeans
/// has fewer instances than clusters.
TrainedModel train(ModelKind kind, const Dataset& ds, const Hyperparams& hp = {},
                   std::uint64_t seed = 0);

} // namespace printwatch
