#include "printwatch/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "printwatch/errors.hpp"
#include "printwatch/rng.hpp"

namespace printwatch {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::DecisionTreeC45: return "decision_tree_c45";
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::KMeans: return "kmeans";
        case ModelKind::LinearSvm: return "linear_svm";
    }
    return "unknown";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "decision_tree_c45") return ModelKind::DecisionTreeC45;
    if (s == "naive_bayes") return ModelKind::NaiveBayes;
    if (s == "kmeans") return ModelKind::KMeans;
    if (s == "linear_svm") return ModelKind::LinearSvm;
    throw ArgumentError("unknown model kind: " + std::string(s));
}

namespace {

double entropy2(double c0, double c1) {
    const double n = c0 + c1;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : {c0, c1}) {
        if (c <= 0.0) continue;
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h;
}

// ---- decision tree ---------------------------------------------------------

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain_ratio = -1.0;
    double info_gain = 0.0;
};

SplitChoice best_split(const Dataset& ds, const std::vector<std::size_t>& rows,
                       int min_leaf, double gain_floor) {
    const std::size_t n = rows.size();
    double total[2] = {0.0, 0.0};
    for (std::size_t r : rows) total[static_cast<int>(ds.instances[r].label)]++;
    const double node_entropy = entropy2(total[0], total[1]);

    SplitChoice best;
    std::vector<std::pair<double, int>> vals(n);
    for (std::size_t f = 0; f < ds.schema.size(); ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& inst = ds.instances[rows[i]];
            vals[i] = {inst.features[f], static_cast<int>(inst.label)};
        }
        std::sort(vals.begin(), vals.end());

        double left[2] = {0.0, 0.0};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left[vals[i].second]++;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            if (nl < min_leaf || nr < min_leaf) continue;

            const double right0 = total[0] - left[0];
            const double right1 = total[1] - left[1];
            const double cond = (nl / static_cast<double>(n)) * entropy2(left[0], left[1]) +
                                (nr / static_cast<double>(n)) * entropy2(right0, right1);
            const double gain = node_entropy - cond;
            if (gain < gain_floor) continue;

            const double split_info = entropy2(nl, nr);
            if (split_info <= 0.0) continue;
            const double ratio = gain / split_info;
            // Deterministic tie-break: higher ratio, then lower feature
            // index, then lower threshold (the iteration order).
            if (ratio > best.gain_ratio + 1e-15) {
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.gain_ratio = ratio;
                best.info_gain = gain;
            }
        }
    }
    return best;
}

int grow_tree(const Dataset& ds, const std::vector<std::size_t>& rows,
              const Hyperparams& hp, detail::TreeParams& tree) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double counts[2] = {0.0, 0.0};
    for (std::size_t r : rows) counts[static_cast<int>(ds.instances[r].label)]++;
    tree.nodes[node_id].counts[0] = counts[0];
    tree.nodes[node_id].counts[1] = counts[1];

    const bool pure = counts[0] == 0.0 || counts[1] == 0.0;
    if (pure || rows.size() < 2 * static_cast<std::size_t>(hp.tree_min_leaf)) {
        return node_id;
    }

    const SplitChoice split = best_split(ds, rows, hp.tree_min_leaf, hp.tree_gain_floor);
    if (split.feature < 0) return node_id;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        if (ds.instances[r].features[split.feature] <= split.threshold) {
            left_rows.push_back(r);
        } else {
            right_rows.push_back(r);
        }
    }

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    const int left = grow_tree(ds, left_rows, hp, tree);
    tree.nodes[node_id].left = left;
    const int right = grow_tree(ds, right_rows, hp, tree);
    tree.nodes[node_id].right = right;
    return node_id;
}

// ---- kmeans ----------------------------------------------------------------

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<std::vector<double>>& points, int k, Rng& rng) {
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.index(points.size())]);

    std::vector<double> dist2(points.size(), std::numeric_limits<double>::infinity());
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            dist2[i] = std::min(dist2[i], sq_distance(points[i], centroids.back()));
            sum += dist2[i];
        }
        std::size_t pick = 0;
        if (sum > 0.0) {
            const double target = rng.uniform() * sum;
            double acc = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                acc += dist2[i];
                if (acc >= target) { pick = i; break; }
            }
        } else {
            pick = rng.index(points.size());
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

} // namespace

TrainedModel train(ModelKind kind, const Dataset& ds, const Hyperparams& hp,
                   std::uint64_t seed) {
    if (ds.empty()) throw TrainingError("train: empty dataset");
    const std::size_t d = ds.schema.size();
    const std::size_t n = ds.size();

    TrainedModel model;
    model.kind_ = kind;
    model.schema_ = ds.schema;
    model.hyperparams_ = hp;
    model.seed_ = seed;

    const auto t0 = std::chrono::steady_clock::now();

    switch (kind) {
        case ModelKind::DecisionTreeC45: {
            std::vector<std::size_t> rows(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            grow_tree(ds, rows, hp, model.tree_);
            break;
        }

        case ModelKind::NaiveBayes: {
            auto& nb = model.nb_;
            nb.means[0].assign(d, 0.0);
            nb.means[1].assign(d, 0.0);
            nb.vars[0].assign(d, 0.0);
            nb.vars[1].assign(d, 0.0);
            double counts[2] = {0.0, 0.0};
            for (const auto& inst : ds.instances) {
                const int c = static_cast<int>(inst.label);
                counts[c]++;
                for (std::size_t i = 0; i < d; ++i) nb.means[c][i] += inst.features[i];
            }
            for (int c = 0; c < 2; ++c) {
                if (counts[c] > 0) {
                    for (double& m : nb.means[c]) m /= counts[c];
                }
                nb.priors[c] = counts[c] / static_cast<double>(n);
            }
            for (const auto& inst : ds.instances) {
                const int c = static_cast<int>(inst.label);
                for (std::size_t i = 0; i < d; ++i) {
                    const double dlt = inst.features[i] - nb.means[c][i];
                    nb.vars[c][i] += dlt * dlt;
                }
            }
            for (int c = 0; c < 2; ++c) {
                for (double& v : nb.vars[c]) {
                    v = std::max(counts[c] > 0 ? v / counts[c] : 0.0, hp.nb_var_floor);
                }
            }
            break;
        }

        case ModelKind::KMeans: {
            if (n < static_cast<std::size_t>(hp.kmeans_k)) {
                throw TrainingError("kmeans: fewer instances than clusters");
            }
            model.scaler_ = fit_scaler(ds);
            std::vector<std::vector<double>> points;
            points.reserve(n);
            for (const auto& inst : ds.instances) {
                points.push_back(model.scaler_->transformed(inst.features));
            }

            Rng rng(seed);
            auto centroids = kmeanspp_init(points, hp.kmeans_k, rng);
            std::vector<int> assign(n, 0);
            for (int iter = 0; iter < hp.kmeans_max_iter; ++iter) {
                for (std::size_t i = 0; i < n; ++i) {
                    int bestc = 0;
                    double bestd = sq_distance(points[i], centroids[0]);
                    for (int c = 1; c < hp.kmeans_k; ++c) {
                        const double dd = sq_distance(points[i], centroids[c]);
                        if (dd < bestd) { bestd = dd; bestc = c; }
                    }
                    assign[i] = bestc;
                }
                double moved = 0.0;
                for (int c = 0; c < hp.kmeans_k; ++c) {
                    std::vector<double> mean(d, 0.0);
                    double cnt = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (assign[i] != c) continue;
                        cnt++;
                        for (std::size_t j = 0; j < d; ++j) mean[j] += points[i][j];
                    }
                    if (cnt == 0.0) continue; // empty cluster keeps its centroid
                    for (double& m : mean) m /= cnt;
                    moved = std::max(moved, std::sqrt(sq_distance(mean, centroids[c])));
                    centroids[c] = std::move(mean);
                }
                if (moved < hp.kmeans_tol) break;
            }

            model.kmeans_.centroids = std::move(centroids);
            model.kmeans_.centroid_labels.assign(hp.kmeans_k, Label::Benign);
            for (int c = 0; c < hp.kmeans_k; ++c) {
                double member_counts[2] = {0.0, 0.0};
                for (std::size_t i = 0; i < n; ++i) {
                    if (assign[i] == c) {
                        member_counts[static_cast<int>(ds.instances[i].label)]++;
                    }
                }
                // Ties go to malicious.
                model.kmeans_.centroid_labels[c] =
                    member_counts[1] >= member_counts[0] ? Label::Malicious : Label::Benign;
            }
            break;
        }

        case ModelKind::LinearSvm: {
            model.scaler_ = fit_scaler(ds);
            std::vector<std::vector<double>> points;
            points.reserve(n);
            for (const auto& inst : ds.instances) {
                points.push_back(model.scaler_->transformed(inst.features));
            }

            auto& svm = model.svm_;
            svm.weights.assign(d, 0.0);
            svm.bias = 0.0;

            Rng rng(seed);
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::uint64_t t = 0;
            for (int epoch = 0; epoch < hp.svm_epochs; ++epoch) {
                rng.shuffle(order);
                for (std::size_t i : order) {
                    ++t;
                    const double eta = 1.0 / (hp.svm_lambda * static_cast<double>(t));
                    const double y = ds.instances[i].label == Label::Malicious ? 1.0 : -1.0;
                    double margin = svm.bias;
                    for (std::size_t j = 0; j < d; ++j) {
                        margin += svm.weights[j] * points[i][j];
                    }
                    const double shrink = 1.0 - eta * hp.svm_lambda;
                    if (y * margin < 1.0) {
                        for (std::size_t j = 0; j < d; ++j) {
                            svm.weights[j] = shrink * svm.weights[j] + eta * y * points[i][j];
                        }
                        svm.bias += eta * y; // bias is not regularized
                    } else {
                        for (double& w : svm.weights) w *= shrink;
                    }
                }
            }
            break;
        }
    }

    model.training_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return model;
}

Prediction TrainedModel::predict(std::span<const double> features) const {
    if (features.size() != schema_.size()) {
        throw ContractError("predict: feature vector has " +
                            std::to_string(features.size()) + " entries, model expects " +
                            std::to_string(schema_.size()));
    }

    Prediction pred;
    switch (kind_) {
        case ModelKind::DecisionTreeC45: {
            const detail::TreeNode* node = &tree_.nodes[0];
            while (node->feature >= 0) {
                node = features[node->feature] <= node->threshold
                           ? &tree_.nodes[node->left]
                           : &tree_.nodes[node->right];
            }
            const double total = node->counts[0] + node->counts[1];
            pred.malicious_score = total > 0.0 ? node->counts[1] / total : 0.0;
            pred.label = pred.malicious_score >= 0.5 ? Label::Malicious : Label::Benign;
            break;
        }

        case ModelKind::NaiveBayes: {
            double logp[2];
            for (int c = 0; c < 2; ++c) {
                if (nb_.priors[c] <= 0.0) {
                    logp[c] = -std::numeric_limits<double>::infinity();
                    continue;
                }
                double lp = std::log(nb_.priors[c]);
                for (std::size_t i = 0; i < features.size(); ++i) {
                    const double var = nb_.vars[c][i];
                    const double dlt = features[i] - nb_.means[c][i];
                    lp += -0.5 * std::log(2.0 * std::numbers::pi * var) -
                          dlt * dlt / (2.0 * var);
                }
                logp[c] = lp;
            }
            if (std::isinf(logp[0]) && std::isinf(logp[1])) {
                pred.malicious_score = 0.5;
            } else {
                const double m = std::max(logp[0], logp[1]);
                const double e0 = std::exp(logp[0] - m);
                const double e1 = std::exp(logp[1] - m);
                pred.malicious_score = e1 / (e0 + e1);
            }
            pred.label = pred.malicious_score >= 0.5 ? Label::Malicious : Label::Benign;
            break;
        }

        case ModelKind::KMeans: {
            const std::vector<double> x = scaler_->transformed(features);
            double d_benign = std::numeric_limits<double>::infinity();
            double d_mal = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kmeans_.centroids.size(); ++c) {
                const double dd = std::sqrt(sq_distance(x, kmeans_.centroids[c]));
                if (kmeans_.centroid_labels[c] == Label::Benign) {
                    d_benign = std::min(d_benign, dd);
                } else {
                    d_mal = std::min(d_mal, dd);
                }
            }
            if (std::isinf(d_benign)) {
                pred.malicious_score = 1.0; // no benign centroid at all
            } else if (std::isinf(d_mal)) {
                pred.malicious_score = 0.0;
            } else if (d_benign + d_mal <= 0.0) {
                pred.malicious_score = 0.5;
            } else {
                pred.malicious_score =
                    0.5 + (d_benign - d_mal) / (2.0 * (d_benign + d_mal));
            }
            pred.label = pred.malicious_score >= 0.5 ? Label::Malicious : Label::Benign;
            break;
        }

        case ModelKind::LinearSvm: {
            const std::vector<double> x = scaler_->transformed(features);
            double margin = svm_.bias;
            for (std::size_t i = 0; i < x.size(); ++i) {
                margin += svm_.weights[i] * x[i];
            }
            pred.malicious_score = margin;
            pred.label = margin >= 0.0 ? Label::Malicious : Label::Benign;
            break;
        }
    }
    return pred;
}

// ---- serialization ---------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
    return {
        {"tree_min_leaf", hp.tree_min_leaf},
        {"tree_gain_floor", hp.tree_gain_floor},
        {"nb_var_floor", hp.nb_var_floor},
        {"kmeans_k", hp.kmeans_k},
        {"kmeans_tol", hp.kmeans_tol},
        {"kmeans_max_iter", hp.kmeans_max_iter},
        {"svm_lambda", hp.svm_lambda},
        {"svm_epochs", hp.svm_epochs},
    };
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams hp;
    hp.tree_min_leaf = j.at("tree_min_leaf").get<int>();
    hp.tree_gain_floor = j.at("tree_gain_floor").get<double>();
    hp.nb_var_floor = j.at("nb_var_floor").get<double>();
    hp.kmeans_k = j.at("kmeans_k").get<int>();
    hp.kmeans_tol = j.at("kmeans_tol").get<double>();
    hp.kmeans_max_iter = j.at("kmeans_max_iter").get<int>();
    hp.svm_lambda = j.at("svm_lambda").get<double>();
    hp.svm_epochs = j.at("svm_epochs").get<int>();
    return hp;
}

} // namespace

std::string TrainedModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = printwatch::to_string(kind_);
    j["schema"] = schema_;
    j["seed"] = seed_;
    j["training_seconds"] = training_seconds_;
    j["hyperparams"] = hyperparams_to_json(hyperparams_);

    if (scaler_) {
        j["scaler"] = {{"mean", scaler_->mean}, {"stdev", scaler_->stdev}};
    } else {
        j["scaler"] = nullptr;
    }

    nlohmann::json params;
    switch (kind_) {
        case ModelKind::DecisionTreeC45: {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : tree_.nodes) {
                nodes.push_back({{"feature", nd.feature},
                                 {"threshold", nd.threshold},
                                 {"left", nd.left},
                                 {"right", nd.right},
                                 {"counts", {nd.counts[0], nd.counts[1]}}});
            }
            params["nodes"] = std::move(nodes);
            break;
        }
        case ModelKind::NaiveBayes:
            params["priors"] = {nb_.priors[0], nb_.priors[1]};
            params["means_benign"] = nb_.means[0];
            params["means_malicious"] = nb_.means[1];
            params["vars_benign"] = nb_.vars[0];
            params["vars_malicious"] = nb_.vars[1];
            break;
        case ModelKind::KMeans: {
            params["centroids"] = kmeans_.centroids;
            nlohmann::json labels = nlohmann::json::array();
            for (Label l : kmeans_.centroid_labels) {
                labels.push_back(printwatch::to_string(l));
            }
            params["centroid_labels"] = std::move(labels);
            break;
        }
        case ModelKind::LinearSvm:
            params["weights"] = svm_.weights;
            params["bias"] = svm_.bias;
            break;
    }
    j["params"] = std::move(params);
    return j.dump(2);
}

TrainedModel TrainedModel::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: invalid json: ") + e.what());
    }

    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw SchemaError("model: unsupported format_version");
        }
        TrainedModel model;
        model.kind_ = model_kind_from_string(j.at("kind").get<std::string>());
        model.schema_ = j.at("schema").get<std::vector<std::string>>();
        model.seed_ = j.at("seed").get<std::uint64_t>();
        model.training_seconds_ = j.at("training_seconds").get<double>();
        model.hyperparams_ = hyperparams_from_json(j.at("hyperparams"));

        if (!j.at("scaler").is_null()) {
            Scaler sc;
            sc.mean = j.at("scaler").at("mean").get<std::vector<double>>();
            sc.stdev = j.at("scaler").at("stdev").get<std::vector<double>>();
            model.scaler_ = std::move(sc);
        }

        const nlohmann::json& params = j.at("params");
        switch (model.kind_) {
            case ModelKind::DecisionTreeC45:
                for (const auto& nd : params.at("nodes")) {
                    detail::TreeNode node;
                    node.feature = nd.at("feature").get<int>();
                    node.threshold = nd.at("threshold").get<double>();
                    node.left = nd.at("left").get<int>();
                    node.right = nd.at("right").get<int>();
                    node.counts[0] = nd.at("counts")[0].get<double>();
                    node.counts[1] = nd.at("counts")[1].get<double>();
                    model.tree_.nodes.push_back(node);
                }
                if (model.tree_.nodes.empty()) {
                    throw SchemaError("model: decision tree has no nodes");
                }
                break;
            case ModelKind::NaiveBayes:
                model.nb_.priors[0] = params.at("priors")[0].get<double>();
                model.nb_.priors[1] = params.at("priors")[1].get<double>();
                model.nb_.means[0] = params.at("means_benign").get<std::vector<double>>();
                model.nb_.means[1] = params.at("means_malicious").get<std::vector<double>>();
                model.nb_.vars[0] = params.at("vars_benign").get<std::vector<double>>();
                model.nb_.vars[1] = params.at("vars_malicious").get<std::vector<double>>();
                break;
            case ModelKind::KMeans:
                model.kmeans_.centroids =
                    params.at("centroids").get<std::vector<std::vector<double>>>();
                for (const auto& l : params.at("centroid_labels")) {
                    model.kmeans_.centroid_labels.push_back(
                        label_from_string(l.get<std::string>()));
                }
                break;
            case ModelKind::LinearSvm:
                model.svm_.weights = params.at("weights").get<std::vector<double>>();
                model.svm_.bias = params.at("bias").get<double>();
                break;
        }
        if ((model.kind_ == ModelKind::KMeans || model.kind_ == ModelKind::LinearSvm) &&
            !model.scaler_) {
            throw SchemaError("model: " + printwatch::to_string(model.kind_) +
                              " requires a scaler");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("model: missing or mistyped field: ") + e.what());
    }
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open model file for writing: " + path);
    out << to_json() << '\n';
    if (!out) throw IoError("failed writing model file: " + path);
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

} // namespace printwatch
