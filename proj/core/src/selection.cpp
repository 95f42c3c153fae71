#include "printwatch/selection.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>

#include "printwatch/errors.hpp"

namespace printwatch {

std::string to_string(RankMethod m) {
    switch (m) {
        case RankMethod::InfoGain: return "info_gain";
        case RankMethod::GainRatio: return "gain_ratio";
        case RankMethod::Pearson: return "pearson";
    }
    return "unknown";
}

RankMethod rank_method_from_string(std::string_view s) {
    if (s == "info_gain") return RankMethod::InfoGain;
    if (s == "gain_ratio") return RankMethod::GainRatio;
    if (s == "pearson") return RankMethod::Pearson;
    throw ArgumentError("unknown ranking method: " + std::string(s));
}

namespace {

double entropy_bits(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

// Equal-frequency bin id per instance. Cut points sit at sorted-order
// quantile values so equal feature values always share a bin; with at most
// `bins` distinct values the bins coincide with the exact value groups.
std::vector<int> discretize(const std::vector<double>& column, int bins) {
    const std::size_t n = column.size();
    std::vector<double> sorted(column);
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> cuts;
    if (distinct.size() <= static_cast<std::size_t>(bins)) {
        cuts.assign(distinct.begin(), distinct.end());
    } else {
        for (int j = 1; j < bins; ++j) {
            cuts.push_back(sorted[j * n / bins]);
        }
    }

    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = static_cast<int>(
            std::upper_bound(cuts.begin(), cuts.end(), column[i]) - cuts.begin());
    }
    return ids;
}

struct EntropyScores {
    double info_gain = 0.0;
    double gain_ratio = 0.0;
};

EntropyScores entropy_scores(const std::vector<double>& column,
                             std::span<const Label> labels, int bins,
                             double label_entropy) {
    const std::size_t n = column.size();
    const std::vector<int> ids = discretize(column, bins);
    const int nbins = 1 + *std::max_element(ids.begin(), ids.end());

    std::vector<std::size_t> bin_total(nbins, 0);
    std::vector<std::array<std::size_t, 2>> bin_class(nbins, {0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        bin_total[ids[i]]++;
        bin_class[ids[i]][static_cast<int>(labels[i])]++;
    }

    double conditional = 0.0;
    for (int b = 0; b < nbins; ++b) {
        if (bin_total[b] == 0) continue;
        const double w = static_cast<double>(bin_total[b]) / static_cast<double>(n);
        conditional += w * entropy_bits(bin_class[b], bin_total[b]);
    }

    EntropyScores s;
    s.info_gain = std::max(0.0, label_entropy - conditional);
    const double split_entropy = entropy_bits(bin_total, n);
    s.gain_ratio = split_entropy > 0.0 ? s.info_gain / split_entropy : 0.0;
    return s;
}

double abs_pearson(const std::vector<double>& column, std::span<const Label> labels) {
    // Accumulate over value-sorted pairs so the score is bit-identical
    // under any instance shuffling.
    std::vector<std::pair<double, double>> pairs(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        pairs[i] = {column[i], static_cast<double>(labels[i])};
    }
    std::sort(pairs.begin(), pairs.end());

    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dx = x - mx;
        const double dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    const double r = sxy / std::sqrt(sxx * syy);
    return std::min(1.0, std::fabs(r));
}

} // namespace

FeatureRanking rank_features(const Dataset& ds, RankMethod method, int bins) {
    if (ds.empty()) throw ArgumentError("rank_features: empty dataset");
    if (bins < 2) throw ArgumentError("rank_features: bins must be at least 2");

    const std::vector<Label> labels = ds.labels();
    std::array<std::size_t, 2> class_counts{0, 0};
    for (Label l : labels) class_counts[static_cast<int>(l)]++;
    const double label_entropy = entropy_bits(class_counts, labels.size());

    const std::size_t d = ds.schema.size();
    FeatureRanking ranking;
    ranking.method = method;
    ranking.scores.resize(d);

    std::vector<double> column(ds.size());
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            column[i] = ds.instances[i].features[f];
        }
        switch (method) {
            case RankMethod::InfoGain:
                ranking.scores[f] = entropy_scores(column, labels, bins, label_entropy).info_gain;
                break;
            case RankMethod::GainRatio:
                ranking.scores[f] = entropy_scores(column, labels, bins, label_entropy).gain_ratio;
                break;
            case RankMethod::Pearson:
                ranking.scores[f] = abs_pearson(column, labels);
                break;
        }
    }

    ranking.order.resize(d);
    std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         if (ranking.scores[a] != ranking.scores[b]) {
                             return ranking.scores[a] > ranking.scores[b];
                         }
                         return a < b;
                     });
    return ranking;
}

std::vector<std::size_t> top_k(const FeatureRanking& r, std::size_t k) {
    if (k > r.order.size()) {
        throw ArgumentError("top_k: k (" + std::to_string(k) +
                            ") exceeds feature count (" + std::to_string(r.order.size()) + ")");
    }
    return {r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

Dataset project(const Dataset& ds, std::span<const std::size_t> indices) {
    for (std::size_t idx : indices) {
        if (idx >= ds.schema.size()) {
            throw ArgumentError("project: feature index " + std::to_string(idx) +
                                " out of range");
        }
    }
    Dataset out;
    out.schema.reserve(indices.size());
    for (std::size_t idx : indices) out.schema.push_back(ds.schema[idx]);
    out.instances.reserve(ds.size());
    for (const auto& inst : ds.instances) {
        LabeledInstance proj;
        proj.label = inst.label;
        proj.meta = inst.meta;
        proj.features.reserve(indices.size());
        for (std::size_t idx : indices) proj.features.push_back(inst.features[idx]);
        out.instances.push_back(std::move(proj));
    }
    return out;
}

std::string ranking_to_csv(const FeatureRanking& r, const std::vector<std::string>& schema) {
    std::string out = "rank,feature_name,score,method\n";
    const std::string method = to_string(r.method);
    for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
        const std::size_t f = r.order[pos];
        std::array<char, 32> buf;
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), r.scores[f]);
        out += std::to_string(pos + 1);
        out += ',';
        out += schema[f];
        out += ',';
        out.append(buf.data(), ptr);
        out += ',';
        out += method;
        out += '\n';
    }
    return out;
}

} // namespace printwatch
