#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "printwatch/dataset.hpp"

namespace printwatch {

enum class RankMethod { InfoGain, GainRatio, Pearson };

std::string to_string(RankMethod m);
RankMethod rank_method_from_string(std::string_view s);

struct FeatureRanking {
    RankMethod method = RankMethod::InfoGain;
    std::vector<double> scores;       // one per schema column
    std::vector<std::size_t> order;   // column indices, descending score,
                                      // ties broken by ascending index
};

/// Scores every feature against the label. Entropy-based methods see each
/// feature discretized into `bins` equal-frequency bins; features with at
/// most `bins` distinct values keep their exact value groups. Pearson is
/// reported as |r|. Constant features score 0 under all methods.
FeatureRanking rank_features(const Dataset& ds, RankMethod method, int bins = 10);

/// First k indices of the ranking order; throws ArgumentError when k
/// exceeds the schema size.
std::vector<std::size_t> top_k(const FeatureRanking& r, std::size_t k);

/// Restricts a dataset to the named columns, preserving instance order and
/// labels.
Dataset project(const Dataset& ds, std::span<const std::size_t> indices);

/// CSV export: rank,feature_name,score,method.
std::string ranking_to_csv(const FeatureRanking& r, const std::vector<std::string>& schema);

} // namespace printwatch
