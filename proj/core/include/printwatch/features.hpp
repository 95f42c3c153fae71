#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "printwatch/capture.hpp"

namespace printwatch {

inline constexpr std::size_t kFeatureCount = 75;

using FeatureVector = std::vector<double>;

/// The canonical feature order. Index 5 is "bytes_A_B_ratio", index 44 is
/// "packet_size_B_max"; stat families are emitted as avg, entropy, max,
/// median, min, stdev, sum, var.
const std::vector<std::string>& feature_names();

/// Index of `name` in the canonical order; throws ArgumentError if unknown.
std::size_t feature_index(std::string_view name);

/// Computes all 75 features of one session. Packet "size" is TCP payload
/// length; ratios with a zero denominator are 0; a direction with fewer
/// than two packets yields the empty-series statistics defaults. Every
/// entry is finite. Throws ArgumentError on an empty session.
FeatureVector extract_features(const TcpSession& session);

} // namespace printwatch
