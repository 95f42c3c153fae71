#pragma once

#include <span>

namespace printwatch {

// Descriptive statistics of one series. Conventions:
//   - variance is the population variance (divide by n),
//   - the median of an even-length series is the mean of the two middle
//     order statistics,
//   - entropy is Shannon entropy in bits over the empirical frequency of
//     exact values,
//   - an empty series yields all zeros; a singleton yields
//     stdev = var = entropy = 0 and avg = median = min = max = sum = value.
struct StatSummary {
    double avg = 0.0;
    double median = 0.0;
    double stdev = 0.0;
    double var = 0.0;
    double min = 0.0;
    double max = 0.0;
    double sum = 0.0;
    double entropy = 0.0;
};

StatSummary compute_stats(std::span<const double> series);

} // namespace printwatch
