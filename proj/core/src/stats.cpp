#include "printwatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace printwatch {

StatSummary compute_stats(std::span<const double> series) {
    StatSummary st;
    const std::size_t n = series.size();
    if (n == 0) return st;

    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0;
    for (double v : sorted) sum += v;
    st.sum = sum;
    st.avg = sum / static_cast<double>(n);
    st.min = sorted.front();
    st.max = sorted.back();
    st.median = (n % 2 == 1)
                    ? sorted[n / 2]
                    : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    // Two-pass population variance.
    double sq = 0.0;
    for (double v : sorted) {
        const double d = v - st.avg;
        sq += d * d;
    }
    st.var = sq / static_cast<double>(n);
    st.stdev = std::sqrt(st.var);

    // Entropy over runs of equal values in the sorted series.
    double h = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double p = static_cast<double>(j - i) / static_cast<double>(n);
        h -= p * std::log2(p);
        i = j;
    }
    st.entropy = h < 0.0 ? 0.0 : h;
    return st;
}

} // namespace printwatch
