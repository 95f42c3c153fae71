#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "printwatch/features.hpp"

namespace printwatch {

enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

std::string to_string(Label l);
Label label_from_string(std::string_view s);

// Session provenance carried next to the features. Never fed to learners
// and not part of the CSV interchange format.
struct InstanceMeta {
    std::string source;
    std::string endpoint_a;
    std::string endpoint_b;
    double start_time = 0.0;
};

struct LabeledInstance {
    FeatureVector features;
    Label label = Label::Benign;
    InstanceMeta meta;
};

struct Dataset {
    std::vector<std::string> schema; // feature names, full set or a projection
    std::vector<LabeledInstance> instances;

    std::size_t size() const { return instances.size(); }
    bool empty() const { return instances.empty(); }
    std::vector<Label> labels() const;
};

/// CSV: UTF-8, comma separated, header = schema names + "label", floats in
/// shortest round-trip form. Loading validates width per row; when
/// `expected_schema` is given the header must match it exactly.
std::string to_csv(const Dataset& ds);
void save_csv(const Dataset& ds, const std::string& path);
Dataset parse_csv(std::string_view text,
                  const std::optional<std::vector<std::string>>& expected_schema = {});
Dataset load_csv(const std::string& path,
                 const std::optional<std::vector<std::string>>& expected_schema = {});

/// Deterministic stratified fold assignment: returns fold id in [0, k) per
/// instance. Folds are disjoint, exhaustive, sizes differ by at most one,
/// and each fold's per-label count is within one instance of its
/// proportional share. Throws ArgumentError when k < 2 or k > n.
std::vector<int> make_folds(std::span<const Label> labels, int k, std::uint64_t seed);

// Per-feature standardization learned from a training split. Features with
// zero stdev map to 0.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stdev;

    void transform(std::span<double> features) const;
    std::vector<double> transformed(std::span<const double> features) const;
    std::vector<double> inverted(std::span<const double> features) const;
};

Scaler fit_scaler(const Dataset& ds);
Dataset apply_scaler(const Scaler& sc, const Dataset& ds);

} // namespace printwatch
