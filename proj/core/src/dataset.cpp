#include "printwatch/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "printwatch/errors.hpp"
#include "printwatch/rng.hpp"

namespace printwatch {

std::string to_string(Label l) {
    return l == Label::Benign ? "benign" : "malicious";
}

Label label_from_string(std::string_view s) {
    if (s == "benign") return Label::Benign;
    if (s == "malicious") return Label::Malicious;
    throw ParseError("unknown label: " + std::string(s));
}

std::vector<Label> Dataset::labels() const {
    std::vector<Label> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(inst.label);
    return out;
}

namespace {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("csv: non-numeric cell at row " + std::to_string(row) +
                         ", column " + std::to_string(col) + ": '" + std::string(cell) + "'");
    }
    return v;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

} // namespace

std::string to_csv(const Dataset& ds) {
    std::string out;
    for (const auto& name : ds.schema) {
        out += name;
        out += ',';
    }
    out += "label\n";
    for (const auto& inst : ds.instances) {
        for (double v : inst.features) {
            out += format_double(v);
            out += ',';
        }
        out += to_string(inst.label);
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open csv for writing: " + path);
    out << to_csv(ds);
    if (!out) throw IoError("failed writing csv: " + path);
}

Dataset parse_csv(std::string_view text,
                  const std::optional<std::vector<std::string>>& expected_schema) {
    Dataset ds;
    std::size_t pos = 0;
    std::size_t row = 0;
    bool saw_header = false;

    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        if (line.empty()) continue;

        const auto cells = split_line(line);
        if (!saw_header) {
            if (cells.empty() || cells.back() != "label") {
                throw SchemaError("csv: header must end with a 'label' column");
            }
            for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
                ds.schema.emplace_back(cells[i]);
            }
            if (expected_schema) {
                for (const auto& want : *expected_schema) {
                    bool found = false;
                    for (const auto& have : ds.schema) {
                        if (have == want) { found = true; break; }
                    }
                    if (!found) {
                        throw SchemaError("csv: header is missing expected column '" +
                                          want + "'");
                    }
                }
                if (ds.schema != *expected_schema) {
                    throw SchemaError("csv: header does not match the expected schema "
                                      "(same names required, in order)");
                }
            }
            saw_header = true;
            ++row;
            continue;
        }

        if (cells.size() != ds.schema.size() + 1) {
            throw SchemaError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(ds.schema.size() + 1));
        }
        LabeledInstance inst;
        inst.features.reserve(ds.schema.size());
        for (std::size_t c = 0; c < ds.schema.size(); ++c) {
            inst.features.push_back(parse_double(cells[c], row, c));
        }
        inst.label = label_from_string(cells.back());
        ds.instances.push_back(std::move(inst));
        ++row;
    }

    if (!saw_header) throw SchemaError("csv: empty input, no header row");
    return ds;
}

Dataset load_csv(const std::string& path,
                 const std::optional<std::vector<std::string>>& expected_schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), expected_schema);
}

std::vector<int> make_folds(std::span<const Label> labels, int k, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (k < 2) throw ArgumentError("make_folds: k must be at least 2");
    if (static_cast<std::size_t>(k) > n) {
        throw ArgumentError("make_folds: k (" + std::to_string(k) +
                            ") exceeds instance count (" + std::to_string(n) + ")");
    }

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) {
        by_class[static_cast<int>(labels[i])].push_back(i);
    }

    Rng rng(seed);
    std::vector<int> fold(n, 0);
    // Deal each class round-robin from a rotating start so that remainders
    // land on different folds and total sizes stay within one.
    int start = 0;
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            fold[idx[j]] = static_cast<int>((start + j) % k);
        }
        start = static_cast<int>((start + idx.size()) % k);
    }
    return fold;
}

void Scaler::transform(std::span<double> features) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        features[i] = stdev[i] > 0.0 ? (features[i] - mean[i]) / stdev[i] : 0.0;
    }
}

std::vector<double> Scaler::transformed(std::span<const double> features) const {
    std::vector<double> out(features.begin(), features.end());
    transform(out);
    return out;
}

std::vector<double> Scaler::inverted(std::span<const double> features) const {
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        out[i] = stdev[i] > 0.0 ? features[i] * stdev[i] + mean[i] : mean[i];
    }
    return out;
}

Scaler fit_scaler(const Dataset& ds) {
    if (ds.empty()) throw ArgumentError("fit_scaler: empty dataset");
    const std::size_t d = ds.schema.size();
    Scaler sc;
    sc.mean.assign(d, 0.0);
    sc.stdev.assign(d, 0.0);

    for (const auto& inst : ds.instances) {
        for (std::size_t i = 0; i < d; ++i) sc.mean[i] += inst.features[i];
    }
    const double n = static_cast<double>(ds.size());
    for (double& m : sc.mean) m /= n;
    for (const auto& inst : ds.instances) {
        for (std::size_t i = 0; i < d; ++i) {
            const double dlt = inst.features[i] - sc.mean[i];
            sc.stdev[i] += dlt * dlt;
        }
    }
    for (double& s : sc.stdev) s = std::sqrt(s / n);
    return sc;
}

Dataset apply_scaler(const Scaler& sc, const Dataset& ds) {
    Dataset out;
    out.schema = ds.schema;
    out.instances = ds.instances;
    for (auto& inst : out.instances) sc.transform(inst.features);
    return out;
}

} // namespace printwatch
