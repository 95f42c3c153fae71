// printwatch: printer-protocol traffic analysis and intrusion detection.
//
// Subcommands: extract, synth, train, select, evaluate, detect. Every
// library error category maps to a distinct exit code and a single-line
// message on stderr.

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "printwatch/capture.hpp"
#include "printwatch/dataset.hpp"
#include "printwatch/errors.hpp"
#include "printwatch/evaluation.hpp"
#include "printwatch/features.hpp"
#include "printwatch/learners.hpp"
#include "printwatch/selection.hpp"
#include "printwatch/synthesis.hpp"

namespace pw = printwatch;

namespace {

constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;
constexpr int kExitSchema = 5;
constexpr int kExitParse = 6;
constexpr int kExitArgument = 7;
constexpr int kExitTraining = 8;
constexpr int kExitContract = 9;

// Shortest decimal form that parses back to the same double (same format
// the dataset CSV writer uses).
std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::vector<pw::TcpSession> sessions_from_pcap(const std::string& path,
                                               double idle_timeout) {
    const pw::CaptureResult cap = pw::read_pcap_file(path);
    return pw::reassemble_sessions(cap.packets, idle_timeout);
}

// ---- extract ----------------------------------------------------------------

int cmd_extract(const std::string& pcap_path, const std::string& out_csv,
                const std::optional<std::string>& label, bool append,
                double idle_timeout) {
    const auto sessions = sessions_from_pcap(pcap_path, idle_timeout);

    std::string header;
    for (const auto& name : pw::feature_names()) {
        header += name;
        header += ',';
    }
    if (label) {
        header += "label";
    } else if (!header.empty()) {
        header.pop_back();
    }

    std::string body;
    for (const auto& session : sessions) {
        const pw::FeatureVector fv = pw::extract_features(session);
        for (std::size_t i = 0; i < fv.size(); ++i) {
            if (i) body += ',';
            body += format_double(fv[i]);
        }
        if (label) {
            body += ',';
            body += *label;
        }
        body += '\n';
    }

    if (append) {
        std::ifstream existing(out_csv);
        if (!existing) throw pw::IoError("extract: cannot append, missing file " + out_csv);
        std::string first_line;
        std::getline(existing, first_line);
        if (first_line != header) {
            throw pw::SchemaError("extract: existing header does not match (" + out_csv + ")");
        }
        existing.close();
        std::ofstream out(out_csv, std::ios::app);
        if (!out) throw pw::IoError("extract: cannot open " + out_csv);
        out << body;
    } else {
        std::ofstream out(out_csv, std::ios::trunc);
        if (!out) throw pw::IoError("extract: cannot open " + out_csv);
        out << header << '\n' << body;
    }

    std::cout << "sessions: " << sessions.size() << "\n";
    return 0;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const std::optional<std::string>& config_path,
              std::optional<std::uint64_t> seed, std::optional<std::size_t> n_benign,
              std::optional<std::size_t> n_malicious, const std::string& out_csv,
              const std::string& out_pcap, const std::string& out_pcap_benign,
              const std::string& out_pcap_malicious, const std::string& manifest_path) {
    pw::SynthConfig cfg;
    if (config_path) cfg = pw::SynthConfig::load(*config_path);
    if (seed) cfg.seed = *seed;
    if (n_benign) cfg.n_benign = *n_benign;
    if (n_malicious) cfg.n_malicious = *n_malicious;
    cfg.validate();

    const bool want_pcap =
        !out_pcap.empty() || !out_pcap_benign.empty() || !out_pcap_malicious.empty();
    const pw::SynthCorpus corpus = pw::gen_corpus(cfg, want_pcap);

    if (!out_csv.empty()) pw::save_csv(corpus.dataset, out_csv);
    if (!out_pcap.empty()) pw::write_pcap_file(out_pcap, corpus.packets);
    if (!out_pcap_benign.empty()) pw::write_pcap_file(out_pcap_benign, corpus.benign_packets);
    if (!out_pcap_malicious.empty()) {
        pw::write_pcap_file(out_pcap_malicious, corpus.malicious_packets);
    }
    if (!manifest_path.empty()) {
        std::ofstream out(manifest_path, std::ios::trunc);
        if (!out) throw pw::IoError("synth: cannot open " + manifest_path);
        out << pw::corpus_manifest(cfg, corpus) << '\n';
    }

    std::cout << "sessions: " << corpus.dataset.size() << " (benign " << cfg.n_benign
              << ", malicious " << cfg.n_malicious << "), packets: " << corpus.packet_count
              << "\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const std::string& csv_path, const std::string& kind_name,
              const std::string& model_out, std::uint64_t seed,
              const pw::Hyperparams& hp) {
    const pw::ModelKind kind = pw::model_kind_from_string(kind_name);
    const pw::Dataset ds = pw::load_csv(csv_path);
    const pw::TrainedModel model = pw::train(kind, ds, hp, seed);
    model.save(model_out);
    std::printf("trained %s on %zu instances (%zu features) in %.3f s\n",
                pw::to_string(kind).c_str(), ds.size(), ds.schema.size(),
                model.training_seconds());
    return 0;
}

// ---- select -----------------------------------------------------------------

int cmd_select(const std::string& csv_path, const std::string& method_name, std::size_t k,
               const std::string& out_csv) {
    const pw::RankMethod method = pw::rank_method_from_string(method_name);
    const pw::Dataset ds = pw::load_csv(csv_path);
    const pw::FeatureRanking ranking = pw::rank_features(ds, method);
    const auto indices = pw::top_k(ranking, k);
    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
        std::printf("%zu %s %.6f\n", pos + 1, ds.schema[indices[pos]].c_str(),
                    ranking.scores[indices[pos]]);
    }
    if (!out_csv.empty()) {
        std::ofstream out(out_csv, std::ios::trunc);
        if (!out) throw pw::IoError("select: cannot open " + out_csv);
        out << pw::ranking_to_csv(ranking, ds.schema);
    }
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

int cmd_evaluate(const std::string& csv_path, const std::string& kinds_arg, int folds,
                 std::uint64_t seed, std::size_t top_k_count,
                 const std::string& method_name, const std::string& json_out,
                 bool no_timing) {
    std::vector<pw::ModelKind> kinds;
    std::stringstream ss{kinds_arg};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) kinds.push_back(pw::model_kind_from_string(item));
    }
    if (kinds.empty()) throw pw::ArgumentError("evaluate: no model kinds given");

    const pw::Dataset ds = pw::load_csv(csv_path);

    std::optional<std::vector<std::size_t>> subset;
    if (top_k_count > 0) {
        const pw::RankMethod method = pw::rank_method_from_string(method_name);
        subset = pw::top_k(pw::rank_features(ds, method), top_k_count);
    }

    const pw::EvalReport report = pw::cross_validate(ds, kinds, folds, seed, subset);
    std::cout << pw::render_report(report, !no_timing);
    if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::trunc);
        if (!out) throw pw::IoError("evaluate: cannot open " + json_out);
        out << pw::report_to_json(report, !no_timing) << '\n';
    }
    return 0;
}

// ---- detect -----------------------------------------------------------------

const std::vector<std::string>& alert_context_features() {
    // The leading discriminative features, reported with every alert.
    static const std::vector<std::string> names = {
        "packet_size_var",
        "packet_size_stdev",
        "packet_size_max",
        "packet_size_avg",
        "packet_inter_arrival_A_median",
        "packet_inter_arrival_B_median",
        "packet_size_A_max",
        "packet_size_B_max",
        "bytes_A_B_ratio",
    };
    return names;
}

int cmd_detect(const std::string& model_path, const std::string& pcap_path,
               const std::string& alerts_out, std::optional<double> threshold,
               double idle_timeout) {
    const pw::TrainedModel model = pw::TrainedModel::load(model_path);

    std::vector<std::size_t> schema_indices;
    schema_indices.reserve(model.schema().size());
    for (const auto& name : model.schema()) {
        schema_indices.push_back(pw::feature_index(name)); // throws if unknown
    }

    const auto sessions = sessions_from_pcap(pcap_path, idle_timeout);

    std::ofstream out(alerts_out, std::ios::trunc);
    if (!out) throw pw::IoError("detect: cannot open " + alerts_out);

    std::size_t alerts = 0;
    for (const auto& session : sessions) {
        const pw::FeatureVector full = pw::extract_features(session);
        std::vector<double> fv;
        fv.reserve(schema_indices.size());
        for (std::size_t idx : schema_indices) fv.push_back(full[idx]);

        const pw::Prediction pred = model.predict(fv);
        const bool alert = threshold ? pred.malicious_score > *threshold
                                     : pred.label == pw::Label::Malicious;
        if (!alert) continue;

        nlohmann::json j;
        j["endpoint_a"] = session.key.a.to_string();
        j["endpoint_b"] = session.key.b.to_string();
        j["start_time"] = static_cast<double>(session.start_us()) * 1e-6;
        j["label"] = "malicious";
        j["score"] = pred.malicious_score;
        j["model"] = pw::to_string(model.kind());
        nlohmann::json ctx;
        for (const auto& name : alert_context_features()) {
            ctx[name] = full[pw::feature_index(name)];
        }
        j["features"] = std::move(ctx);
        out << j.dump() << '\n';
        ++alerts;
    }

    std::cout << "alerts: " << alerts << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"printer-protocol traffic analysis and intrusion detection"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "pcap -> per-session feature CSV");
    std::string ex_pcap, ex_out, ex_label;
    bool ex_append = false;
    double ex_idle = pw::kDefaultIdleTimeout;
    extract->add_option("pcap", ex_pcap, "input pcap file")->required();
    extract->add_option("-o,--out", ex_out, "output CSV path")->required();
    extract->add_option("--label", ex_label, "label appended to every row");
    extract->add_flag("--append", ex_append, "append rows to an existing CSV");
    extract->add_option("--idle-timeout", ex_idle, "session idle timeout, seconds");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string sy_config, sy_csv, sy_pcap, sy_pcap_b, sy_pcap_m, sy_manifest;
    std::uint64_t sy_seed = 0;
    std::size_t sy_benign = 0, sy_malicious = 0;
    bool sy_seed_set = false, sy_benign_set = false, sy_malicious_set = false;
    synth->add_option("-c,--config", sy_config, "SynthConfig JSON file");
    synth->add_option("--seed", sy_seed, "override seed")->each([&](const std::string&) {
        sy_seed_set = true;
    });
    synth->add_option("--benign", sy_benign, "override benign session count")
        ->each([&](const std::string&) { sy_benign_set = true; });
    synth->add_option("--malicious", sy_malicious, "override malicious session count")
        ->each([&](const std::string&) { sy_malicious_set = true; });
    synth->add_option("--out-csv", sy_csv, "labeled dataset CSV");
    synth->add_option("--out-pcap", sy_pcap, "all sessions as one pcap");
    synth->add_option("--out-pcap-benign", sy_pcap_b, "benign sessions only");
    synth->add_option("--out-pcap-malicious", sy_pcap_m, "malicious sessions only");
    synth->add_option("--manifest", sy_manifest, "corpus manifest JSON");

    // train
    auto* train = app.add_subcommand("train", "fit a classifier on a labeled CSV");
    std::string tr_csv, tr_kind, tr_out;
    std::uint64_t tr_seed = 0;
    pw::Hyperparams tr_hp;
    train->add_option("csv", tr_csv, "labeled dataset CSV")->required();
    train->add_option("--kind", tr_kind,
                      "decision_tree_c45|naive_bayes|kmeans|linear_svm")
        ->required();
    train->add_option("-o,--out", tr_out, "model JSON path")->required();
    train->add_option("--seed", tr_seed, "training seed");
    train->add_option("--min-leaf", tr_hp.tree_min_leaf, "tree: minimum leaf size");
    train->add_option("--gain-floor", tr_hp.tree_gain_floor, "tree: information gain floor");
    train->add_option("--epochs", tr_hp.svm_epochs, "svm: training epochs");
    train->add_option("--lambda", tr_hp.svm_lambda, "svm: regularization");

    // select
    auto* select = app.add_subcommand("select", "rank features against the label");
    std::string se_csv, se_method = "info_gain", se_out;
    std::size_t se_k = 10;
    select->add_option("csv", se_csv, "labeled dataset CSV")->required();
    select->add_option("--method", se_method, "info_gain|gain_ratio|pearson");
    select->add_option("-k", se_k, "how many features to print");
    select->add_option("-o,--out", se_out, "full ranking CSV");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validated comparison");
    std::string ev_csv, ev_kinds = "decision_tree_c45,naive_bayes,kmeans,linear_svm";
    std::string ev_method = "info_gain", ev_json;
    int ev_folds = 5;
    std::uint64_t ev_seed = 0;
    std::size_t ev_topk = 0;
    bool ev_no_timing = false;
    evaluate->add_option("csv", ev_csv, "labeled dataset CSV")->required();
    evaluate->add_option("--kinds", ev_kinds, "comma-separated model kinds");
    evaluate->add_option("--folds", ev_folds, "fold count");
    evaluate->add_option("--seed", ev_seed, "fold assignment / training seed");
    evaluate->add_option("--top-k", ev_topk, "evaluate on the top-k ranked features");
    evaluate->add_option("--method", ev_method, "ranking method for --top-k");
    evaluate->add_option("--json", ev_json, "machine-readable report path");
    evaluate->add_flag("--no-timing", ev_no_timing,
                       "omit wall-clock training times (reproducible output)");

    // detect
    auto* detect = app.add_subcommand("detect", "classify pcap sessions, emit alerts");
    std::string de_model, de_pcap, de_out;
    double de_threshold = 0.0;
    bool de_threshold_set = false;
    double de_idle = pw::kDefaultIdleTimeout;
    detect->add_option("--model", de_model, "trained model JSON")->required();
    detect->add_option("pcap", de_pcap, "input pcap file")->required();
    detect->add_option("-o,--out", de_out, "alerts JSON Lines path")->required();
    detect->add_option("--threshold", de_threshold, "alert when score exceeds this")
        ->each([&](const std::string&) { de_threshold_set = true; });
    detect->add_option("--idle-timeout", de_idle, "session idle timeout, seconds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            return cmd_extract(ex_pcap, ex_out,
                               ex_label.empty() ? std::nullopt
                                                : std::optional<std::string>(ex_label),
                               ex_append, ex_idle);
        }
        if (synth->parsed()) {
            return cmd_synth(sy_config.empty() ? std::nullopt
                                               : std::optional<std::string>(sy_config),
                             sy_seed_set ? std::optional<std::uint64_t>(sy_seed) : std::nullopt,
                             sy_benign_set ? std::optional<std::size_t>(sy_benign)
                                           : std::nullopt,
                             sy_malicious_set ? std::optional<std::size_t>(sy_malicious)
                                              : std::nullopt,
                             sy_csv, sy_pcap, sy_pcap_b, sy_pcap_m, sy_manifest);
        }
        if (train->parsed()) return cmd_train(tr_csv, tr_kind, tr_out, tr_seed, tr_hp);
        if (select->parsed()) return cmd_select(se_csv, se_method, se_k, se_out);
        if (evaluate->parsed()) {
            return cmd_evaluate(ev_csv, ev_kinds, ev_folds, ev_seed, ev_topk, ev_method,
                                ev_json, ev_no_timing);
        }
        if (detect->parsed()) {
            return cmd_detect(de_model, de_pcap, de_out,
                              de_threshold_set ? std::optional<double>(de_threshold)
                                               : std::nullopt,
                              de_idle);
        }
    } catch (const pw::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return kExitIo;
    } catch (const pw::FormatError& e) {
        std::cerr << "error: format: " << e.what() << "\n";
        return kExitFormat;
    } catch (const pw::SchemaError& e) {
        std::cerr << "error: schema: " << e.what() << "\n";
        return kExitSchema;
    } catch (const pw::ParseError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
        return kExitParse;
    } catch (const pw::ArgumentError& e) {
        std::cerr << "error: argument: " << e.what() << "\n";
        return kExitArgument;
    } catch (const pw::TrainingError& e) {
        std::cerr << "error: training: " << e.what() << "\n";
        return kExitTraining;
    } catch (const pw::ContractError& e) {
        std::cerr << "error: contract: " << e.what() << "\n";
        return kExitContract;
    } catch (const pw::Error& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
