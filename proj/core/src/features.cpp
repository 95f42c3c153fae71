#include "printwatch/features.hpp"

#include <array>
#include <unordered_map>

#include "printwatch/errors.hpp"
#include "printwatch/stats.hpp"

namespace printwatch {

namespace {

const char* kStatSuffix[8] = {"avg", "entropy", "max", "median",
                              "min", "stdev", "sum", "var"};

std::vector<std::string> build_names() {
    std::vector<std::string> names;
    names.reserve(kFeatureCount);
    auto family = [&names](const std::string& prefix) {
        for (const char* s : kStatSuffix) names.push_back(prefix + s);
    };

    names.insert(names.end(), {"ack", "ack_A", "ack_B"});
    names.insert(names.end(), {"bytes", "bytes_A", "bytes_A_B_ratio", "bytes_B"});
    names.insert(names.end(), {"ds_field_A", "ds_field_B"});
    names.push_back("duration");
    family("packet_inter_arrival_A_");
    family("packet_inter_arrival_B_");
    family("packet_inter_arrival_");
    family("packet_size_A_");
    family("packet_size_B_");
    family("packet_size_");
    names.insert(names.end(), {"packets", "packets_A", "packets_A_B_ratio", "packets_B"});
    names.insert(names.end(), {"push", "push_A", "push_B"});
    names.insert(names.end(), {"reset", "reset_A", "reset_B"});
    names.insert(names.end(),
                 {"tcp_analysis_duplicate_ack", "tcp_analysis_keep_alive",
                  "tcp_analysis_lost_segment", "tcp_analysis_out_of_order"});
    names.insert(names.end(), {"urg", "urg_A", "urg_B"});
    return names;
}

void emit_stats(FeatureVector& out, const StatSummary& st) {
    out.push_back(st.avg);
    out.push_back(st.entropy);
    out.push_back(st.max);
    out.push_back(st.median);
    out.push_back(st.min);
    out.push_back(st.stdev);
    out.push_back(st.sum);
    out.push_back(st.var);
}

// Consecutive timestamp deltas in seconds. Timestamps carry microsecond
// resolution, so equal deltas compare exactly.
std::vector<double> inter_arrivals(const std::vector<std::int64_t>& ts) {
    std::vector<double> deltas;
    if (ts.size() < 2) return deltas;
    deltas.reserve(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        deltas.push_back(static_cast<double>(ts[i] - ts[i - 1]) * 1e-6);
    }
    return deltas;
}

} // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = build_names();
    return names;
}

std::size_t feature_index(std::string_view name) {
    static const std::unordered_map<std::string_view, std::size_t> lookup = [] {
        std::unordered_map<std::string_view, std::size_t> m;
        const auto& names = feature_names();
        for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], i);
        return m;
    }();
    auto it = lookup.find(name);
    if (it == lookup.end()) {
        throw ArgumentError("unknown feature name: " + std::string(name));
    }
    return it->second;
}

FeatureVector extract_features(const TcpSession& session) {
    if (session.packets.empty()) {
        throw ArgumentError("extract_features: session has no packets");
    }

    struct FlagCounts {
        double ack = 0, push = 0, reset = 0, urg = 0;
    };
    FlagCounts flags_all, flags_a, flags_b;
    double bytes_a = 0, bytes_b = 0;
    double packets_a = 0, packets_b = 0;
    double ds_a = 0, ds_b = 0;
    bool ds_a_set = false, ds_b_set = false;
    double dup_ack = 0, keep_alive = 0, lost_seg = 0, out_of_order = 0;

    std::vector<double> sizes_all, sizes_a, sizes_b;
    std::vector<std::int64_t> ts_all, ts_a, ts_b;
    sizes_all.reserve(session.packets.size());
    ts_all.reserve(session.packets.size());

    for (const SessionPacket& sp : session.packets) {
        const Packet& p = sp.packet;
        const bool from_a = sp.dir == Direction::AtoB;
        FlagCounts& side = from_a ? flags_a : flags_b;

        if (p.has_flag(kAck)) { flags_all.ack++; side.ack++; }
        if (p.has_flag(kPsh)) { flags_all.push++; side.push++; }
        if (p.has_flag(kRst)) { flags_all.reset++; side.reset++; }
        if (p.has_flag(kUrg)) { flags_all.urg++; side.urg++; }

        const double size = static_cast<double>(p.payload_len);
        sizes_all.push_back(size);
        ts_all.push_back(p.timestamp_us);
        if (from_a) {
            bytes_a += size;
            packets_a++;
            sizes_a.push_back(size);
            ts_a.push_back(p.timestamp_us);
            if (!ds_a_set) { ds_a = p.ds_field; ds_a_set = true; }
        } else {
            bytes_b += size;
            packets_b++;
            sizes_b.push_back(size);
            ts_b.push_back(p.timestamp_us);
            if (!ds_b_set) { ds_b = p.ds_field; ds_b_set = true; }
        }

        if (p.anomalies & kDuplicateAck) dup_ack++;
        if (p.anomalies & kKeepAlive) keep_alive++;
        if (p.anomalies & kLostSegment) lost_seg++;
        if (p.anomalies & kOutOfOrder) out_of_order++;
    }

    FeatureVector out;
    out.reserve(kFeatureCount);

    out.push_back(flags_all.ack);
    out.push_back(flags_a.ack);
    out.push_back(flags_b.ack);
    out.push_back(bytes_a + bytes_b);
    out.push_back(bytes_a);
    out.push_back(bytes_a > 0 ? bytes_b / bytes_a : 0.0);
    out.push_back(bytes_b);
    out.push_back(ds_a);
    out.push_back(ds_b);
    out.push_back(session.duration_s());
    emit_stats(out, compute_stats(inter_arrivals(ts_a)));
    emit_stats(out, compute_stats(inter_arrivals(ts_b)));
    emit_stats(out, compute_stats(inter_arrivals(ts_all)));
    emit_stats(out, compute_stats(sizes_a));
    emit_stats(out, compute_stats(sizes_b));
    emit_stats(out, compute_stats(sizes_all));
    out.push_back(packets_a + packets_b);
    out.push_back(packets_a);
    out.push_back(packets_a > 0 ? packets_b / packets_a : 0.0);
    out.push_back(packets_b);
    out.push_back(flags_all.push);
    out.push_back(flags_a.push);
    out.push_back(flags_b.push);
    out.push_back(flags_all.reset);
    out.push_back(flags_a.reset);
    out.push_back(flags_b.reset);
    out.push_back(dup_ack);
    out.push_back(keep_alive);
    out.push_back(lost_seg);
    out.push_back(out_of_order);
    out.push_back(flags_all.urg);
    out.push_back(flags_a.urg);
    out.push_back(flags_b.urg);

    return out;
}

} // namespace printwatch
