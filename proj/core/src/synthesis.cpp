#include "printwatch/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "printwatch/errors.hpp"
#include "printwatch/features.hpp"

namespace printwatch {

std::string to_string(CommandLanguage l) {
    switch (l) {
        case CommandLanguage::General: return "general";
        case CommandLanguage::Pjl: return "PJL";
        case CommandLanguage::PostScript: return "PostScript";
        case CommandLanguage::Pcl: return "PCL";
    }
    return "unknown";
}

namespace {

// Response profiles. "Ack" commands are acknowledged with a handful of
// status bytes; "query" commands return a readable report; "leak" commands
// pull stored data (files, NVRAM, captured jobs) back to the attacker.
enum class RespProfile { Ack, Query, Leak };

CommandSpec make_command(const char* name, CommandLanguage lang, RespProfile profile) {
    CommandSpec c;
    c.name = name;
    c.language = lang;
    switch (profile) {
        case RespProfile::Ack:
            c.request_min = 60;
            c.request_max = 600;
            c.response_min = 8;
            c.response_max = 48;
            c.delay_min_s = 0.05;
            c.delay_max_s = 0.4;
            break;
        case RespProfile::Query:
            c.request_min = 60;
            c.request_max = 600;
            c.response_min = 60;
            c.response_max = 1600;
            c.delay_min_s = 0.08;
            c.delay_max_s = 0.6;
            break;
        case RespProfile::Leak:
            c.request_min = 80;
            c.request_max = 700;
            c.response_min = 2000;
            c.response_max = 120000;
            c.delay_min_s = 0.15;
            c.delay_max_s = 1.5;
            break;
    }
    return c;
}

std::vector<CommandSpec> build_command_bank() {
    using L = CommandLanguage;
    using P = RespProfile;
    std::vector<CommandSpec> bank;
    bank.reserve(68);

    // General (filesystem and fuzzing commands shared by all languages).
    bank.push_back(make_command("ls", L::General, P::Query));
    bank.push_back(make_command("get", L::General, P::Leak));
    bank.push_back(make_command("find", L::General, P::Query));
    bank.push_back(make_command("cat", L::General, P::Leak));
    bank.push_back(make_command("cd", L::General, P::Ack));
    bank.push_back(make_command("pwd", L::General, P::Ack));
    bank.push_back(make_command("chvol", L::General, P::Ack));
    bank.push_back(make_command("traversal", L::General, P::Ack));
    bank.push_back(make_command("fuzz path", L::General, P::Ack));
    bank.push_back(make_command("fuzz blind", L::General, P::Ack));
    bank.push_back(make_command("mirror", L::General, P::Leak));
    bank.push_back(make_command("df", L::General, P::Query));
    bank.push_back(make_command("free", L::General, P::Query));
    bank.push_back(make_command("put", L::General, P::Ack));
    bank.push_back(make_command("append", L::General, P::Ack));
    bank.push_back(make_command("delete", L::General, P::Ack));
    bank.push_back(make_command("rename", L::General, P::Ack));
    bank.push_back(make_command("edit", L::General, P::Ack));
    bank.push_back(make_command("touch", L::General, P::Ack));
    bank.push_back(make_command("mkdir", L::General, P::Ack));
    bank.push_back(make_command("fuzz write", L::General, P::Ack));

    // PJL.
    CommandSpec id = make_command("id", L::Pjl, P::Query);
    id.request_min = 510;
    id.request_max = 546;
    id.response_min = 470;
    id.response_max = 500;
    bank.push_back(id);
    bank.push_back(make_command("version", L::Pjl, P::Ack));
    bank.push_back(make_command("printenv", L::Pjl, P::Query));
    bank.push_back(make_command("env", L::Pjl, P::Query));
    bank.push_back(make_command("nvramp dump", L::Pjl, P::Leak));
    bank.push_back(make_command("nvramp read", L::Pjl, P::Query));
    bank.push_back(make_command("info \"xyz\"", L::Pjl, P::Query));
    bank.push_back(make_command("restart", L::Pjl, P::Ack));
    bank.push_back(make_command("status", L::Pjl, P::Ack));
    bank.push_back(make_command("pagecount", L::Pjl, P::Ack));
    bank.push_back(make_command("set", L::Pjl, P::Ack));
    bank.push_back(make_command("display", L::Pjl, P::Ack));
    bank.push_back(make_command("offline", L::Pjl, P::Ack));
    bank.push_back(make_command("reset", L::Pjl, P::Ack));
    bank.push_back(make_command("selftest", L::Pjl, P::Ack));
    bank.push_back(make_command("flood", L::Pjl, P::Ack));
    bank.push_back(make_command("lock", L::Pjl, P::Ack));
    bank.push_back(make_command("unlock", L::Pjl, P::Ack));
    bank.push_back(make_command("hold", L::Pjl, P::Ack));
    bank.push_back(make_command("nvramp write", L::Pjl, P::Ack));

    // PostScript.
    bank.push_back(make_command("id", L::PostScript, P::Ack));
    bank.push_back(make_command("version", L::PostScript, P::Ack));
    bank.push_back(make_command("devices", L::PostScript, P::Query));
    bank.push_back(make_command("uptime", L::PostScript, P::Ack));
    bank.push_back(make_command("date", L::PostScript, P::Ack));
    bank.push_back(make_command("pagecount", L::PostScript, P::Ack));
    bank.push_back(make_command("known", L::PostScript, P::Ack));
    bank.push_back(make_command("search", L::PostScript, P::Query));
    bank.push_back(make_command("dicts", L::PostScript, P::Query));
    bank.push_back(make_command("resource", L::PostScript, P::Query));
    bank.push_back(make_command("dump", L::PostScript, P::Leak));
    bank.push_back(make_command("restart", L::PostScript, P::Ack));
    bank.push_back(make_command("overlay", L::PostScript, P::Ack));
    bank.push_back(make_command("cross", L::PostScript, P::Ack));
    bank.push_back(make_command("replace", L::PostScript, P::Ack));
    bank.push_back(make_command("capture", L::PostScript, P::Leak));
    bank.push_back(make_command("hold", L::PostScript, P::Ack));
    bank.push_back(make_command("set", L::PostScript, P::Ack));
    bank.push_back(make_command("lock", L::PostScript, P::Ack));
    bank.push_back(make_command("unlock", L::PostScript, P::Ack));
    bank.push_back(make_command("reset", L::PostScript, P::Ack));
    bank.push_back(make_command("config", L::PostScript, P::Ack));

    // PCL.
    bank.push_back(make_command("info fonts", L::Pcl, P::Query));
    bank.push_back(make_command("info macros", L::Pcl, P::Query));
    bank.push_back(make_command("info patterns", L::Pcl, P::Query));
    bank.push_back(make_command("info symbols", L::Pcl, P::Query));
    bank.push_back(make_command("info extended", L::Pcl, P::Query));

    return bank;
}

} // namespace

const std::vector<CommandSpec>& command_bank() {
    static const std::vector<CommandSpec> bank = build_command_bank();
    return bank;
}

void SynthConfig::validate() const {
    if (commands_per_session[0] < 1 || commands_per_session[1] > 20 ||
        commands_per_session[0] > commands_per_session[1]) {
        throw ArgumentError("synth: commands_per_session must stay within [1, 20]");
    }
    if (sessions_per_printer[0] < 1 ||
        sessions_per_printer[0] > sessions_per_printer[1]) {
        throw ArgumentError("synth: sessions_per_printer range is invalid");
    }
    if (printer_count < 1 || client_count < 1 || attacker_count < 1) {
        throw ArgumentError("synth: endpoint pools must not be empty");
    }
    const double weights[4] = {weight_print, weight_query, weight_download,
                               weight_printer_initiated};
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ArgumentError("synth: benign weights must be non-negative");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ArgumentError("synth: benign weights must sum to 1");
    }
    if (job_bytes_min < 400.0 || job_bytes_max < job_bytes_min) {
        throw ArgumentError("synth: job size range is invalid (minimum 400 bytes)");
    }
    if (automated_fraction < 0.0 || automated_fraction > 1.0) {
        throw ArgumentError("synth: automated_fraction must lie in [0, 1]");
    }
    if (anomaly_injection_rate < 0.0 || anomaly_injection_rate > 1.0) {
        throw ArgumentError("synth: anomaly_injection_rate must lie in [0, 1]");
    }
}

std::string SynthConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["n_benign"] = n_benign;
    j["n_malicious"] = n_malicious;
    j["commands_per_session"] = commands_per_session;
    j["sessions_per_printer"] = sessions_per_printer;
    j["printer_count"] = printer_count;
    j["client_count"] = client_count;
    j["attacker_count"] = attacker_count;
    j["benign"] = {
        {"job_bytes_min", job_bytes_min},
        {"job_bytes_max", job_bytes_max},
        {"weight_print", weight_print},
        {"weight_query", weight_query},
        {"weight_download", weight_download},
        {"weight_printer_initiated", weight_printer_initiated},
    };
    j["malicious"] = {
        {"automated_fraction", automated_fraction},
        {"automated_gap_s", automated_gap_s},
        {"manual_gap_s", manual_gap_s},
    };
    j["randomize"] = {
        {"command_order", randomize_command_order},
        {"session_grouping", randomize_session_grouping},
        {"timing", randomize_timing},
    };
    j["anomaly_injection_rate"] = anomaly_injection_rate;
    return j.dump(2);
}

SynthConfig SynthConfig::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth config: invalid json: ") + e.what());
    }
    SynthConfig cfg;
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_benign = j.value("n_benign", cfg.n_benign);
        cfg.n_malicious = j.value("n_malicious", cfg.n_malicious);
        if (j.contains("commands_per_session")) {
            cfg.commands_per_session = j.at("commands_per_session").get<std::array<int, 2>>();
        }
        if (j.contains("sessions_per_printer")) {
            cfg.sessions_per_printer = j.at("sessions_per_printer").get<std::array<int, 2>>();
        }
        cfg.printer_count = j.value("printer_count", cfg.printer_count);
        cfg.client_count = j.value("client_count", cfg.client_count);
        cfg.attacker_count = j.value("attacker_count", cfg.attacker_count);
        if (j.contains("benign")) {
            const auto& b = j.at("benign");
            cfg.job_bytes_min = b.value("job_bytes_min", cfg.job_bytes_min);
            cfg.job_bytes_max = b.value("job_bytes_max", cfg.job_bytes_max);
            cfg.weight_print = b.value("weight_print", cfg.weight_print);
            cfg.weight_query = b.value("weight_query", cfg.weight_query);
            cfg.weight_download = b.value("weight_download", cfg.weight_download);
            cfg.weight_printer_initiated =
                b.value("weight_printer_initiated", cfg.weight_printer_initiated);
        }
        if (j.contains("malicious")) {
            const auto& m = j.at("malicious");
            cfg.automated_fraction = m.value("automated_fraction", cfg.automated_fraction);
            if (m.contains("automated_gap_s")) {
                cfg.automated_gap_s = m.at("automated_gap_s").get<std::array<double, 2>>();
            }
            if (m.contains("manual_gap_s")) {
                cfg.manual_gap_s = m.at("manual_gap_s").get<std::array<double, 2>>();
            }
        }
        if (j.contains("randomize")) {
            const auto& r = j.at("randomize");
            cfg.randomize_command_order = r.value("command_order", cfg.randomize_command_order);
            cfg.randomize_session_grouping =
                r.value("session_grouping", cfg.randomize_session_grouping);
            cfg.randomize_timing = r.value("timing", cfg.randomize_timing);
        }
        cfg.anomaly_injection_rate =
            j.value("anomaly_injection_rate", cfg.anomaly_injection_rate);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth config: mistyped field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SynthConfig SynthConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

namespace {

constexpr std::int64_t kCorpusEpochUs = 1464739200LL * 1000000LL;
constexpr std::uint32_t kMss = 1448;
constexpr std::uint16_t kRawPrintPort = 9100;

std::uint32_t ipv4(int a, int b, int c, int d) {
    return (static_cast<std::uint32_t>(a) << 24) | (static_cast<std::uint32_t>(b) << 16) |
           (static_cast<std::uint32_t>(c) << 8) | static_cast<std::uint32_t>(d);
}

Endpoint printer_endpoint(const SynthConfig& cfg, Rng& rng) {
    return {ipv4(10, 0, 0, 10 + static_cast<int>(rng.index(cfg.printer_count))),
            kRawPrintPort};
}

// Assembles one idealized TCP conversation: correct handshake, sequence and
// acknowledgment numbers, strictly increasing microsecond timestamps.
class SessionBuilder {
public:
    SessionBuilder(Endpoint initiator, Endpoint responder, std::int64_t start_us, Rng& rng)
        : ep_{initiator, responder}, cursor_us_(start_us) {
        // Keep initial sequence numbers below 2^31 so that idealized
        // sessions never wrap the 32-bit sequence space.
        seq_[0] = static_cast<std::uint32_t>(rng.next_u64() & 0x3fffffffu);
        seq_[1] = static_cast<std::uint32_t>(rng.next_u64() & 0x3fffffffu);
    }

    void handshake(double d1_s, double d2_s) {
        push(0, kSyn, 0, 0.0, false);
        push(1, kSyn | kAck, 0, d1_s, true);
        push(0, kAck, 0, d2_s, true);
    }

    // Application payload, chunked at the MSS; PSH on every data packet.
    void send(int side, std::uint32_t bytes, double first_delay_s, double chunk_gap_s) {
        double delay = first_delay_s;
        while (bytes > 0) {
            const std::uint32_t chunk = std::min(bytes, kMss);
            push(side, kPsh | kAck, chunk, delay, true);
            bytes -= chunk;
            delay = chunk_gap_s;
        }
    }

    // Like send(), but the peer acknowledges every second chunk.
    void send_acked(int side, std::uint32_t bytes, double first_delay_s,
                    double chunk_gap_s, double ack_delay_s) {
        double delay = first_delay_s;
        int since_ack = 0;
        while (bytes > 0) {
            const std::uint32_t chunk = std::min(bytes, kMss);
            push(side, kPsh | kAck, chunk, delay, true);
            bytes -= chunk;
            delay = chunk_gap_s;
            if (++since_ack == 2 && bytes > 0) {
                push(1 - side, kAck, 0, ack_delay_s, true);
                since_ack = 0;
                delay = chunk_gap_s;
            }
        }
        push(1 - side, kAck, 0, ack_delay_s, true);
    }

    void pure_ack(int side, double delay_s) { push(side, kAck, 0, delay_s, true); }

    // Side `closer` sends FIN first; four-packet teardown.
    void teardown(int closer, double gap_s) {
        push(closer, kFin | kAck, 0, gap_s, true);
        push(1 - closer, kAck, 0, gap_s * 0.5, true);
        push(1 - closer, kFin | kAck, 0, gap_s * 0.5, true);
        push(closer, kAck, 0, gap_s * 0.5, true);
    }

    std::vector<Packet>& packets() { return packets_; }
    std::int64_t cursor_us() const { return cursor_us_; }

private:
    void push(int side, std::uint8_t flags, std::uint32_t payload, double delay_s,
              bool with_ack_number) {
        cursor_us_ += std::max<std::int64_t>(1, std::llround(delay_s * 1e6));
        Packet p;
        p.timestamp_us = cursor_us_;
        p.src = ep_[side];
        p.dst = ep_[1 - side];
        p.tcp_flags = flags;
        p.payload_len = payload;
        p.wire_len = 54 + payload; // Ethernet + IPv4 + TCP headers, no options
        p.ds_field = 0;
        p.seq = seq_[side];
        p.ack = with_ack_number ? seq_[1 - side] : 0;
        packets_.push_back(p);

        seq_[side] += payload;
        if (flags & (kSyn | kFin)) seq_[side] += 1;
    }

    Endpoint ep_[2];
    std::vector<Packet> packets_;
    std::int64_t cursor_us_;
    std::uint32_t seq_[2] = {0, 0};
};

// Uniform draw honoring the timing toggle: fixed midpoint when timing
// randomization is off.
double draw_gap(const SynthConfig& cfg, Rng& rng, double lo, double hi) {
    if (!cfg.randomize_timing) return 0.5 * (lo + hi);
    return rng.uniform(lo, hi);
}

enum class BenignKind { Print, Query, Download, PrinterInitiated };

BenignKind draw_benign_kind(const SynthConfig& cfg, Rng& rng) {
    const double u = rng.uniform();
    if (u < cfg.weight_print) return BenignKind::Print;
    if (u < cfg.weight_print + cfg.weight_query) return BenignKind::Query;
    if (u < cfg.weight_print + cfg.weight_query + cfg.weight_download) {
        return BenignKind::Download;
    }
    return BenignKind::PrinterInitiated;
}

const char* to_string(BenignKind k) {
    switch (k) {
        case BenignKind::Print: return "print_job";
        case BenignKind::Query: return "status_query";
        case BenignKind::Download: return "download";
        case BenignKind::PrinterInitiated: return "printer_initiated";
    }
    return "unknown";
}

struct SessionPlan {
    std::int64_t start_us = kCorpusEpochUs;
    Endpoint client;   // initiator unless the kind says otherwise
    Endpoint printer;  // raw-9100 service endpoint
    Endpoint attacker; // malicious initiator
};

SessionPlan default_plan(const SynthConfig& cfg, Rng& rng) {
    SessionPlan plan;
    const std::uint16_t port = static_cast<std::uint16_t>(10000 + rng.index(50000));
    plan.client = {ipv4(10, 0, 1, 1 + static_cast<int>(rng.index(cfg.client_count))), port};
    plan.attacker = {ipv4(10, 0, 3, 1 + static_cast<int>(rng.index(cfg.attacker_count))),
                     port};
    plan.printer = printer_endpoint(cfg, rng);
    return plan;
}

std::vector<Packet> build_benign_packets(const SynthConfig& cfg, Rng& rng,
                                         const SessionPlan& plan, BenignKind kind) {
    const double hs1 = draw_gap(cfg, rng, 0.0002, 0.002);
    const double hs2 = draw_gap(cfg, rng, 0.0002, 0.002);

    if (kind == BenignKind::PrinterInitiated) {
        // The printer calls home: alert bursts toward a management service.
        Endpoint printer_src = {plan.printer.addr, plan.client.port};
        Endpoint server = {ipv4(10, 0, 2, 1), 443};
        SessionBuilder sb(printer_src, server, plan.start_us, rng);
        sb.handshake(hs1, hs2);
        const int alerts = static_cast<int>(rng.uniform_int(1, 3));
        for (int i = 0; i < alerts; ++i) {
            const auto alert = static_cast<std::uint32_t>(rng.uniform_int(300, 1448));
            sb.send(0, alert, draw_gap(cfg, rng, 0.002, 0.03),
                    draw_gap(cfg, rng, 0.0001, 0.0006));
            sb.pure_ack(1, draw_gap(cfg, rng, 0.0003, 0.002));
            if (rng.uniform() < 0.5) {
                sb.send(1, static_cast<std::uint32_t>(rng.uniform_int(16, 40)),
                        draw_gap(cfg, rng, 0.0005, 0.004),
                        draw_gap(cfg, rng, 0.0001, 0.0006));
            }
        }
        sb.teardown(0, draw_gap(cfg, rng, 0.0005, 0.003));
        return std::move(sb.packets());
    }

    SessionBuilder sb(plan.client, plan.printer, plan.start_us, rng);
    sb.handshake(hs1, hs2);

    switch (kind) {
        case BenignKind::Print: {
            const auto job = static_cast<std::uint32_t>(
                std::llround(rng.log_uniform(cfg.job_bytes_min, cfg.job_bytes_max)));
            sb.send_acked(0, job, draw_gap(cfg, rng, 0.0003, 0.002),
                          draw_gap(cfg, rng, 0.00008, 0.0006),
                          draw_gap(cfg, rng, 0.0003, 0.0025));
            if (rng.uniform() < 0.85) {
                // Job-done status message, a few dozen bytes at most.
                sb.send(1, static_cast<std::uint32_t>(rng.uniform_int(20, 49)),
                        draw_gap(cfg, rng, 0.004, 0.04),
                        draw_gap(cfg, rng, 0.0001, 0.0006));
                sb.pure_ack(0, draw_gap(cfg, rng, 0.0002, 0.001));
            }
            break;
        }
        case BenignKind::Query: {
            const int exchanges = rng.uniform() < 0.3 ? 2 : 1;
            for (int i = 0; i < exchanges; ++i) {
                const auto q = static_cast<std::uint32_t>(rng.uniform_int(40, 120));
                const double frac = rng.uniform(0.50, 1.05);
                const auto r = std::clamp<std::uint32_t>(
                    static_cast<std::uint32_t>(std::llround(q * frac)), 16, 49);
                sb.send(0, q, draw_gap(cfg, rng, 0.0003, 0.002),
                        draw_gap(cfg, rng, 0.0001, 0.0006));
                sb.send(1, r, draw_gap(cfg, rng, 0.0008, 0.012),
                        draw_gap(cfg, rng, 0.0001, 0.0006));
                sb.pure_ack(0, draw_gap(cfg, rng, 0.0002, 0.001));
            }
            break;
        }
        case BenignKind::Download: {
            // Scan retrieval / stored-page fetch: the printer streams data.
            const auto req = static_cast<std::uint32_t>(rng.uniform_int(60, 300));
            const auto data = static_cast<std::uint32_t>(
                std::llround(rng.log_uniform(2000, 400000)));
            sb.send(0, req, draw_gap(cfg, rng, 0.0003, 0.002),
                    draw_gap(cfg, rng, 0.0001, 0.0006));
            sb.send_acked(1, data, draw_gap(cfg, rng, 0.01, 0.1),
                          draw_gap(cfg, rng, 0.0001, 0.0008),
                          draw_gap(cfg, rng, 0.0003, 0.0025));
            break;
        }
        case BenignKind::PrinterInitiated:
            break; // handled above
    }

    sb.teardown(0, draw_gap(cfg, rng, 0.0005, 0.003));
    return std::move(sb.packets());
}

std::vector<Packet> build_malicious_packets(const SynthConfig& cfg, Rng& rng,
                                            const SessionPlan& plan, bool& automated_out) {
    const auto& bank = command_bank();
    const int count = static_cast<int>(
        rng.uniform_int(cfg.commands_per_session[0], cfg.commands_per_session[1]));
    std::vector<std::size_t> draws(count);
    for (auto& d : draws) d = rng.index(bank.size());
    if (!cfg.randomize_command_order) std::sort(draws.begin(), draws.end());

    const bool automated = rng.uniform() < cfg.automated_fraction;
    automated_out = automated;

    SessionBuilder sb(plan.attacker, plan.printer, plan.start_us, rng);
    sb.handshake(draw_gap(cfg, rng, 0.0002, 0.002), draw_gap(cfg, rng, 0.0002, 0.002));

    double gap = draw_gap(cfg, rng, 0.005, 0.05); // settle time after the handshake
    for (std::size_t idx : draws) {
        const CommandSpec& cmd = bank[idx];
        const auto req = static_cast<std::uint32_t>(
            rng.uniform_int(cmd.request_min, cmd.request_max));
        const auto resp = static_cast<std::uint32_t>(
            rng.uniform_int(cmd.response_min, cmd.response_max));
        const double delay = draw_gap(cfg, rng, cmd.delay_min_s, cmd.delay_max_s);

        sb.send(0, req, gap, draw_gap(cfg, rng, 0.0001, 0.0006));
        sb.send_acked(1, resp, delay, draw_gap(cfg, rng, 0.0001, 0.0008),
                      draw_gap(cfg, rng, 0.0003, 0.002));

        gap = automated
                  ? draw_gap(cfg, rng, cfg.automated_gap_s[0], cfg.automated_gap_s[1])
                  : std::clamp(rng.log_normal(std::log(1.5), 0.8), cfg.manual_gap_s[0],
                               cfg.manual_gap_s[1]);
    }

    sb.teardown(0, draw_gap(cfg, rng, 0.0005, 0.003));
    return std::move(sb.packets());
}

// Optional single TCP irregularity per session so the tcp_analysis_*
// features see non-zero values. The packet list stays time-sorted.
void inject_anomaly(std::vector<Packet>& packets, Rng& rng) {
    const int kind = static_cast<int>(rng.index(4));
    auto same_dir = [](const Packet& a, const Packet& b) {
        return a.src == b.src && a.dst == b.dst;
    };

    switch (kind) {
        case 0: { // duplicate ack: re-send a pure ack right after itself
            for (std::size_t i = 0; i + 1 < packets.size(); ++i) {
                const Packet& p = packets[i];
                const bool pure = p.payload_len == 0 && p.has_flag(kAck) &&
                                  !p.has_flag(kSyn) && !p.has_flag(kFin) && !p.has_flag(kRst);
                if (!pure) continue;
                if (packets[i + 1].timestamp_us - p.timestamp_us < 2) continue;
                Packet copy = p;
                copy.timestamp_us = p.timestamp_us + 1;
                packets.insert(packets.begin() + static_cast<std::ptrdiff_t>(i) + 1, copy);
                return;
            }
            return;
        }
        case 1: { // retransmission surfacing as out_of_order
            for (std::size_t i = 0; i + 1 < packets.size(); ++i) {
                if (packets[i].payload_len == 0) continue;
                for (std::size_t j = i + 1; j + 1 < packets.size(); ++j) {
                    if (!same_dir(packets[i], packets[j]) || packets[j].payload_len == 0) {
                        continue;
                    }
                    if (packets[j + 1].timestamp_us - packets[j].timestamp_us < 2) break;
                    Packet copy = packets[i];
                    copy.timestamp_us = packets[j].timestamp_us + 1;
                    packets.insert(packets.begin() + static_cast<std::ptrdiff_t>(j) + 1,
                                   copy);
                    return;
                }
            }
            return;
        }
        case 2: { // keep-alive probe before the teardown
            for (std::size_t i = packets.size(); i-- > 0;) {
                const Packet& p = packets[i];
                if (p.payload_len == 0 || p.has_flag(kSyn) || p.has_flag(kFin)) continue;
                if (i + 1 >= packets.size() ||
                    packets[i + 1].timestamp_us - p.timestamp_us < 2) {
                    continue;
                }
                Packet probe = p;
                probe.timestamp_us = p.timestamp_us + 1;
                probe.seq = p.seq + p.payload_len - 1;
                probe.payload_len = 1;
                probe.wire_len = 54 + 1;
                probe.tcp_flags = kAck;
                packets.insert(packets.begin() + static_cast<std::ptrdiff_t>(i) + 1, probe);
                return;
            }
            return;
        }
        default: { // drop one mid-stream data packet: sequence gap
            for (std::size_t i = 0; i + 1 < packets.size(); ++i) {
                if (packets[i].payload_len == 0) continue;
                for (std::size_t j = i + 1; j < packets.size(); ++j) {
                    if (same_dir(packets[i], packets[j]) && packets[j].payload_len > 0) {
                        packets.erase(packets.begin() + static_cast<std::ptrdiff_t>(i));
                        return;
                    }
                }
            }
            return;
        }
    }
}

TcpSession single_session(std::vector<Packet>&& packets) {
    std::vector<TcpSession> sessions = reassemble_sessions(packets);
    if (sessions.size() != 1) {
        throw Error("synth: generated packets did not form exactly one session");
    }
    return std::move(sessions.front());
}

} // namespace

TcpSession gen_benign_session(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    const SessionPlan plan = default_plan(cfg, rng);
    const BenignKind kind = draw_benign_kind(cfg, rng);
    std::vector<Packet> packets = build_benign_packets(cfg, rng, plan, kind);
    if (cfg.anomaly_injection_rate > 0.0 && rng.uniform() < cfg.anomaly_injection_rate) {
        inject_anomaly(packets, rng);
    }
    return single_session(std::move(packets));
}

TcpSession gen_malicious_session(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    const SessionPlan plan = default_plan(cfg, rng);
    bool automated = false;
    std::vector<Packet> packets = build_malicious_packets(cfg, rng, plan, automated);
    if (cfg.anomaly_injection_rate > 0.0 && rng.uniform() < cfg.anomaly_injection_rate) {
        inject_anomaly(packets, rng);
    }
    return single_session(std::move(packets));
}

SynthCorpus gen_corpus(const SynthConfig& cfg, bool with_packets) {
    cfg.validate();
    const std::size_t total = cfg.n_benign + cfg.n_malicious;
    if (total == 0) throw ArgumentError("synth: corpus must contain at least one session");

    // Corpus-level stream: label interleaving, start gaps, attack batching.
    Rng corpus_rng = Rng::child(cfg.seed, 0);
    std::vector<Label> order(cfg.n_benign, Label::Benign);
    order.insert(order.end(), cfg.n_malicious, Label::Malicious);
    corpus_rng.shuffle(order);

    SynthCorpus corpus;
    corpus.dataset.schema = feature_names();
    corpus.dataset.instances.reserve(total);

    std::int64_t start_us = kCorpusEpochUs;
    Endpoint batch_printer{};
    int batch_remaining = 0;

    for (std::size_t i = 0; i < total; ++i) {
        start_us += corpus_rng.uniform_int(5000, 2000000);
        Rng rng = Rng::child(cfg.seed, i + 1);

        SessionPlan plan = default_plan(cfg, rng);
        plan.start_us = start_us;
        // Session-unique initiator port (pools repeat only after 55k sessions).
        const auto port = static_cast<std::uint16_t>(10000 + i % 55000);
        plan.client.port = port;
        plan.attacker.port = port;

        const Label label = order[i];
        std::vector<Packet> packets;
        std::string source;

        if (label == Label::Benign) {
            const BenignKind kind = draw_benign_kind(cfg, rng);
            packets = build_benign_packets(cfg, rng, plan, kind);
            source = std::string("synth/benign/") + to_string(kind);
        } else {
            if (cfg.randomize_session_grouping) {
                if (batch_remaining == 0) {
                    batch_printer = printer_endpoint(cfg, corpus_rng);
                    batch_remaining = static_cast<int>(corpus_rng.uniform_int(
                        cfg.sessions_per_printer[0], cfg.sessions_per_printer[1]));
                }
                plan.printer = batch_printer;
                --batch_remaining;
            }
            bool automated = false;
            packets = build_malicious_packets(cfg, rng, plan, automated);
            source = automated ? "synth/malicious/automated" : "synth/malicious/manual";
        }

        if (cfg.anomaly_injection_rate > 0.0 &&
            rng.uniform() < cfg.anomaly_injection_rate) {
            inject_anomaly(packets, rng);
        }

        TcpSession session = single_session(std::move(packets));

        LabeledInstance inst;
        inst.features = extract_features(session);
        inst.label = label;
        inst.meta.source = std::move(source);
        inst.meta.endpoint_a = session.key.a.to_string();
        inst.meta.endpoint_b = session.key.b.to_string();
        inst.meta.start_time = static_cast<double>(session.start_us()) * 1e-6;
        corpus.dataset.instances.push_back(std::move(inst));

        corpus.packet_count += session.packets.size();
        if (with_packets) {
            auto& labeled = label == Label::Benign ? corpus.benign_packets
                                                   : corpus.malicious_packets;
            for (const SessionPacket& sp : session.packets) {
                corpus.packets.push_back(sp.packet);
                labeled.push_back(sp.packet);
            }
        }
    }

    if (with_packets) {
        auto by_time = [](const Packet& a, const Packet& b) {
            return a.timestamp_us < b.timestamp_us;
        };
        std::stable_sort(corpus.packets.begin(), corpus.packets.end(), by_time);
        std::stable_sort(corpus.benign_packets.begin(), corpus.benign_packets.end(), by_time);
        std::stable_sort(corpus.malicious_packets.begin(), corpus.malicious_packets.end(),
                         by_time);
    }
    return corpus;
}

std::string corpus_manifest(const SynthConfig& cfg, const SynthCorpus& corpus) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["seed"] = cfg.seed;
    j["config"] = nlohmann::json::parse(cfg.to_json());
    j["counts"] = {
        {"benign", cfg.n_benign},
        {"malicious", cfg.n_malicious},
        {"sessions", corpus.dataset.size()},
        {"packets", corpus.packet_count},
    };
    return j.dump(2);
}

} // namespace printwatch
