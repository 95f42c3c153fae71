#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "printwatch/capture.hpp"
#include "printwatch/dataset.hpp"
#include "printwatch/rng.hpp"

namespace printwatch {

enum class CommandLanguage { General, Pjl, PostScript, Pcl };

std::string to_string(CommandLanguage l);

// One abnormal printer command the attack generator can issue: request and
// response sizes in bytes, printer response delay in seconds.
struct CommandSpec {
    std::string name;
    CommandLanguage language = CommandLanguage::General;
    std::uint32_t request_min = 0;
    std::uint32_t request_max = 0;
    std::uint32_t response_min = 0;
    std::uint32_t response_max = 0;
    double delay_min_s = 0.0;
    double delay_max_s = 0.0;
};

/// The fixed bank of abnormal commands, grouped by language. Size anchors:
/// the PJL identification query sends ~528 bytes and receives ~485 back;
/// dump/capture style commands pull responses far larger than the request.
const std::vector<CommandSpec>& command_bank();

struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_benign = 0;
    std::size_t n_malicious = 0;

    std::array<int, 2> commands_per_session = {1, 20};     // must stay within [1, 20]
    std::array<int, 2> sessions_per_printer = {20, 1000};  // attack batch size

    int printer_count = 10;
    int client_count = 40;
    int attacker_count = 5;

    // Benign session mixture. Print jobs and printer-initiated callbacks
    // keep the returned/sent byte ratio well under 0.38; status queries sit
    // above it; downloads are the rare big-response tail that pushes
    // packet_size_B_max past 50 bytes.
    double job_bytes_min = 400;
    double job_bytes_max = 1.2e6;
    double weight_print = 0.6925;
    double weight_query = 0.2822;
    double weight_download = 0.0133;
    double weight_printer_initiated = 0.0120;

    // Malicious timing: automated attackers pace commands in tens of
    // milliseconds, manual ones in seconds.
    double automated_fraction = 0.5;
    std::array<double, 2> automated_gap_s = {0.01, 0.1};
    std::array<double, 2> manual_gap_s = {0.3, 15.0};

    bool randomize_command_order = true;
    bool randomize_session_grouping = true;
    bool randomize_timing = true;

    // Probability that a generated session carries one injected TCP
    // irregularity (duplicate ack, retransmission, keep-alive, or gap).
    double anomaly_injection_rate = 0.0;

    void validate() const; // throws ArgumentError
    std::string to_json() const;
    static SynthConfig from_json(std::string_view text);
    static SynthConfig load(const std::string& path);
};

/// One benign session drawn from the configured mixture; the client is
/// side A except for printer-initiated callbacks.
TcpSession gen_benign_session(const SynthConfig& cfg, Rng& rng);

/// One attack session: 1-20 commands drawn uniformly from the bank, each a
/// small request answered after the command's response delay.
TcpSession gen_malicious_session(const SynthConfig& cfg, Rng& rng);

struct SynthCorpus {
    Dataset dataset;             // one instance per session, generation order
    std::vector<Packet> packets; // merged time order; filled only on request
    std::vector<Packet> benign_packets;
    std::vector<Packet> malicious_packets;
    std::size_t packet_count = 0;
};

/// Generates exactly n_benign + n_malicious sessions (interleaved
/// deterministically by seed), extracts features through the regular
/// capture path, and optionally retains the raw packets for pcap output.
SynthCorpus gen_corpus(const SynthConfig& cfg, bool with_packets = false);

/// JSON document recording the seed, configuration, and counts of a
/// generated corpus.
std::string corpus_manifest(const SynthConfig& cfg, const SynthCorpus& corpus);

} // namespace printwatch
