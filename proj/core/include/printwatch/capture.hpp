#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace printwatch {

enum TcpFlag : std::uint8_t {
    kFin = 0x01,
    kSyn = 0x02,
    kRst = 0x04,
    kPsh = 0x08,
    kAck = 0x10,
    kUrg = 0x20,
};

// Per-packet anomaly marks, assigned during reassembly with stateless
// per-direction sequence tracking:
//   duplicate_ack : same ack number repeated by one side with no payload
//   keep_alive    : zero/one-byte payload at sequence (next expected - 1)
//   lost_segment  : sequence number jumps past the next expected one
//   out_of_order  : sequence number below the highest already seen
enum TcpAnomaly : std::uint8_t {
    kDuplicateAck = 0x01,
    kKeepAlive = 0x02,
    kLostSegment = 0x04,
    kOutOfOrder = 0x08,
};

struct Endpoint {
    std::uint32_t addr = 0; // IPv4, host byte order
    std::uint16_t port = 0;

    auto operator<=>(const Endpoint&) const = default;
    std::string to_string() const; // "a.b.c.d:port"
};

// One captured TCP segment. Only metadata is kept; the payload bytes are
// never stored.
struct Packet {
    std::int64_t timestamp_us = 0; // microseconds since epoch
    Endpoint src;
    Endpoint dst;
    std::uint8_t tcp_flags = 0;   // TcpFlag mask
    std::uint32_t payload_len = 0;
    std::uint32_t wire_len = 0;   // frame length on the wire
    std::uint8_t ds_field = 0;    // IPv4 DSCP/ECN byte
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint8_t anomalies = 0;   // TcpAnomaly mask, filled in by reassembly

    double timestamp() const { return static_cast<double>(timestamp_us) * 1e-6; }
    bool has_flag(TcpFlag f) const { return (tcp_flags & f) != 0; }
};

enum class Direction : std::uint8_t { AtoB, BtoA };

enum class Termination : std::uint8_t { Fin, Rst, Timeout, CaptureEnd };

std::string to_string(Termination t);

struct SessionPacket {
    Packet packet;
    Direction dir = Direction::AtoB;
};

// Side A is the endpoint that sent the first SYN (or, for sessions observed
// mid-stream, the first packet).
struct SessionKey {
    Endpoint a;
    Endpoint b;

    auto operator<=>(const SessionKey&) const = default;
};

struct TcpSession {
    SessionKey key;
    std::vector<SessionPacket> packets; // non-decreasing in timestamp
    Termination termination = Termination::CaptureEnd;

    std::int64_t start_us() const { return packets.front().packet.timestamp_us; }
    std::int64_t end_us() const { return packets.back().packet.timestamp_us; }
    double duration_s() const {
        return static_cast<double>(end_us() - start_us()) * 1e-6;
    }
};

struct CaptureResult {
    std::vector<Packet> packets;     // TCP-over-IPv4 frames, file order
    std::uint64_t skipped_frames = 0; // non-TCP / non-IPv4 / fragments
};

/// Parses a classic pcap file (magic 0xa1b2c3d4 or byte-swapped, Ethernet
/// link type, optional single 802.1Q tag). Throws FormatError on malformed
/// or truncated input and on unsupported link types.
CaptureResult parse_pcap(std::span<const std::uint8_t> raw);

CaptureResult read_pcap_file(const std::string& path);

/// Serializes packets (non-decreasing in timestamp) back to the same pcap
/// dialect parse_pcap reads. Frames are Ethernet + IPv4 + TCP with no
/// options; payload bytes are zero filler of the recorded length.
std::vector<std::uint8_t> write_pcap(std::span<const Packet> packets);

void write_pcap_file(const std::string& path, std::span<const Packet> packets);

inline constexpr double kDefaultIdleTimeout = 300.0; // seconds

/// Groups packets (non-decreasing in timestamp) into directed sessions.
/// A session opens at a SYN without ACK and closes when both directions
/// have sent FIN, at RST, after idle_timeout of silence, or at capture end.
/// Packets on a 4-tuple with no observed SYN form a capture_end session
/// whose side A is the sender of the first observed packet. Never throws on
/// degenerate input.
std::vector<TcpSession> reassemble_sessions(std::span<const Packet> packets,
                                            double idle_timeout = kDefaultIdleTimeout);

} // namespace printwatch
