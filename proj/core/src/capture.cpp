#include "printwatch/capture.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <utility>

#include "printwatch/errors.hpp"

namespace printwatch {

std::string Endpoint::to_string() const {
    return std::to_string((addr >> 24) & 0xff) + "." + std::to_string((addr >> 16) & 0xff) +
           "." + std::to_string((addr >> 8) & 0xff) + "." + std::to_string(addr & 0xff) +
           ":" + std::to_string(port);
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Fin: return "fin";
        case Termination::Rst: return "rst";
        case Termination::Timeout: return "timeout";
        case Termination::CaptureEnd: return "capture_end";
    }
    return "unknown";
}

namespace {

constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kLinkTypeEthernet = 1;

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, bool swap)
        : data_(data), swap_(swap) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    std::uint32_t u32() {
        std::uint32_t v;
        std::memcpy(&v, data_.data() + pos_, 4);
        pos_ += 4;
        return swap_ ? byteswap32(v) : v;
    }

    void skip(std::size_t n) { pos_ += n; }

    static std::uint32_t byteswap32(std::uint32_t v) {
        return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) |
               ((v & 0x00ff0000u) >> 8) | ((v & 0xff000000u) >> 24);
    }

private:
    std::span<const std::uint8_t> data_;
    bool swap_;
    std::size_t pos_ = 0;
};

std::uint16_t be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

// Decodes one Ethernet frame into a Packet. Returns false when the frame is
// not TCP-over-IPv4 (counted as skipped by the caller).
bool decode_frame(const std::uint8_t* frame, std::size_t len, Packet& out) {
    if (len < 14) return false;
    std::size_t off = 12;
    std::uint16_t ethertype = be16(frame + off);
    off += 2;
    if (ethertype == 0x8100) { // single 802.1Q tag
        if (len < off + 4) return false;
        ethertype = be16(frame + off + 2);
        off += 4;
    }
    if (ethertype != 0x0800) return false; // not IPv4 (IPv6 etc. skipped)

    if (len < off + 20) return false;
    const std::uint8_t* ip = frame + off;
    if ((ip[0] >> 4) != 4) return false;
    const std::size_t ip_hdr = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (ip_hdr < 20 || len < off + ip_hdr) return false;
    if (ip[9] != 6) return false; // not TCP
    const std::uint16_t frag = be16(ip + 6);
    if ((frag & 0x1fff) != 0) return false; // non-first fragment, no payload view

    const std::uint16_t ip_total = be16(ip + 2);
    const std::uint8_t* tcp = ip + ip_hdr;
    if (len < off + ip_hdr + 20) return false;
    const std::size_t tcp_hdr = static_cast<std::size_t>(tcp[12] >> 4) * 4;
    if (tcp_hdr < 20 || len < off + ip_hdr + tcp_hdr) return false;

    out.src.addr = be32(ip + 12);
    out.dst.addr = be32(ip + 16);
    out.ds_field = ip[1];
    out.src.port = be16(tcp + 0);
    out.dst.port = be16(tcp + 2);
    out.seq = be32(tcp + 4);
    out.ack = be32(tcp + 8);
    out.tcp_flags = tcp[13] & 0x3f;
    const std::size_t declared = ip_total >= ip_hdr + tcp_hdr
                                     ? ip_total - ip_hdr - tcp_hdr
                                     : 0;
    out.payload_len = static_cast<std::uint32_t>(declared);
    out.anomalies = 0;
    return true;
}

} // namespace

CaptureResult parse_pcap(std::span<const std::uint8_t> raw) {
    if (raw.size() < 24) {
        throw FormatError("pcap: file shorter than the 24-byte global header");
    }
    std::uint32_t magic;
    std::memcpy(&magic, raw.data(), 4);
    bool swap;
    if (magic == kPcapMagic) {
        swap = false;
    } else if (magic == kPcapMagicSwapped) {
        swap = true;
    } else {
        throw FormatError("pcap: bad magic number (not a classic pcap file)");
    }

    ByteReader rd(raw, swap);
    rd.skip(4);           // magic
    rd.skip(4);           // version
    rd.skip(8);           // thiszone + sigfigs
    rd.skip(4);           // snaplen
    const std::uint32_t linktype = rd.u32();
    if (linktype != kLinkTypeEthernet) {
        throw FormatError("pcap: unsupported link type " + std::to_string(linktype) +
                          " (only Ethernet is supported)");
    }

    CaptureResult result;
    std::size_t record_index = 0;
    while (rd.remaining() > 0) {
        const std::size_t record_off = rd.pos();
        if (rd.remaining() < 16) {
            throw FormatError("pcap: truncated record header for record " +
                              std::to_string(record_index) + " at byte offset " +
                              std::to_string(record_off));
        }
        const std::uint32_t ts_sec = rd.u32();
        const std::uint32_t ts_usec = rd.u32();
        const std::uint32_t incl_len = rd.u32();
        const std::uint32_t orig_len = rd.u32();
        if (rd.remaining() < incl_len) {
            throw FormatError("pcap: record " + std::to_string(record_index) +
                              " at byte offset " + std::to_string(record_off) +
                              " is truncated mid-frame");
        }
        Packet pkt;
        pkt.timestamp_us =
            static_cast<std::int64_t>(ts_sec) * 1000000 + static_cast<std::int64_t>(ts_usec);
        pkt.wire_len = orig_len;
        if (decode_frame(raw.data() + rd.pos(), incl_len, pkt)) {
            result.packets.push_back(pkt);
        } else {
            ++result.skipped_frames;
        }
        rd.skip(incl_len);
        ++record_index;
    }
    return result;
}

CaptureResult read_pcap_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pcap file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_pcap(bytes);
}

namespace {

void put16be(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x & 0xff));
}

void put32be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
    v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
    v.push_back(static_cast<std::uint8_t>(x & 0xff));
}

void put32le(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x & 0xff));
    v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
    v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
    v.push_back(static_cast<std::uint8_t>(x >> 24));
}

std::uint16_t ip_checksum(const std::uint8_t* hdr, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2) {
        sum += static_cast<std::uint32_t>((hdr[i] << 8) | hdr[i + 1]);
    }
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

} // namespace

std::vector<std::uint8_t> write_pcap(std::span<const Packet> packets) {
    std::vector<std::uint8_t> out;
    out.reserve(24 + packets.size() * 80);

    auto put16le = [&out](std::uint16_t x) {
        out.push_back(static_cast<std::uint8_t>(x & 0xff));
        out.push_back(static_cast<std::uint8_t>(x >> 8));
    };
    put32le(out, kPcapMagic);
    put16le(2); // version major
    put16le(4); // version minor
    put32le(out, 0);      // thiszone
    put32le(out, 0);      // sigfigs
    put32le(out, 65535);  // snaplen
    put32le(out, kLinkTypeEthernet);

    for (const Packet& pkt : packets) {
        const std::size_t ip_total = 20 + 20 + pkt.payload_len;
        const std::size_t frame_len = 14 + ip_total;

        put32le(out, static_cast<std::uint32_t>(pkt.timestamp_us / 1000000));
        put32le(out, static_cast<std::uint32_t>(pkt.timestamp_us % 1000000));
        put32le(out, static_cast<std::uint32_t>(frame_len));
        put32le(out, static_cast<std::uint32_t>(frame_len));

        // Ethernet: locally administered MACs derived from the endpoints.
        auto push_mac = [&out](const Endpoint& e) {
            out.push_back(0x02);
            out.push_back(0x00);
            out.push_back(static_cast<std::uint8_t>(e.addr >> 24));
            out.push_back(static_cast<std::uint8_t>((e.addr >> 16) & 0xff));
            out.push_back(static_cast<std::uint8_t>((e.addr >> 8) & 0xff));
            out.push_back(static_cast<std::uint8_t>(e.addr & 0xff));
        };
        push_mac(pkt.dst);
        push_mac(pkt.src);
        put16be(out, 0x0800);

        // IPv4 header, no options.
        const std::size_t ip_off = out.size();
        out.push_back(0x45);
        out.push_back(pkt.ds_field);
        put16be(out, static_cast<std::uint16_t>(ip_total));
        put16be(out, 0);      // identification
        put16be(out, 0x4000); // DF
        out.push_back(64);    // TTL
        out.push_back(6);     // TCP
        put16be(out, 0);      // checksum placeholder
        put32be(out, pkt.src.addr);
        put32be(out, pkt.dst.addr);
        const std::uint16_t csum = ip_checksum(out.data() + ip_off, 20);
        out[ip_off + 10] = static_cast<std::uint8_t>(csum >> 8);
        out[ip_off + 11] = static_cast<std::uint8_t>(csum & 0xff);

        // TCP header, no options.
        put16be(out, pkt.src.port);
        put16be(out, pkt.dst.port);
        put32be(out, pkt.seq);
        put32be(out, pkt.ack);
        out.push_back(0x50); // data offset 5 words
        out.push_back(pkt.tcp_flags);
        put16be(out, 65535); // window
        put16be(out, 0);     // checksum (not validated by the parser)
        put16be(out, 0);     // urgent pointer

        out.insert(out.end(), pkt.payload_len, 0x00); // filler payload
    }
    return out;
}

void write_pcap_file(const std::string& path, std::span<const Packet> packets) {
    std::ofstream outf(path, std::ios::binary | std::ios::trunc);
    if (!outf) throw IoError("cannot open pcap file for writing: " + path);
    const std::vector<std::uint8_t> bytes = write_pcap(packets);
    outf.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!outf) throw IoError("failed writing pcap file: " + path);
}

namespace {

// Per-direction sequence tracking for anomaly marks.
struct DirState {
    bool any_seq = false;
    std::uint32_t highest_seq = 0; // highest raw sequence number seen
    std::uint32_t next_seq = 0;    // highest seq + payload (+1 per SYN/FIN)
    bool any_ack = false;
    std::uint32_t last_ack = 0;
    bool fin_seen = false;
};

struct OpenSession {
    TcpSession session;
    DirState dir_state[2];
    std::int64_t last_seen_us = 0;
    bool syn_opened = false;
    bool rst_seen = false;

    bool both_fins() const { return dir_state[0].fin_seen && dir_state[1].fin_seen; }
};

std::uint8_t classify_anomalies(DirState& st, const Packet& pkt) {
    std::uint8_t marks = 0;
    const bool ctl = pkt.has_flag(kSyn) || pkt.has_flag(kFin) || pkt.has_flag(kRst);

    if (pkt.has_flag(kAck) && !ctl && pkt.payload_len == 0 && st.any_ack &&
        pkt.ack == st.last_ack) {
        marks |= kDuplicateAck;
    }
    if (pkt.has_flag(kAck)) {
        st.any_ack = true;
        st.last_ack = pkt.ack;
    }

    if (st.any_seq) {
        if (pkt.payload_len <= 1 && !ctl && pkt.seq + 1 == st.next_seq) {
            marks |= kKeepAlive;
        } else if (pkt.seq > st.next_seq) {
            marks |= kLostSegment;
        } else if (pkt.seq < st.highest_seq) {
            marks |= kOutOfOrder;
        }
        st.highest_seq = std::max(st.highest_seq, pkt.seq);
    } else {
        st.any_seq = true;
        st.highest_seq = pkt.seq;
    }
    std::uint32_t advance = pkt.seq + pkt.payload_len;
    if (pkt.has_flag(kSyn) || pkt.has_flag(kFin)) ++advance;
    st.next_seq = std::max(st.next_seq, advance);

    if (pkt.has_flag(kFin)) st.fin_seen = true;
    return marks;
}

} // namespace

std::vector<TcpSession> reassemble_sessions(std::span<const Packet> packets,
                                            double idle_timeout) {
    const std::int64_t idle_us = static_cast<std::int64_t>(idle_timeout * 1e6);

    // Canonical (order-independent) tuple -> open session slot.
    using Tuple = std::pair<Endpoint, Endpoint>;
    std::map<Tuple, std::size_t> open;
    std::vector<OpenSession> slots;
    std::vector<std::size_t> emitted; // slot indices in first-packet order

    auto canonical = [](const Packet& p) -> Tuple {
        if (std::pair(p.src.addr, p.src.port) <= std::pair(p.dst.addr, p.dst.port)) {
            return {p.src, p.dst};
        }
        return {p.dst, p.src};
    };

    auto finish = [&](std::size_t slot, Termination fallback) {
        OpenSession& os = slots[slot];
        if (os.rst_seen) {
            os.session.termination = Termination::Rst;
        } else if (os.both_fins()) {
            os.session.termination = Termination::Fin;
        } else {
            os.session.termination = fallback;
        }
    };

    for (const Packet& pkt : packets) {
        const Tuple tup = canonical(pkt);
        auto it = open.find(tup);

        if (it != open.end()) {
            OpenSession& cur = slots[it->second];
            const bool idle = pkt.timestamp_us - cur.last_seen_us > idle_us;
            const bool fresh_syn = pkt.has_flag(kSyn) && !pkt.has_flag(kAck) &&
                                   (cur.rst_seen || cur.both_fins() || !cur.syn_opened);
            if (idle || fresh_syn) {
                finish(it->second, idle ? Termination::Timeout : Termination::CaptureEnd);
                open.erase(it);
                it = open.end();
            }
        }

        if (it == open.end()) {
            OpenSession os;
            os.session.key.a = pkt.src;
            os.session.key.b = pkt.dst;
            os.syn_opened = pkt.has_flag(kSyn) && !pkt.has_flag(kAck);
            os.last_seen_us = pkt.timestamp_us;
            slots.push_back(std::move(os));
            open.emplace(tup, slots.size() - 1);
            emitted.push_back(slots.size() - 1);
            it = open.find(tup);
        }

        OpenSession& os = slots[it->second];
        const Direction dir =
            (pkt.src == os.session.key.a) ? Direction::AtoB : Direction::BtoA;
        Packet tagged = pkt;
        tagged.anomalies =
            classify_anomalies(os.dir_state[static_cast<int>(dir)], pkt);
        os.session.packets.push_back({tagged, dir});
        os.last_seen_us = pkt.timestamp_us;

        if (pkt.has_flag(kRst)) {
            os.rst_seen = true;
            finish(it->second, Termination::Rst);
            open.erase(it);
        }
    }

    for (auto& [tup, slot] : open) {
        finish(slot, Termination::CaptureEnd);
    }

    std::vector<TcpSession> sessions;
    sessions.reserve(emitted.size());
    for (std::size_t slot : emitted) {
        sessions.push_back(std::move(slots[slot].session));
    }
    return sessions;
}

} // namespace printwatch
