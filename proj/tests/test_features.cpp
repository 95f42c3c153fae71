#include <doctest.h>

#include <vector>

#include "printwatch/errors.hpp"
#include "printwatch/features.hpp"
#include "printwatch/rng.hpp"

#include "oracles.hpp"

using namespace printwatch;

namespace {

SessionPacket sp(std::int64_t us, Direction dir, std::uint8_t flags, std::uint32_t payload,
                 std::uint8_t ds = 0, std::uint8_t anomalies = 0) {
    SessionPacket out;
    out.dir = dir;
    out.packet.timestamp_us = us;
    out.packet.tcp_flags = flags;
    out.packet.payload_len = payload;
    out.packet.wire_len = 54 + payload;
    out.packet.ds_field = ds;
    out.packet.anomalies = anomalies;
    return out;
}

TcpSession make_session(std::vector<SessionPacket> packets) {
    TcpSession s;
    s.key.a = {0x0a000101, 40001};
    s.key.b = {0x0a00000a, 9100};
    s.termination = Termination::Fin;
    s.packets = std::move(packets);
    for (auto& p : s.packets) {
        p.packet.src = p.dir == Direction::AtoB ? s.key.a : s.key.b;
        p.packet.dst = p.dir == Direction::AtoB ? s.key.b : s.key.a;
    }
    return s;
}

// A sends one 100-byte push, B replies with one 40-byte push, wrapped in an
// empty handshake and teardown.
TcpSession s1_session() {
    using D = Direction;
    return make_session({
        sp(0, D::AtoB, kSyn, 0, 0x10),
        sp(1000, D::BtoA, kSyn | kAck, 0, 0x20),
        sp(2000, D::AtoB, kAck, 0, 0x10),
        sp(3000, D::AtoB, kPsh | kAck, 100, 0x10),
        sp(10000, D::BtoA, kPsh | kAck, 40, 0x20),
        sp(11000, D::AtoB, kFin | kAck, 0, 0x10),
        sp(12000, D::BtoA, kFin | kAck, 0, 0x20),
        sp(13000, D::AtoB, kAck, 0, 0x10),
    });
}

} // namespace

TEST_CASE("canonical names: count, spot entries, family layout") {
    const auto& names = feature_names();
    REQUIRE(names.size() == kFeatureCount);
    CHECK(names[0] == "ack");
    CHECK(names[5] == "bytes_A_B_ratio");
    CHECK(names[13] == "packet_inter_arrival_A_median");
    CHECK(names[44] == "packet_size_B_max");
    CHECK(names[58] == "packets");
    CHECK(names[60] == "packets_A_B_ratio");
    CHECK(names[74] == "urg_B");
    CHECK(feature_index("bytes_A_B_ratio") == 5);
    CHECK(feature_index("packet_size_B_max") == 44);
    CHECK(feature_index("tcp_analysis_duplicate_ack") == 68);
    CHECK_THROWS_AS(feature_index("no_such_feature"), ArgumentError);

    // 28 size, 25 time, 22 TCP-property features.
    int size_n = 0, time_n = 0, tcp_n = 0;
    for (const auto& n : names) {
        if (n.rfind("packet_size_", 0) == 0 || n.rfind("bytes", 0) == 0) {
            ++size_n;
        } else if (n.rfind("packet_inter_arrival_", 0) == 0 || n == "duration") {
            ++time_n;
        } else {
            ++tcp_n;
        }
    }
    CHECK(size_n == 28);
    CHECK(time_n == 25);
    CHECK(tcp_n == 22);
}

TEST_CASE("empty session is rejected") {
    TcpSession s;
    CHECK_THROWS_AS(extract_features(s), ArgumentError);
}

TEST_CASE("pure handshake and teardown session zeroes the size features") {
    using D = Direction;
    const TcpSession s = make_session({
        sp(0, D::AtoB, kSyn, 0),
        sp(500, D::BtoA, kSyn | kAck, 0),
        sp(900, D::AtoB, kAck, 0),
        sp(2000, D::AtoB, kFin | kAck, 0),
        sp(2500, D::BtoA, kFin | kAck, 0),
        sp(3100, D::AtoB, kAck, 0),
    });
    const FeatureVector fv = extract_features(s);
    CHECK(fv[feature_index("bytes")] == 0.0);
    CHECK(fv[feature_index("bytes_A_B_ratio")] == 0.0);
    CHECK(fv[feature_index("packet_size_max")] == 0.0);
    CHECK(fv[feature_index("duration")] == doctest::Approx(3100e-6));
}

TEST_CASE("hand-built exchange matches the brute-force oracle entry by entry") {
    const TcpSession s = s1_session();
    const FeatureVector fv = extract_features(s);
    const auto expect = oracles::brute_features(s);

    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        INFO("feature ", names[i]);
        CHECK(oracles::close_rel(fv[i], expect.at(names[i])));
    }

    // Spot values checked by hand.
    CHECK(fv[feature_index("bytes_A")] == 100.0);
    CHECK(fv[feature_index("bytes_B")] == 40.0);
    CHECK(fv[feature_index("bytes_A_B_ratio")] == doctest::Approx(0.4));
    CHECK(fv[feature_index("packet_size_max")] == 100.0);
    CHECK(fv[feature_index("packet_size_B_max")] == 40.0);
    CHECK(fv[feature_index("ack")] == 7.0); // all but the first SYN
    CHECK(fv[feature_index("push")] == 2.0);
    CHECK(fv[feature_index("packets")] == 8.0);
    CHECK(fv[feature_index("packets_A")] == 5.0);
    CHECK(fv[feature_index("packets_B")] == 3.0);
    CHECK(fv[feature_index("packets_A_B_ratio")] == doctest::Approx(0.6));
    CHECK(fv[feature_index("ds_field_A")] == 0x10);
    CHECK(fv[feature_index("ds_field_B")] == 0x20);
    CHECK(fv[feature_index("duration")] == doctest::Approx(0.013));
}

TEST_CASE("print-job ratio example: 500000 sent, 189000 returned") {
    using D = Direction;
    std::vector<SessionPacket> packets;
    std::int64_t t = 0;
    packets.push_back(sp(t, D::AtoB, kSyn, 0));
    packets.push_back(sp(t += 200, D::BtoA, kSyn | kAck, 0));
    packets.push_back(sp(t += 200, D::AtoB, kAck, 0));
    std::uint32_t remaining = 500000;
    while (remaining > 0) {
        const std::uint32_t chunk = remaining < 1448 ? remaining : 1448;
        packets.push_back(sp(t += 300, D::AtoB, kPsh | kAck, chunk));
        remaining -= chunk;
    }
    std::uint32_t acks = 189000;
    while (acks > 0) {
        const std::uint32_t chunk = acks < 45 ? acks : 45;
        packets.push_back(sp(t += 300, D::BtoA, kPsh | kAck, chunk));
        acks -= chunk;
    }
    const FeatureVector fv = extract_features(make_session(std::move(packets)));
    CHECK(fv[feature_index("bytes_A")] == 500000.0);
    CHECK(fv[feature_index("bytes_B")] == 189000.0);
    CHECK(fv[feature_index("bytes_A_B_ratio")] == doctest::Approx(0.378));
    CHECK(fv[feature_index("bytes_A_B_ratio")] < 0.38);
}

TEST_CASE("direction consistency: side totals add up") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const TcpSession s = oracles::random_session(rng);
        const FeatureVector fv = extract_features(s);
        auto at = [&fv](const char* n) { return fv[feature_index(n)]; };
        CHECK(at("bytes_A") + at("bytes_B") == at("bytes"));
        CHECK(at("packets_A") + at("packets_B") == at("packets"));
        CHECK(at("ack_A") + at("ack_B") == at("ack"));
        CHECK(at("push_A") + at("push_B") == at("push"));
        CHECK(at("reset_A") + at("reset_B") == at("reset"));
        CHECK(at("urg_A") + at("urg_B") == at("urg"));
    }
}

TEST_CASE("scaling payloads scales the size statistics covariantly") {
    Rng rng(11);
    const TcpSession s = oracles::random_session(rng, 15);
    TcpSession scaled = s;
    const double c = 3.0;
    for (auto& p : scaled.packets) {
        p.packet.payload_len *= static_cast<std::uint32_t>(c);
        p.packet.wire_len = 54 + p.packet.payload_len;
    }

    const FeatureVector base = extract_features(s);
    const FeatureVector after = extract_features(scaled);
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& n = names[i];
        if (n.rfind("packet_size_", 0) != 0) continue;
        INFO("feature ", n);
        if (n.ends_with("_var")) {
            CHECK(oracles::close_rel(after[i], base[i] * c * c));
        } else if (n.ends_with("_entropy")) {
            CHECK(oracles::close_rel(after[i], base[i]));
        } else {
            CHECK(oracles::close_rel(after[i], base[i] * c));
        }
    }
    CHECK(oracles::close_rel(after[feature_index("bytes_A_B_ratio")],
                             base[feature_index("bytes_A_B_ratio")]));
}

TEST_CASE("shifting all timestamps changes nothing") {
    Rng rng(13);
    const TcpSession s = oracles::random_session(rng, 18);
    TcpSession shifted = s;
    for (auto& p : shifted.packets) p.packet.timestamp_us += 86400LL * 1000000;

    const FeatureVector a = extract_features(s);
    const FeatureVector b = extract_features(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("feature ", feature_names()[i]);
        CHECK(a[i] == b[i]);
    }
}

TEST_CASE("random sessions match the brute-force oracle on all 75 entries") {
    Rng rng(20240601);
    const auto& names = feature_names();
    for (int trial = 0; trial < 200; ++trial) {
        const TcpSession s = oracles::random_session(rng);
        const FeatureVector fv = extract_features(s);
        REQUIRE(fv.size() == kFeatureCount);
        const auto expect = oracles::brute_features(s);
        for (std::size_t i = 0; i < names.size(); ++i) {
            INFO("trial ", trial, ", feature ", names[i]);
            CHECK(oracles::close_rel(fv[i], expect.at(names[i])));
        }
        for (double v : fv) {
            CHECK(std::isfinite(v));
        }
    }
}
