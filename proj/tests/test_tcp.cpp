// SPDX-License-Identifier: Apache-2.0

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "doctest.h"
#include "porch/runner.hpp"
#include "porch/tcp_transport.hpp"

using namespace porch;

namespace {

// Unit-test port ranges stay away from the 20000 default so an acceptance
// run and the unit suite can coexist.
constexpr std::uint16_t kUnitPortBase = 23450;

class PingNode final : public harness::Node {
public:
    PingNode() : id_("ping") {}
    const NodeId& id() const override { return id_; }
    void start(harness::NodeContext& ctx) override {
        ctx.send(NodeId("pong"), {dnp3m::Direction::Request, "k|ping|1|hello"});
    }
    void on_message(const dnp3m::Message& message, harness::NodeContext&) override {
        replies.push_back(message.body);
    }
    void on_timer(std::uint64_t, harness::NodeContext&) override {}
    std::vector<std::string> replies;

private:
    NodeId id_;
};

class PongNode final : public harness::Node {
public:
    PongNode() : id_("pong") {}
    const NodeId& id() const override { return id_; }
    void on_message(const dnp3m::Message& message, harness::NodeContext& ctx) override {
        ctx.send(NodeId("ping"), {dnp3m::Direction::Response, message.body});
    }
    void on_timer(std::uint64_t, harness::NodeContext&) override {}

private:
    NodeId id_;
};

// Fires one oversized message at a configurable peer.
class SenderNode final : public harness::Node {
public:
    SenderNode(std::string to, std::string body) : id_("sender"), to_(std::move(to)),
                                                   body_(std::move(body)) {}
    const NodeId& id() const override { return id_; }
    void start(harness::NodeContext& ctx) override {
        ctx.send(NodeId(to_), {dnp3m::Direction::Response, body_});
    }
    void on_message(const dnp3m::Message&, harness::NodeContext&) override {}
    void on_timer(std::uint64_t, harness::NodeContext&) override {}

private:
    NodeId id_;
    std::string to_;
    std::string body_;
};

int listen_on(std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::listen(fd, 4) == 0);
    return fd;
}

} // namespace

TEST_CASE("tcp: loopback echo returns the exact bytes") {
    PingNode ping;
    PongNode pong;
    tcp::TcpCluster::Options options;
    options.base_port = kUnitPortBase;
    tcp::TcpCluster cluster({&ping, &pong}, options);
    const bool finished = cluster.run([&] { return !ping.replies.empty(); }, 5000);
    CHECK(finished);
    REQUIRE(ping.replies.size() == 1);
    CHECK(ping.replies[0] == "k|ping|1|hello");
}

TEST_CASE("tcp: port collision raises BindFailure") {
    const int squatter = listen_on(kUnitPortBase + 10);
    PingNode ping;
    tcp::TcpCluster::Options options;
    options.base_port = kUnitPortBase + 10;
    try {
        tcp::TcpCluster cluster({&ping}, options);
        FAIL("expected BindFailure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BindFailure);
    }
    ::close(squatter);
}

TEST_CASE("tcp: wire bytes are dnp3m frames, length byte honored") {
    // External tap: the test owns a listener the cluster connects to.
    const std::uint16_t tap_port = kUnitPortBase + 20;
    const int tap = listen_on(tap_port);

    const std::string body = "k|sender|1|" + std::string(400, 'q'); // two frames
    SenderNode sender("TAP", body);
    tcp::TcpCluster::Options options;
    options.base_port = kUnitPortBase + 21;
    options.external.emplace(NodeId("TAP"),
                             harness::Endpoint{NodeId("TAP"), "127.0.0.1", tap_port});
    tcp::TcpCluster cluster({&sender}, options);

    bool sent = false;
    cluster.run([&] { return sent = true; }, 2000); // start() already fired the send

    const int conn = ::accept(tap, nullptr, nullptr);
    REQUIRE(conn >= 0);
    std::vector<std::uint8_t> wire;
    std::uint8_t chunk[4096];
    const std::size_t expected = body.size() + 4; // two frames, two headers
    while (wire.size() < expected) {
        const ssize_t n = ::recv(conn, chunk, sizeof(chunk), 0);
        REQUIRE(n > 0);
        wire.insert(wire.end(), chunk, chunk + n);
    }
    ::close(conn);
    ::close(tap);

    // Walk the stream with the codec: every frame starts 0x00/0x01 and the
    // declared length matches what follows.
    std::span<const std::uint8_t> rest(wire);
    std::vector<dnp3m::Frame> frames;
    while (!rest.empty()) {
        CHECK((rest[0] == 0x00 || rest[0] == 0x01));
        const auto decoded = dnp3m::decode_frame(rest);
        REQUIRE(decoded.status == dnp3m::CodecStatus::Ok);
        CHECK(decoded.consumed == rest[1]);
        frames.push_back(decoded.frame);
        rest = rest.subspan(decoded.consumed);
    }
    const auto message = dnp3m::reassemble(frames);
    REQUIRE(message.status == dnp3m::CodecStatus::Ok);
    CHECK(message.message.body == body);
    CHECK(message.message.direction == dnp3m::Direction::Response);
}

TEST_CASE("tcp: full four-relay cycle matches the simulated chain") {
    runner::RunConfig config;
    config.cycles = 2;
    config.period_ms = 150;
    config.await_timeout_ms = 2000;
    config.seed = 11;
    config.logical_timestamps = true; // wall clocks differ; block stamps must not

    runner::RunConfig sim = config;
    sim.transport = runner::RunConfig::Transport::Sim;
    sim.latency_ms = 0; // zero-latency, zero-drop baseline
    const runner::RunResult sim_result = runner::run(sim);
    REQUIRE(sim_result.exit_code == 0);

    runner::RunConfig tcp = config;
    tcp.transport = runner::RunConfig::Transport::Tcp;
    tcp.base_port = kUnitPortBase + 40;
    const runner::RunResult tcp_result = runner::run(tcp);
    CHECK(tcp_result.exit_code == 0);
    CHECK(tcp_result.committed == 2);
    CHECK(tcp_result.replicas_identical);

    // Transport equivalence: identical seeds and logical stamps produce the
    // identical chain over real sockets.
    CHECK(tcp_result.da_chain_json == sim_result.da_chain_json);
}
