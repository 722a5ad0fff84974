// SPDX-License-Identifier: Apache-2.0

#include <functional>

#include "doctest.h"
#include "porch/harness.hpp"

using namespace porch;
using namespace porch::harness;

namespace {

// Scriptable node: runs a closure at start, records every message.
class ScriptNode final : public Node {
public:
    explicit ScriptNode(std::string name) : id_(std::move(name)) {}

    const NodeId& id() const override { return id_; }

    void start(NodeContext& ctx) override {
        if (on_start) on_start(ctx);
    }
    void on_message(const dnp3m::Message& message, NodeContext& ctx) override {
        received.push_back(message);
        received_at.push_back(ctx.now());
        if (on_msg) on_msg(message, ctx);
    }
    void on_timer(std::uint64_t token, NodeContext& ctx) override {
        timers.push_back(token);
        if (on_tick) on_tick(token, ctx);
    }

    std::function<void(NodeContext&)> on_start;
    std::function<void(const dnp3m::Message&, NodeContext&)> on_msg;
    std::function<void(std::uint64_t, NodeContext&)> on_tick;
    std::vector<dnp3m::Message> received;
    std::vector<Tick> received_at;
    std::vector<std::uint64_t> timers;

private:
    NodeId id_;
};

dnp3m::Message req(std::string body) {
    return {dnp3m::Direction::Request, std::move(body)};
}

} // namespace

TEST_CASE("sim: two sends on one link arrive in order") {
    NetworkPolicy policy;
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    a.on_start = [&](NodeContext& ctx) {
        ctx.send(NodeId("B"), req("k|A|1|first"));
        ctx.send(NodeId("B"), req("k|A|1|second"));
    };
    net.add_node(a);
    net.add_node(b);
    net.run_until_idle(1000);
    REQUIRE(b.received.size() == 2);
    CHECK(b.received[0].body == "k|A|1|first");
    CHECK(b.received[1].body == "k|A|1|second");
}

TEST_CASE("sim: fixed latency lands at send tick plus latency") {
    NetworkPolicy policy;
    policy.latency = {5, 5};
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    a.on_start = [&](NodeContext& ctx) { ctx.set_timer(10, 1); };
    a.on_tick = [&](std::uint64_t, NodeContext& ctx) {
        ctx.send(NodeId("B"), req("k|A|1|x"));
    };
    net.add_node(a);
    net.add_node(b);
    net.run_until_idle(1000);
    REQUIRE(b.received_at.size() == 1);
    CHECK(b.received_at[0] == 15);
}

TEST_CASE("sim: full drop starves the receiver") {
    NetworkPolicy policy;
    policy.node_drop[NodeId("B")] = 1.0;
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    a.on_start = [&](NodeContext& ctx) {
        for (int i = 0; i < 20; ++i) ctx.send(NodeId("B"), req("k|A|1|x"));
    };
    net.add_node(a);
    net.add_node(b);
    const Trace& trace = net.run_until_idle(1000);
    CHECK(b.received.empty());
    std::size_t drops = 0;
    for (const TraceEvent& event : trace)
        if (event.kind == "drop") ++drops;
    CHECK(drops == 20);
}

TEST_CASE("sim: per-link FIFO holds under randomized latency") {
    NetworkPolicy policy;
    policy.latency = {1, 20};
    policy.seed = 77;
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    a.on_start = [&](NodeContext& ctx) {
        for (int i = 0; i < 50; ++i)
            ctx.send(NodeId("B"), req("k|A|1|" + std::to_string(i)));
    };
    net.add_node(a);
    net.add_node(b);
    net.run_until_idle(10000);
    REQUIRE(b.received.size() == 50);
    for (int i = 0; i < 50; ++i)
        CHECK(b.received[i].body == "k|A|1|" + std::to_string(i));
}

TEST_CASE("sim: identical seeds replay identical traces") {
    const auto run_once = [] {
        NetworkPolicy policy;
        policy.latency = {1, 9};
        policy.default_drop = 0.2;
        policy.seed = 4242;
        SimNetwork net(policy);
        ScriptNode a("A"), b("B");
        a.on_start = [](NodeContext& ctx) {
            for (int i = 0; i < 30; ++i)
                ctx.send(NodeId("B"), req("k|A|1|" + std::to_string(i)));
        };
        b.on_msg = [](const dnp3m::Message& message, NodeContext& ctx) {
            ctx.send(NodeId("A"), {dnp3m::Direction::Response, message.body});
        };
        net.add_node(a);
        net.add_node(b);
        return net.run_until_idle(100000);
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("sim: zero budget yields an empty trace") {
    NetworkPolicy policy;
    SimNetwork net(policy);
    ScriptNode a("A");
    a.on_start = [](NodeContext& ctx) { ctx.set_timer(0, 1); };
    net.add_node(a);
    const Trace& trace = net.run_until_idle(0);
    CHECK(trace.empty());
    CHECK(net.exhausted());
    CHECK(a.timers.empty());
}

TEST_CASE("sim: sending to an unregistered endpoint throws") {
    NetworkPolicy policy;
    SimNetwork net(policy);
    ScriptNode a("A");
    bool threw = false;
    a.on_start = [&](NodeContext& ctx) {
        try {
            ctx.send(NodeId("ghost"), req("k|A|1|x"));
        } catch (const Error& e) {
            threw = e.code() == Errc::UnknownEndpoint;
        }
    };
    net.add_node(a);
    net.run_until_idle(10);
    CHECK(threw);
}

TEST_CASE("sim: equal-tick events process in enqueue order") {
    NetworkPolicy policy;
    policy.latency = {3, 3};
    SimNetwork net(policy);
    ScriptNode a("A"), b("B"), c("C");
    a.on_start = [&](NodeContext& ctx) { ctx.send(NodeId("C"), req("k|A|1|fromA")); };
    b.on_start = [&](NodeContext& ctx) { ctx.send(NodeId("C"), req("k|B|1|fromB")); };
    net.add_node(a);
    net.add_node(b);
    net.add_node(c);
    net.run_until_idle(100);
    REQUIRE(c.received.size() == 2);
    // Nodes start in id order, so A's send enqueued first.
    CHECK(c.received[0].body == "k|A|1|fromA");
    CHECK(c.received[1].body == "k|B|1|fromB");
}

TEST_CASE("sim: large messages survive fragmentation on the wire") {
    NetworkPolicy policy;
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    std::string body = "k|A|1|";
    body += std::string(70000, 'z'); // hundreds of frames
    a.on_start = [&](NodeContext& ctx) { ctx.send(NodeId("B"), req(body)); };
    net.add_node(a);
    net.add_node(b);
    net.run_until_idle(1000);
    REQUIRE(b.received.size() == 1);
    CHECK(b.received[0].body == body);
}

TEST_CASE("sim: tamper hook corrupts frames and the codec rejects them") {
    NetworkPolicy policy;
    policy.tamper = [](const NodeId&, const NodeId&, std::vector<std::uint8_t>& bytes) {
        bytes[0] = 0x55; // invalid direction byte
        return true;
    };
    SimNetwork net(policy);
    ScriptNode a("A"), b("B");
    a.on_start = [&](NodeContext& ctx) { ctx.send(NodeId("B"), req("k|A|1|x")); };
    net.add_node(a);
    net.add_node(b);
    const Trace& trace = net.run_until_idle(1000);
    CHECK(b.received.empty());
    bool saw_codec_error = false;
    for (const TraceEvent& event : trace)
        if (event.kind == "codec_error") saw_codec_error = true;
    CHECK(saw_codec_error);
}

TEST_CASE("trace_to_jsonl: one line per event, fixed schema") {
    Trace trace{{5, "send", "A", "B", 2, "Challenge"}};
    CHECK(trace_to_jsonl(trace) ==
          "{\"cycle\":2,\"detail\":\"Challenge\",\"from\":\"A\",\"kind\":\"send\","
          "\"tick\":5,\"to\":\"B\"}\n");
}
