// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "porch/dnp3m.hpp"
#include "porch/random.hpp"
#include "porch/types.hpp"

// Transport abstraction and the deterministic in-memory network. Nodes are
// single-threaded state machines reacting to (message, timer) events; all
// cross-node interaction goes through a NodeContext. The simulated transport
// drives everything from one event loop under a virtual clock, so identical
// seeds and inputs replay identical traces.
namespace porch::harness {

struct Endpoint {
    NodeId node;
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;
};

struct TraceEvent {
    Tick tick = 0;
    std::string kind; // send, deliver, drop, timer, phase, note
    std::string from;
    std::string to;
    std::uint64_t cycle = 0;
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

// One JSON object per line: {tick, kind, from, to, cycle, detail}.
std::string trace_to_jsonl(const Trace& trace);

class NodeContext {
public:
    virtual ~NodeContext() = default;
    virtual Tick now() const = 0;
    // Block timestamps: virtual ticks under simulation, epoch ms over TCP.
    virtual std::int64_t timestamp() const = 0;
    virtual void send(const NodeId& to, const dnp3m::Message& message) = 0;
    virtual void set_timer(Tick delay, std::uint64_t token) = 0;
    virtual void trace(std::string_view kind, std::string_view detail, std::uint64_t cycle) = 0;
};

class Node {
public:
    virtual ~Node() = default;
    virtual const NodeId& id() const = 0;
    virtual void start(NodeContext&) {}
    virtual void on_message(const dnp3m::Message& message, NodeContext& ctx) = 0;
    virtual void on_timer(std::uint64_t token, NodeContext& ctx) = 0;
};

struct LatencyRange {
    Tick lo = 1;
    Tick hi = 1;
};

using Link = std::pair<NodeId, NodeId>; // from, to

// Reliable ordered links with optional drops. Drops model connection
// failure: one draw per message, all frames of the message share its fate.
// Reordering and duplication are excluded (the framing rides TCP).
struct NetworkPolicy {
    LatencyRange latency;
    std::map<Link, LatencyRange> link_latency;
    double default_drop = 0.0;
    std::map<NodeId, double> node_drop; // either direction
    std::map<Link, double> link_drop;
    std::uint64_t seed = 0;
    // Modeled per-message processing cost: a node handles at most one
    // inbound message per proc_ticks.
    Tick proc_ticks = 1;
    // Test hook: mutate message bytes in flight; return false to leave the
    // message alone.
    std::function<bool(const NodeId& from, const NodeId& to,
                       std::vector<std::uint8_t>& bytes)>
        tamper;
};

class SimNetwork {
public:
    explicit SimNetwork(NetworkPolicy policy, bool record_trace = true);

    void add_node(Node& node); // non-owning; callers keep the state machines

    // Drives all machines until quiescence or until the next event would be
    // due at or past max_ticks. Returns the trace (empty unless recording).
    const Trace& run_until_idle(Tick max_ticks);

    Tick now() const { return now_; }
    const Trace& trace() const { return trace_; }
    bool exhausted() const { return exhausted_; }

private:
    struct Event {
        Tick tick = 0;
        std::uint64_t seq = 0;
        enum class Kind { Delivery, Process, Timer } kind = Kind::Delivery;
        NodeId node; // destination / owner
        NodeId from;
        std::vector<std::uint8_t> bytes;
        std::uint64_t token = 0;
    };
    // Total order: (due tick, enqueue sequence number) breaks ties.
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const {
            if (a.tick != b.tick) return a.tick > b.tick;
            return a.seq > b.seq;
        }
    };

    class Context;
    friend class Context;

    struct NodeSlot {
        Node* node = nullptr;
        std::deque<std::pair<NodeId, std::vector<std::uint8_t>>> inbox;
        Tick free_at = 0;
        bool process_scheduled = false;
    };

    void push(Event event);
    void deliver_from(const NodeId& from, const NodeId& to,
                      const dnp3m::Message& message, Tick at);
    void record(Tick tick, std::string_view kind, std::string_view from,
                std::string_view to, std::uint64_t cycle, std::string_view detail);
    NodeSlot& slot(const NodeId& id);

    NetworkPolicy policy_;
    SeededRandom rng_;
    bool record_trace_;
    std::map<NodeId, NodeSlot> nodes_;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    std::map<Link, Tick> link_busy_until_;
    Trace trace_;
    Tick now_ = 0;
    std::uint64_t seq_ = 0;
    bool exhausted_ = false;
    bool started_ = false;
};

// Kind and cycle pulled from a message body prefix for trace labels; returns
// {"", 0} when the body does not look like "kind|sender|cycle|...".
std::pair<std::string, std::uint64_t> peek_body(std::string_view body);

} // namespace porch::harness
