// SPDX-License-Identifier: Apache-2.0

#include "porch/harness.hpp"

#include <charconv>

#include "json.hpp"
#include "porch/error.hpp"

namespace porch::harness {

std::string trace_to_jsonl(const Trace& trace) {
    std::string out;
    for (const TraceEvent& event : trace) {
        const nlohmann::json line = {{"tick", event.tick},   {"kind", event.kind},
                                     {"from", event.from},   {"to", event.to},
                                     {"cycle", event.cycle}, {"detail", event.detail}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::pair<std::string, std::uint64_t> peek_body(std::string_view body) {
    const std::size_t p1 = body.find('|');
    if (p1 == std::string_view::npos) return {"", 0};
    const std::size_t p2 = body.find('|', p1 + 1);
    if (p2 == std::string_view::npos) return {"", 0};
    const std::size_t p3 = body.find('|', p2 + 1);
    if (p3 == std::string_view::npos) return {"", 0};
    std::uint64_t cycle = 0;
    const std::string_view num = body.substr(p2 + 1, p3 - p2 - 1);
    std::from_chars(num.data(), num.data() + num.size(), cycle);
    return {std::string(body.substr(0, p1)), cycle};
}

class SimNetwork::Context final : public NodeContext {
public:
    Context(SimNetwork& net, const NodeId& self) : net_(net), self_(self) {}

    Tick now() const override { return net_.now_; }
    std::int64_t timestamp() const override { return net_.now_; }

    void send(const NodeId& to, const dnp3m::Message& message) override {
        net_.deliver_from(self_, to, message, net_.now_);
    }

    void set_timer(Tick delay, std::uint64_t token) override {
        Event event;
        event.tick = net_.now_ + delay;
        event.kind = Event::Kind::Timer;
        event.node = self_;
        event.token = token;
        net_.push(std::move(event));
    }

    void trace(std::string_view kind, std::string_view detail, std::uint64_t cycle) override {
        net_.record(net_.now_, kind, self_.name(), "", cycle, detail);
    }

private:
    SimNetwork& net_;
    NodeId self_;
};

SimNetwork::SimNetwork(NetworkPolicy policy, bool record_trace)
    : policy_(std::move(policy)), rng_(policy_.seed), record_trace_(record_trace) {}

void SimNetwork::add_node(Node& node) {
    NodeSlot slot;
    slot.node = &node;
    const auto [it, inserted] = nodes_.emplace(node.id(), slot);
    (void)it;
    if (!inserted)
        throw Error(Errc::BadConfig, "duplicate node " + node.id().name());
}

SimNetwork::NodeSlot& SimNetwork::slot(const NodeId& id) {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownEndpoint, id.name());
    return it->second;
}

void SimNetwork::push(Event event) {
    event.seq = seq_++;
    queue_.push(std::move(event));
}

void SimNetwork::record(Tick tick, std::string_view kind, std::string_view from,
                        std::string_view to, std::uint64_t cycle, std::string_view detail) {
    if (!record_trace_) return;
    trace_.push_back(TraceEvent{tick, std::string(kind), std::string(from),
                                std::string(to), cycle, std::string(detail)});
}

void SimNetwork::deliver_from(const NodeId& from, const NodeId& to,
                              const dnp3m::Message& message, Tick at) {
    slot(to); // raises UnknownEndpoint before any side effect

    const auto [kind, cycle] = peek_body(message.body);
    record(at, "send", from.name(), to.name(), cycle, kind);

    double drop = policy_.default_drop;
    if (const auto it = policy_.node_drop.find(from); it != policy_.node_drop.end())
        drop = std::max(drop, it->second);
    if (const auto it = policy_.node_drop.find(to); it != policy_.node_drop.end())
        drop = std::max(drop, it->second);
    if (const auto it = policy_.link_drop.find({from, to}); it != policy_.link_drop.end())
        drop = std::max(drop, it->second);
    if (drop > 0.0) {
        const double draw = double(rng_.next() >> 11) * 0x1.0p-53;
        if (draw < drop) {
            record(at, "drop", from.name(), to.name(), cycle, kind);
            return;
        }
    }

    LatencyRange latency = policy_.latency;
    if (const auto it = policy_.link_latency.find({from, to});
        it != policy_.link_latency.end())
        latency = it->second;
    const Tick lat = latency.lo == latency.hi
                         ? latency.lo
                         : Tick(rng_.uniform(std::uint64_t(latency.lo),
                                             std::uint64_t(latency.hi)));

    // Wire bytes: the exact dnp3m encoding, frames back to back.
    std::vector<std::uint8_t> bytes;
    for (const dnp3m::Frame& frame : dnp3m::fragment(message)) {
        const std::vector<std::uint8_t> encoded = dnp3m::encode_frame(frame);
        bytes.insert(bytes.end(), encoded.begin(), encoded.end());
    }
    if (policy_.tamper) policy_.tamper(from, to, bytes);

    // Per-link FIFO: a message never arrives before an earlier one on the
    // same link.
    Tick due = at + lat;
    Tick& floor = link_busy_until_[{from, to}];
    due = std::max(due, floor);
    floor = due;

    Event event;
    event.tick = due;
    event.kind = Event::Kind::Delivery;
    event.node = to;
    event.from = from;
    event.bytes = std::move(bytes);
    push(std::move(event));
}

const Trace& SimNetwork::run_until_idle(Tick max_ticks) {
    exhausted_ = false;
    if (!started_) {
        started_ = true;
        for (auto& [id, nslot] : nodes_) {
            Context ctx(*this, id);
            nslot.node->start(ctx);
        }
    }

    while (!queue_.empty()) {
        if (queue_.top().tick >= max_ticks) {
            exhausted_ = true;
            break;
        }
        Event event = queue_.top();
        queue_.pop();
        now_ = std::max(now_, event.tick);
        NodeSlot& nslot = slot(event.node);
        Context ctx(*this, event.node);

        switch (event.kind) {
        case Event::Kind::Delivery: {
            nslot.inbox.emplace_back(event.from, std::move(event.bytes));
            if (!nslot.process_scheduled) {
                nslot.process_scheduled = true;
                Event proc;
                proc.tick = std::max(now_, nslot.free_at);
                proc.kind = Event::Kind::Process;
                proc.node = event.node;
                push(std::move(proc));
            }
            break;
        }
        case Event::Kind::Process: {
            if (nslot.inbox.empty()) {
                nslot.process_scheduled = false;
                break;
            }
            auto [from, bytes] = std::move(nslot.inbox.front());
            nslot.inbox.pop_front();
            nslot.free_at = now_ + policy_.proc_ticks;

            // Re-frame exactly as a stream receiver would.
            std::vector<dnp3m::Frame> frames;
            std::span<const std::uint8_t> rest(bytes);
            bool ok = true;
            while (!rest.empty()) {
                const dnp3m::DecodeResult decoded = dnp3m::decode_frame(rest);
                if (decoded.status != dnp3m::CodecStatus::Ok) {
                    ok = false;
                    break;
                }
                frames.push_back(decoded.frame);
                rest = rest.subspan(decoded.consumed);
            }
            if (ok) {
                const dnp3m::ReassembleResult message = dnp3m::reassemble(frames);
                if (message.status == dnp3m::CodecStatus::Ok) {
                    const auto [kind, cycle] = peek_body(message.message.body);
                    record(now_, "deliver", from.name(), event.node.name(), cycle, kind);
                    nslot.node->on_message(message.message, ctx);
                } else {
                    ok = false;
                }
            }
            if (!ok)
                record(now_, "codec_error", from.name(), event.node.name(), 0, "");

            if (!nslot.inbox.empty()) {
                Event proc;
                proc.tick = nslot.free_at;
                proc.kind = Event::Kind::Process;
                proc.node = event.node;
                push(std::move(proc));
            } else {
                nslot.process_scheduled = false;
            }
            break;
        }
        case Event::Kind::Timer: {
            record(now_, "timer", event.node.name(), "", 0, std::to_string(event.token));
            nslot.node->on_timer(event.token, ctx);
            break;
        }
        }
    }
    return trace_;
}

} // namespace porch::harness
