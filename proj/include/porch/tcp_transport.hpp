// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "porch/harness.hpp"

// Real-socket transport for localhost runs: every node gets a listening port
// (allocated from 20000 upward by default) and the wire carries the exact
// dnp3m frame bytes, so an external dissector sees 2-byte-headed payloads.
// One poll loop owns every socket; node machines still observe a
// single-threaded world.
namespace porch::tcp {

class TcpCluster {
public:
    struct Options {
        std::uint16_t base_port = 20000;
        bool record_trace = false;
        // Extra endpoints reachable by name but not hosted here (test taps).
        std::map<NodeId, harness::Endpoint> external;
    };

    // Binds one listener per node; throws Error(BindFailure) on collision.
    TcpCluster(const std::vector<harness::Node*>& nodes, Options options);
    ~TcpCluster();

    TcpCluster(const TcpCluster&) = delete;
    TcpCluster& operator=(const TcpCluster&) = delete;

    const std::map<NodeId, harness::Endpoint>& endpoints() const { return endpoints_; }
    const harness::Trace& trace() const { return trace_; }

    // Pumps sockets and timers until `done` returns true or the wall budget
    // elapses; returns false on budget exhaustion.
    bool run(const std::function<bool()>& done, Tick max_wall_ms);

private:
    struct Listener;
    struct Connection;
    class Context;
    friend class Context;

    struct TimerEntry {
        Tick deadline = 0;
        NodeId node;
        std::uint64_t token = 0;
    };

    void send_bytes(const NodeId& from, const NodeId& to,
                    const std::vector<std::uint8_t>& bytes);
    void pump_connection(Connection& conn);
    Tick now_ms() const;

    Options options_;
    std::map<NodeId, harness::Node*> nodes_;
    std::map<NodeId, harness::Endpoint> endpoints_;
    std::vector<std::unique_ptr<Listener>> listeners_;
    std::vector<std::unique_ptr<Connection>> connections_;
    std::map<std::pair<NodeId, NodeId>, int> outgoing_; // (from,to) -> fd
    std::vector<TimerEntry> timers_;
    harness::Trace trace_;
    std::int64_t start_ms_ = 0;
};

} // namespace porch::tcp
