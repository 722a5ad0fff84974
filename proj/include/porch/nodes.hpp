// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "porch/consensus.hpp"
#include "porch/harness.hpp"
#include "porch/ledger.hpp"
#include "porch/messages.hpp"
#include "porch/random.hpp"

// Role state machines: Relay Server, Data Aggregator (DA), Control Center
// (CC). One acquisition cycle runs acquisition -> chain check -> mining-node
// selection -> mining -> verification -> addition, driven entirely by
// messages and timers; any misstep aborts the cycle and nothing is appended.
namespace porch::nodes {

enum class Phase : std::uint8_t {
    Idle,
    Acquiring,
    ChainChecking,
    Selecting,
    Mining,
    Verifying,
    Adding,
    Done,
    Aborted,
};

const char* phase_name(Phase phase);

enum class AbortReason : std::uint8_t {
    Timeout,
    ChainMismatch,
    CountMismatch,
    VoteDisagreement,
    VerificationFailed,
    DuplicateResponse,
    UnknownRelay,
    BadBlock,
    Superseded,
};

const char* abort_reason_name(AbortReason reason);

// Pluggable byte transform for the aggregated payload. The protocol asserts
// confidentiality without fixing a scheme, so the seam is the contract;
// the default passes bytes through unchanged.
class Cipher {
public:
    virtual ~Cipher() = default;
    virtual std::string encrypt(std::string_view plain) const = 0;
    virtual std::string decrypt(std::string_view wire) const = 0;
};

class IdentityCipher final : public Cipher {
public:
    std::string encrypt(std::string_view plain) const override { return std::string(plain); }
    std::string decrypt(std::string_view wire) const override { return std::string(wire); }
};

struct ProtocolConfig {
    std::vector<NodeId> relays;
    NodeId aggregator{"DA"};
    NodeId control{"CC"};
    Tick await_timeout = 2000;        // per-phase await budget
    std::uint64_t challenge_lo = 0;   // single decimal digit by default
    std::uint64_t challenge_hi = 9;
    std::uint32_t k_eligible = 0;     // 0 selects every relay
    ledger::HashMode hash_mode = ledger::HashMode::Single;
    consensus::TiePolicy tie_policy = consensus::TiePolicy::TiedSet;
    // Route CountShare through the DA instead of relay-to-relay broadcast.
    bool countshare_via_da = false;
    // Stamp blocks with cycle*1000 instead of the context clock, so chains
    // from different transports compare bit-for-bit.
    bool logical_timestamps = false;
    std::shared_ptr<const Cipher> cipher = std::make_shared<IdentityCipher>();

    std::uint32_t eligible_count() const {
        return k_eligible == 0 ? std::uint32_t(relays.size()) : k_eligible;
    }
};

// Per-cycle timing and outcome, recorded by the DA. Phase durations
// partition the cycle, so they sum exactly to the total.
struct CycleMetrics {
    std::uint64_t cycle = 0;
    Tick total = 0;
    Tick acquisition = 0;
    Tick chain_check = 0;
    Tick selection = 0;
    Tick mining = 0;
    Tick verification = 0;
    Tick addition = 0;
    bool committed = false;
    std::optional<AbortReason> abort_reason;
    std::optional<NodeId> flagged;
    std::optional<NodeId> miner;

    double selection_fraction() const {
        return total > 0 ? double(selection) / double(total) : 0.0;
    }
    std::string outcome() const; // "Committed" or "Aborted(Reason)" / "Aborted(Reason:Node)"
};

// Common plumbing: parse inbound wire messages, serialize outbound ones.
class ProtocolNode : public harness::Node {
public:
    explicit ProtocolNode(NodeId id) : id_(std::move(id)) {}
    const NodeId& id() const override { return id_; }

    void on_message(const dnp3m::Message& message, harness::NodeContext& ctx) final;

protected:
    virtual void handle(const messages::ProtocolMessage& message,
                        harness::NodeContext& ctx) = 0;

    void send(harness::NodeContext& ctx, const NodeId& to,
              const messages::ProtocolMessage& message) {
        ctx.send(to, messages::serialize(message));
    }

private:
    NodeId id_;
};

using Sampler = std::function<ledger::MeasurementSet(std::uint64_t cycle)>;

// Field-side node: answers data requests, votes in selection, mines when
// assigned, and replicates the chain.
class RelayNode final : public ProtocolNode {
public:
    // Test-only dials for fault injection; all off by default.
    struct Faults {
        std::int32_t count_delta = 0;        // misreport own count
        bool corrupt_digest = false;         // report a foreign digest
        std::optional<NodeId> vote_override; // vote against own tally
        bool tamper_block = false;           // mine a block with a bad root
    };

    RelayNode(NodeId id, ProtocolConfig config, Sampler sampler);
    RelayNode(NodeId id, ProtocolConfig config, Sampler sampler, Faults faults);

    const ledger::Chain& chain() const { return chain_; }
    ledger::Chain& mutable_chain() { return chain_; }

    void on_timer(std::uint64_t token, harness::NodeContext& ctx) override;

protected:
    void handle(const messages::ProtocolMessage& message, harness::NodeContext& ctx) override;

private:
    void begin_cycle(std::uint64_t cycle, harness::NodeContext& ctx);
    void reset_to_idle(harness::NodeContext& ctx, std::string_view why);
    void arm_timer(harness::NodeContext& ctx);
    void maybe_vote(harness::NodeContext& ctx);
    std::int64_t block_timestamp(harness::NodeContext& ctx) const;

    ProtocolConfig config_;
    Sampler sampler_;
    Faults faults_;
    ledger::Chain chain_;

    bool busy_ = false; // serving a cycle
    std::uint64_t cycle_ = 0;
    ledger::MeasurementSet my_data_;
    std::optional<consensus::RandomChallenge> challenge_;
    std::vector<NodeId> eligible_;
    std::map<NodeId, consensus::CountReport> shares_;
    bool voted_ = false;
    std::uint64_t timer_gen_ = 0;
};

// Coordinator: collects data, checks replica agreement, runs the selection,
// assigns the miner, orchestrates verification and addition, reports to CC.
class AggregatorNode final : public ProtocolNode {
public:
    AggregatorNode(NodeId id, ProtocolConfig config,
                   std::unique_ptr<RandomSource> rng);

    const ledger::Chain& chain() const { return chain_; }
    ledger::Chain& mutable_chain() { return chain_; }
    Phase phase() const { return phase_; }
    const std::vector<CycleMetrics>& metrics() const { return metrics_; }
    std::uint64_t cycles_finalized() const { return metrics_.size(); }

    void on_timer(std::uint64_t token, harness::NodeContext& ctx) override;

protected:
    void handle(const messages::ProtocolMessage& message, harness::NodeContext& ctx) override;

private:
    void begin_cycle(std::uint64_t cycle, harness::NodeContext& ctx);
    void transition(Phase next, harness::NodeContext& ctx);
    void abort_cycle(AbortReason reason, std::optional<NodeId> flagged,
                     harness::NodeContext& ctx);
    void finalize(harness::NodeContext& ctx);
    void arm_timer(harness::NodeContext& ctx);
    void start_selection(harness::NodeContext& ctx);
    void maybe_finish_selection(harness::NodeContext& ctx);
    void broadcast(harness::NodeContext& ctx, const messages::ProtocolMessage& message);
    std::vector<NodeId> missing_nodes() const;

    ProtocolConfig config_;
    std::unique_ptr<RandomSource> rng_;
    ledger::Chain chain_;

    Phase phase_ = Phase::Idle;
    std::uint64_t cycle_ = 0;
    std::map<Phase, Tick> phase_entered_;
    Tick cycle_start_ = 0;
    std::map<NodeId, ledger::MeasurementSet> collected_;
    std::set<NodeId> check_ok_;
    std::vector<NodeId> eligible_;
    std::optional<consensus::RandomChallenge> challenge_;
    std::map<NodeId, consensus::CountReport> shares_;
    std::map<NodeId, std::string> votes_;
    std::optional<consensus::SelectionTally> tally_;
    std::optional<NodeId> miner_;
    std::optional<ledger::Block> pending_block_;
    std::set<NodeId> verify_ok_;
    std::set<NodeId> add_acks_;
    CycleMetrics current_;
    std::vector<CycleMetrics> metrics_;
    std::uint64_t timer_gen_ = 0;
};

// Initiator: kicks off a cycle every period and receives the updated chain.
class ControlCenterNode final : public ProtocolNode {
public:
    ControlCenterNode(NodeId id, ProtocolConfig config, Tick period, std::uint64_t cycles);

    std::uint64_t updates_received() const { return updates_received_; }
    const std::string& last_tip() const { return last_tip_; }
    std::uint64_t last_length() const { return last_length_; }

    void start(harness::NodeContext& ctx) override;
    void on_timer(std::uint64_t token, harness::NodeContext& ctx) override;

protected:
    void handle(const messages::ProtocolMessage& message, harness::NodeContext& ctx) override;

private:
    ProtocolConfig config_;
    Tick period_;
    std::uint64_t total_cycles_;
    std::uint64_t cycles_started_ = 0;
    std::uint64_t updates_received_ = 0;
    std::string last_tip_;
    std::uint64_t last_length_ = 0;
};

// Shared replica-side block admission check; nullopt means the block extends
// the chain cleanly.
std::optional<ledger::ViolationKind> check_block_extends(const ledger::Chain& chain,
                                                         const ledger::Block& block);

} // namespace porch::nodes
