// SPDX-License-Identifier: Apache-2.0

#include "porch/nodes.hpp"

#include <algorithm>
#include <charconv>

namespace porch::nodes {

using messages::MsgKind;
using messages::ProtocolMessage;

const char* phase_name(Phase phase) {
    switch (phase) {
    case Phase::Idle: return "Idle";
    case Phase::Acquiring: return "Acquiring";
    case Phase::ChainChecking: return "ChainChecking";
    case Phase::Selecting: return "Selecting";
    case Phase::Mining: return "Mining";
    case Phase::Verifying: return "Verifying";
    case Phase::Adding: return "Adding";
    case Phase::Done: return "Done";
    case Phase::Aborted: return "Aborted";
    }
    return "?";
}

const char* abort_reason_name(AbortReason reason) {
    switch (reason) {
    case AbortReason::Timeout: return "Timeout";
    case AbortReason::ChainMismatch: return "ChainMismatch";
    case AbortReason::CountMismatch: return "CountMismatch";
    case AbortReason::VoteDisagreement: return "VoteDisagreement";
    case AbortReason::VerificationFailed: return "VerificationFailed";
    case AbortReason::DuplicateResponse: return "DuplicateResponse";
    case AbortReason::UnknownRelay: return "UnknownRelay";
    case AbortReason::BadBlock: return "BadBlock";
    case AbortReason::Superseded: return "Superseded";
    }
    return "?";
}

std::string CycleMetrics::outcome() const {
    if (committed) return "Committed";
    std::string out = "Aborted(";
    out += abort_reason ? abort_reason_name(*abort_reason) : "Unknown";
    if (flagged) {
        out += ':';
        out += flagged->name();
    }
    out += ')';
    return out;
}

void ProtocolNode::on_message(const dnp3m::Message& message, harness::NodeContext& ctx) {
    const std::optional<ProtocolMessage> parsed = messages::parse(message);
    if (!parsed) {
        ctx.trace("protocol_error", "unparseable message", 0);
        return;
    }
    handle(*parsed, ctx);
}

std::optional<ledger::ViolationKind> check_block_extends(const ledger::Chain& chain,
                                                         const ledger::Block& block) {
    const ledger::Block& tip = chain.tip();
    if (block.header.previous_hash != tip.current_hash)
        return ledger::ViolationKind::BadLink;
    if (block.header.index != tip.header.index + 1)
        return ledger::ViolationKind::BadIndex;
    if (block.header.timestamp < tip.header.timestamp)
        return ledger::ViolationKind::BadTimestamp;
    if (block.payload.empty() ||
        block.header.merkle_root != ledger::payload_merkle_root(block.payload))
        return ledger::ViolationKind::BadRoot;
    if (block.current_hash != ledger::block_hash(block.header, chain.hash_mode()))
        return ledger::ViolationKind::BadHash;
    return std::nullopt;
}

namespace {

bool parse_u64_field(const std::string& text, std::uint64_t& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_u32_field(const std::string& text, std::uint32_t& out) {
    std::uint64_t wide = 0;
    if (!parse_u64_field(text, wide) || wide > UINT32_MAX) return false;
    out = std::uint32_t(wide);
    return true;
}

} // namespace

// ---------------------------------------------------------------------------
// RelayNode

RelayNode::RelayNode(NodeId id, ProtocolConfig config, Sampler sampler)
    : RelayNode(std::move(id), std::move(config), std::move(sampler), Faults{}) {}

RelayNode::RelayNode(NodeId id, ProtocolConfig config, Sampler sampler, Faults faults)
    : ProtocolNode(std::move(id)), config_(std::move(config)),
      sampler_(std::move(sampler)), faults_(faults), chain_(config_.hash_mode) {}

std::int64_t RelayNode::block_timestamp(harness::NodeContext& ctx) const {
    return config_.logical_timestamps ? std::int64_t(cycle_) * 1000 : ctx.timestamp();
}

void RelayNode::arm_timer(harness::NodeContext& ctx) {
    ctx.set_timer(config_.await_timeout, ++timer_gen_);
}

void RelayNode::reset_to_idle(harness::NodeContext& ctx, std::string_view why) {
    ctx.trace("relay_idle", why, cycle_);
    busy_ = false;
    voted_ = false;
    challenge_.reset();
    eligible_.clear();
    shares_.clear();
    ++timer_gen_;
}

void RelayNode::on_timer(std::uint64_t token, harness::NodeContext& ctx) {
    if (token != timer_gen_ || !busy_) return;
    reset_to_idle(ctx, "timeout");
}

void RelayNode::begin_cycle(std::uint64_t cycle, harness::NodeContext& ctx) {
    busy_ = true;
    cycle_ = cycle;
    voted_ = false;
    challenge_.reset();
    eligible_.clear();
    shares_.clear();
    my_data_ = sampler_(cycle);
    send(ctx, config_.aggregator,
         messages::make_message(MsgKind::DataResponse, id(), cycle_,
                                {{"data", my_data_.canonical()}}));
    arm_timer(ctx);
}

void RelayNode::maybe_vote(harness::NodeContext& ctx) {
    if (voted_ || !challenge_ || eligible_.empty()) return;
    for (const NodeId& node : eligible_)
        if (!shares_.contains(node)) return;

    std::vector<consensus::CountReport> reports;
    reports.reserve(eligible_.size());
    for (const NodeId& node : eligible_) reports.push_back(shares_.at(node));
    const consensus::SelectionTally tally =
        consensus::build_tally(reports, config_.tie_policy);

    std::string vote = tally.decision.kind == consensus::DecisionKind::Unique
                           ? tally.decision.candidates.front().name()
                           : "RANDOM";
    if (faults_.vote_override) vote = faults_.vote_override->name();
    send(ctx, config_.aggregator,
         messages::make_message(MsgKind::Vote, id(), cycle_, {{"vote", vote}}));
    voted_ = true;
    arm_timer(ctx);
}

void RelayNode::handle(const ProtocolMessage& message, harness::NodeContext& ctx) {
    switch (message.kind) {
    case MsgKind::DataRequest: {
        if (message.sender != config_.aggregator) return;
        if (cycle_ > 0 && message.cycle <= cycle_) return; // stale or replayed
        begin_cycle(message.cycle, ctx);
        return;
    }
    case MsgKind::ChainCheck: {
        if (!busy_ || message.cycle != cycle_ || message.sender != config_.aggregator) return;
        const bool ok = message.get("tip") == chain_.tip().current_hash &&
                        message.get("len") == std::to_string(chain_.size());
        send(ctx, config_.aggregator,
             messages::make_message(MsgKind::ChainCheckReply, id(), cycle_,
                                    {{"ok", ok ? "1" : "0"}}));
        arm_timer(ctx);
        return;
    }
    case MsgKind::Challenge: {
        if (!busy_ || message.cycle != cycle_ || message.sender != config_.aggregator) return;
        std::uint64_t value = 0;
        if (!parse_u64_field(message.get("value"), value)) return;
        const auto eligible = messages::split_names(message.get("eligible"));
        if (!eligible || eligible->empty()) return;
        challenge_ = consensus::RandomChallenge{value};
        eligible_ = *eligible;

        if (std::find(eligible_.begin(), eligible_.end(), id()) != eligible_.end()) {
            consensus::CountReport report =
                consensus::make_report(id(), my_data_, *challenge_);
            if (faults_.count_delta != 0) {
                const std::int64_t shifted =
                    std::int64_t(report.count) + faults_.count_delta;
                report.count = shifted < 0 ? 0 : std::uint32_t(shifted);
            }
            if (faults_.corrupt_digest) report.digest = sha256_hex(report.digest);
            shares_[id()] = report;

            const ProtocolMessage share = messages::make_message(
                MsgKind::CountShare, id(), cycle_,
                {{"digest", report.digest}, {"count", std::to_string(report.count)}});
            if (config_.countshare_via_da) {
                send(ctx, config_.aggregator, share);
            } else {
                for (const NodeId& peer : config_.relays)
                    if (peer != id()) send(ctx, peer, share);
                send(ctx, config_.aggregator, share);
            }
        }
        arm_timer(ctx);
        maybe_vote(ctx);
        return;
    }
    case MsgKind::CountShare: {
        // Shares may overtake the challenge on a slow link; buffer them.
        if (!busy_ || message.cycle != cycle_) return;
        consensus::CountReport report;
        report.node = message.sender;
        report.digest = message.get("digest");
        if (!parse_u32_field(message.get("count"), report.count)) return;
        shares_[message.sender] = report;
        maybe_vote(ctx);
        return;
    }
    case MsgKind::MiningAssign: {
        if (!busy_ || message.cycle != cycle_ || message.sender != config_.aggregator) return;
        if (message.get("miner") != id().name()) return;

        const std::string plain = config_.cipher->decrypt(message.get("payload"));
        std::vector<ledger::MeasurementSet> payload;
        std::string_view rest = plain;
        while (!rest.empty()) {
            const std::size_t nl = rest.find('\n');
            const std::string_view item =
                nl == std::string_view::npos ? rest : rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            auto set = ledger::parse_measurement_set(item);
            if (!set) {
                reset_to_idle(ctx, "bad mining payload");
                return;
            }
            payload.push_back(std::move(*set));
        }
        if (payload.empty()) {
            reset_to_idle(ctx, "empty mining payload");
            return;
        }

        ledger::Block block;
        try {
            block = ledger::create_block(chain_.tip(), std::move(payload),
                                         block_timestamp(ctx), config_.hash_mode);
        } catch (const Error&) {
            reset_to_idle(ctx, "block build failed");
            return;
        }
        if (faults_.tamper_block && !block.payload.empty() &&
            !block.payload.front().records().empty()) {
            // Flip one payload value after hashing: the root no longer covers
            // the bytes.
            std::vector<ledger::MeasurementRecord> records =
                block.payload.front().records();
            records.front().value += 1.0;
            block.payload.front() = ledger::MeasurementSet(
                block.payload.front().node(), block.payload.front().cycle(), records);
        }
        send(ctx, config_.aggregator,
             messages::make_message(MsgKind::NewBlock, id(), cycle_,
                                    {{"block", ledger::block_to_json(block)}}));
        arm_timer(ctx);
        return;
    }
    case MsgKind::VerifyRequest: {
        if (!busy_ || message.cycle != cycle_ || message.sender != config_.aggregator) return;
        ledger::Block block;
        try {
            block = ledger::block_from_json(message.get("block"));
        } catch (const Error&) {
            send(ctx, config_.aggregator,
                 messages::make_message(MsgKind::VerifyReply, id(), cycle_,
                                        {{"ok", "0"}, {"kind", "BadBlock"}}));
            arm_timer(ctx);
            return;
        }
        const auto bad = check_block_extends(chain_, block);
        std::vector<std::pair<std::string, std::string>> fields{
            {"ok", bad ? "0" : "1"}};
        if (bad) fields.emplace_back("kind", ledger::violation_kind_name(*bad));
        send(ctx, config_.aggregator,
             messages::make_message(MsgKind::VerifyReply, id(), cycle_, std::move(fields)));
        arm_timer(ctx);
        return;
    }
    case MsgKind::AddBlock: {
        if (message.direction != dnp3m::Direction::Request) return;
        if (!busy_ || message.cycle != cycle_ || message.sender != config_.aggregator) return;
        ledger::Block block;
        try {
            block = ledger::block_from_json(message.get("block"));
        } catch (const Error&) {
            reset_to_idle(ctx, "bad add-block payload");
            return;
        }
        if (check_block_extends(chain_, block)) {
            // Do not extend a chain the block does not fit; the missing ack
            // aborts the cycle at the aggregator.
            reset_to_idle(ctx, "add-block rejected");
            return;
        }
        chain_.append(std::move(block));
        send(ctx, config_.aggregator, messages::make_ack(MsgKind::AddBlock, id(), cycle_));
        reset_to_idle(ctx, "committed");
        return;
    }
    default:
        return;
    }
}

// ---------------------------------------------------------------------------
// AggregatorNode

AggregatorNode::AggregatorNode(NodeId id, ProtocolConfig config,
                               std::unique_ptr<RandomSource> rng)
    : ProtocolNode(std::move(id)), config_(std::move(config)), rng_(std::move(rng)),
      chain_(config_.hash_mode) {}

void AggregatorNode::arm_timer(harness::NodeContext& ctx) {
    ctx.set_timer(config_.await_timeout, ++timer_gen_);
}

void AggregatorNode::broadcast(harness::NodeContext& ctx, const ProtocolMessage& message) {
    for (const NodeId& relay : config_.relays) send(ctx, relay, message);
}

void AggregatorNode::transition(Phase next, harness::NodeContext& ctx) {
    phase_ = next;
    phase_entered_[next] = ctx.now();
    ctx.trace("phase", phase_name(next), cycle_);
}

void AggregatorNode::begin_cycle(std::uint64_t cycle, harness::NodeContext& ctx) {
    cycle_ = cycle;
    cycle_start_ = ctx.now();
    phase_entered_.clear();
    collected_.clear();
    check_ok_.clear();
    eligible_.clear();
    challenge_.reset();
    shares_.clear();
    votes_.clear();
    tally_.reset();
    miner_.reset();
    pending_block_.reset();
    verify_ok_.clear();
    add_acks_.clear();
    current_ = CycleMetrics{};
    current_.cycle = cycle;

    transition(Phase::Acquiring, ctx);
    broadcast(ctx, messages::make_message(MsgKind::DataRequest, id(), cycle_));
    arm_timer(ctx);
}

void AggregatorNode::finalize(harness::NodeContext& ctx) {
    const Tick end = ctx.now();
    current_.total = end - cycle_start_;

    // Phase boundaries partition [start, end]; durations sum to the total.
    static constexpr Phase kOrder[] = {Phase::Acquiring,  Phase::ChainChecking,
                                       Phase::Selecting,  Phase::Mining,
                                       Phase::Verifying,  Phase::Adding};
    Tick* const slots[] = {&current_.acquisition, &current_.chain_check,
                           &current_.selection,   &current_.mining,
                           &current_.verification, &current_.addition};
    std::vector<std::pair<std::size_t, Tick>> entered;
    for (std::size_t i = 0; i < std::size(kOrder); ++i) {
        const auto it = phase_entered_.find(kOrder[i]);
        if (it != phase_entered_.end()) entered.emplace_back(i, it->second);
    }
    for (std::size_t j = 0; j < entered.size(); ++j) {
        const Tick stop = (j + 1 < entered.size()) ? entered[j + 1].second : end;
        *slots[entered[j].first] = stop - entered[j].second;
    }

    metrics_.push_back(current_);
    phase_ = Phase::Idle;
    ctx.trace("phase", phase_name(Phase::Idle), cycle_);
    ++timer_gen_;
}

void AggregatorNode::abort_cycle(AbortReason reason, std::optional<NodeId> flagged,
                                 harness::NodeContext& ctx) {
    current_.committed = false;
    current_.abort_reason = reason;
    current_.flagged = std::move(flagged);
    std::string detail = abort_reason_name(reason);
    if (current_.flagged) detail += ":" + current_.flagged->name();
    ctx.trace("abort", detail, cycle_);
    transition(Phase::Aborted, ctx);
    finalize(ctx);
}

std::vector<NodeId> AggregatorNode::missing_nodes() const {
    std::vector<NodeId> missing;
    const auto absent_from = [&](const auto& got) {
        for (const NodeId& relay : config_.relays)
            if (!got.contains(relay)) missing.push_back(relay);
    };
    switch (phase_) {
    case Phase::Acquiring: absent_from(collected_); break;
    case Phase::ChainChecking: absent_from(check_ok_); break;
    case Phase::Selecting:
        for (const NodeId& node : eligible_)
            if (!shares_.contains(node)) missing.push_back(node);
        for (const NodeId& relay : config_.relays)
            if (!votes_.contains(relay)) missing.push_back(relay);
        break;
    case Phase::Mining:
        if (miner_) missing.push_back(*miner_);
        break;
    case Phase::Verifying:
        for (const NodeId& relay : config_.relays)
            if (relay != *miner_ && !verify_ok_.contains(relay)) missing.push_back(relay);
        break;
    case Phase::Adding: absent_from(add_acks_); break;
    default: break;
    }
    return missing;
}

void AggregatorNode::on_timer(std::uint64_t token, harness::NodeContext& ctx) {
    if (token != timer_gen_ || phase_ == Phase::Idle) return;
    const std::vector<NodeId> missing = missing_nodes();
    abort_cycle(AbortReason::Timeout,
                missing.empty() ? std::nullopt : std::optional<NodeId>(missing.front()),
                ctx);
}

void AggregatorNode::start_selection(harness::NodeContext& ctx) {
    transition(Phase::Selecting, ctx);
    const consensus::EligibilityConfig eligibility{config_.eligible_count(),
                                                   std::uint32_t(config_.relays.size())};
    eligible_ = consensus::choose_eligible(eligibility, config_.relays, *rng_);
    challenge_ = consensus::generate_challenge(*rng_, config_.challenge_lo,
                                               config_.challenge_hi);
    shares_.clear();
    votes_.clear();
    tally_.reset();
    broadcast(ctx, messages::make_message(
                       MsgKind::Challenge, id(), cycle_,
                       {{"value", challenge_->rendered()},
                        {"eligible", messages::join_names(eligible_)}}));
    arm_timer(ctx);
}

void AggregatorNode::maybe_finish_selection(harness::NodeContext& ctx) {
    if (!tally_ || votes_.size() != config_.relays.size()) return;

    const std::string expected =
        tally_->decision.kind == consensus::DecisionKind::Unique
            ? tally_->decision.candidates.front().name()
            : "RANDOM";
    for (const NodeId& relay : config_.relays) {
        if (votes_.at(relay) != expected) {
            abort_cycle(AbortReason::VoteDisagreement, relay, ctx);
            return;
        }
    }

    miner_ = consensus::resolve(*tally_, *rng_);
    current_.miner = miner_;
    transition(Phase::Mining, ctx);

    // Aggregate = canonical sets ordered by node id, one per line.
    std::string aggregate;
    for (const auto& [node, set] : collected_) {
        if (!aggregate.empty()) aggregate += '\n';
        aggregate += set.canonical();
    }
    send(ctx, *miner_,
         messages::make_message(MsgKind::MiningAssign, id(), cycle_,
                                {{"miner", miner_->name()},
                                 {"payload", config_.cipher->encrypt(aggregate)}}));
    arm_timer(ctx);
}

void AggregatorNode::handle(const ProtocolMessage& message, harness::NodeContext& ctx) {
    const bool from_relay =
        std::find(config_.relays.begin(), config_.relays.end(), message.sender) !=
        config_.relays.end();

    switch (message.kind) {
    case MsgKind::DataRequest: {
        if (message.sender != config_.control) return;
        if (cycle_ > 0 && message.cycle <= cycle_) return; // stale or replayed
        if (phase_ != Phase::Idle) abort_cycle(AbortReason::Superseded, std::nullopt, ctx);
        begin_cycle(message.cycle, ctx);
        return;
    }
    case MsgKind::DataResponse: {
        if (phase_ != Phase::Acquiring || message.cycle != cycle_) return;
        if (!from_relay) {
            abort_cycle(AbortReason::UnknownRelay, message.sender, ctx);
            return;
        }
        if (collected_.contains(message.sender)) {
            abort_cycle(AbortReason::DuplicateResponse, message.sender, ctx);
            return;
        }
        const auto set = ledger::parse_measurement_set(message.get("data"));
        if (!set || set->node() != message.sender || set->cycle() != cycle_) {
            ctx.trace("ignored", "bad data response", cycle_);
            return;
        }
        collected_.emplace(message.sender, *set);
        if (collected_.size() == config_.relays.size()) {
            transition(Phase::ChainChecking, ctx);
            check_ok_.clear();
            broadcast(ctx, messages::make_message(
                               MsgKind::ChainCheck, id(), cycle_,
                               {{"tip", chain_.tip().current_hash},
                                {"len", std::to_string(chain_.size())}}));
            arm_timer(ctx);
        }
        return;
    }
    case MsgKind::ChainCheckReply: {
        if (phase_ != Phase::ChainChecking || message.cycle != cycle_ || !from_relay) return;
        if (message.get("ok") != "1") {
            abort_cycle(AbortReason::ChainMismatch, message.sender, ctx);
            return;
        }
        check_ok_.insert(message.sender);
        if (check_ok_.size() == config_.relays.size()) start_selection(ctx);
        return;
    }
    case MsgKind::CountShare: {
        if (phase_ != Phase::Selecting || message.cycle != cycle_) return;
        if (std::find(eligible_.begin(), eligible_.end(), message.sender) ==
            eligible_.end()) {
            ctx.trace("ignored", "share from non-eligible node", cycle_);
            return;
        }
        if (shares_.contains(message.sender)) {
            abort_cycle(AbortReason::DuplicateResponse, message.sender, ctx);
            return;
        }
        consensus::CountReport report;
        report.node = message.sender;
        report.digest = message.get("digest");
        if (!parse_u32_field(message.get("count"), report.count)) {
            ctx.trace("ignored", "bad count share", cycle_);
            return;
        }
        // Independent recomputation over the data collected in acquisition.
        if (!consensus::verify_report(report, collected_.at(message.sender), *challenge_)) {
            abort_cycle(AbortReason::CountMismatch, message.sender, ctx);
            return;
        }
        shares_.emplace(message.sender, report);
        if (config_.countshare_via_da) {
            const ProtocolMessage forward = messages::make_message(
                MsgKind::CountShare, message.sender, cycle_,
                {{"digest", report.digest}, {"count", std::to_string(report.count)}});
            for (const NodeId& relay : config_.relays)
                if (relay != message.sender) send(ctx, relay, forward);
        }
        if (shares_.size() == eligible_.size()) {
            std::vector<consensus::CountReport> reports;
            reports.reserve(shares_.size());
            for (const auto& [node, report_] : shares_) reports.push_back(report_);
            tally_ = consensus::build_tally(reports, config_.tie_policy);
            maybe_finish_selection(ctx);
        }
        return;
    }
    case MsgKind::Vote: {
        if (phase_ != Phase::Selecting || message.cycle != cycle_ || !from_relay) return;
        if (votes_.contains(message.sender)) {
            abort_cycle(AbortReason::DuplicateResponse, message.sender, ctx);
            return;
        }
        votes_.emplace(message.sender, message.get("vote"));
        maybe_finish_selection(ctx);
        return;
    }
    case MsgKind::NewBlock: {
        if (phase_ != Phase::Mining || message.cycle != cycle_ || !miner_ ||
            message.sender != *miner_)
            return;
        ledger::Block block;
        try {
            block = ledger::block_from_json(message.get("block"));
        } catch (const Error&) {
            abort_cycle(AbortReason::BadBlock, miner_, ctx);
            return;
        }
        transition(Phase::Verifying, ctx);
        if (check_block_extends(chain_, block)) {
            abort_cycle(AbortReason::VerificationFailed, miner_, ctx);
            return;
        }
        pending_block_ = std::move(block);
        verify_ok_.clear();
        const ProtocolMessage request = messages::make_message(
            MsgKind::VerifyRequest, id(), cycle_,
            {{"block", message.get("block")}});
        for (const NodeId& relay : config_.relays)
            if (relay != *miner_) send(ctx, relay, request);
        arm_timer(ctx);
        return;
    }
    case MsgKind::VerifyReply: {
        if (phase_ != Phase::Verifying || message.cycle != cycle_ || !from_relay ||
            message.sender == *miner_)
            return;
        if (verify_ok_.contains(message.sender)) {
            abort_cycle(AbortReason::DuplicateResponse, message.sender, ctx);
            return;
        }
        if (message.get("ok") != "1") {
            abort_cycle(AbortReason::VerificationFailed, message.sender, ctx);
            return;
        }
        verify_ok_.insert(message.sender);
        if (verify_ok_.size() == config_.relays.size() - 1) {
            transition(Phase::Adding, ctx);
            chain_.append(*pending_block_); // commit point
            add_acks_.clear();
            broadcast(ctx, messages::make_message(
                               MsgKind::AddBlock, id(), cycle_,
                               {{"block", ledger::block_to_json(*pending_block_)}}));
            arm_timer(ctx);
        }
        return;
    }
    case MsgKind::AddBlock: {
        if (message.direction != dnp3m::Direction::Response) return;
        if (phase_ != Phase::Adding || message.cycle != cycle_ || !from_relay) return;
        add_acks_.insert(message.sender);
        if (add_acks_.size() == config_.relays.size()) {
            send(ctx, config_.control,
                 messages::make_message(
                     MsgKind::ChainUpdate, id(), cycle_,
                     {{"tip", chain_.tip().current_hash},
                      {"len", std::to_string(chain_.size())},
                      {"block", ledger::block_to_json(chain_.tip())}}));
            transition(Phase::Done, ctx);
            current_.committed = true;
            finalize(ctx);
        }
        return;
    }
    default:
        return;
    }
}

// ---------------------------------------------------------------------------
// ControlCenterNode

ControlCenterNode::ControlCenterNode(NodeId id, ProtocolConfig config, Tick period,
                                     std::uint64_t cycles)
    : ProtocolNode(std::move(id)), config_(std::move(config)), period_(period),
      total_cycles_(cycles) {}

void ControlCenterNode::start(harness::NodeContext& ctx) {
    if (total_cycles_ > 0) ctx.set_timer(0, 1);
}

void ControlCenterNode::on_timer(std::uint64_t /*token*/, harness::NodeContext& ctx) {
    if (cycles_started_ >= total_cycles_) return;
    ++cycles_started_;
    send(ctx, config_.aggregator,
         messages::make_message(MsgKind::DataRequest, id(), cycles_started_));
    if (cycles_started_ < total_cycles_) ctx.set_timer(period_, cycles_started_ + 1);
}

void ControlCenterNode::handle(const ProtocolMessage& message, harness::NodeContext& ctx) {
    if (message.kind != MsgKind::ChainUpdate || message.sender != config_.aggregator)
        return;
    ++updates_received_;
    last_tip_ = message.get("tip");
    std::uint64_t length = 0;
    parse_u64_field(message.get("len"), length);
    last_length_ = length;
    ctx.trace("chain_update", last_tip_, message.cycle);
}

} // namespace porch::nodes
