// SPDX-License-Identifier: Apache-2.0

#include "porch/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "porch/dataset.hpp"
#include "porch/tcp_transport.hpp"

namespace porch::runner {

void validate(const RunConfig& config) {
    if (config.relays < 2) throw Error(Errc::BadConfig, "need at least 2 relays");
    if (config.cycles < 1) throw Error(Errc::BadConfig, "need at least 1 cycle");
    if (config.k_eligible > config.relays)
        throw Error(Errc::BadConfig, "k-eligible exceeds relay count");
    if (config.challenge_lo > config.challenge_hi)
        throw Error(Errc::BadConfig, "challenge range inverted");
    if (config.period_ms < 1) throw Error(Errc::BadConfig, "period must be positive");
    for (const auto& [node, p] : config.drop)
        if (p < 0.0 || p > 1.0)
            throw Error(Errc::BadConfig, "drop probability for " + node + " outside [0,1]");
    if (!config.drop.empty() && config.transport == RunConfig::Transport::Tcp)
        throw Error(Errc::BadConfig, "drop injection requires the sim transport");
}

namespace {

std::vector<NodeId> relay_ids(std::uint32_t count) {
    std::vector<NodeId> out;
    out.reserve(count);
    for (std::uint32_t i = 1; i <= count; ++i) out.emplace_back("R" + std::to_string(i));
    return out;
}

std::string fraction_string(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

struct Topology {
    nodes::ProtocolConfig protocol;
    std::vector<std::unique_ptr<nodes::RelayNode>> relays;
    std::unique_ptr<nodes::AggregatorNode> aggregator;
    std::unique_ptr<nodes::ControlCenterNode> control;
};

Topology build_topology(const RunConfig& config) {
    Topology topo;
    topo.protocol.relays = relay_ids(config.relays);
    topo.protocol.await_timeout = config.await_timeout_ms;
    topo.protocol.challenge_lo = config.challenge_lo;
    topo.protocol.challenge_hi = config.challenge_hi;
    topo.protocol.k_eligible = config.k_eligible;
    topo.protocol.hash_mode = config.hash_mode;
    topo.protocol.tie_policy = config.tie_policy;
    topo.protocol.countshare_via_da = config.countshare_via_da;
    topo.protocol.logical_timestamps = config.logical_timestamps;

    const dataset::BusDataset ds = config.dataset_path.empty()
                                       ? dataset::BusDataset::builtin()
                                       : dataset::BusDataset::from_file(config.dataset_path);
    const auto partition = dataset::default_partition(topo.protocol.relays);

    for (const NodeId& id : topo.protocol.relays) {
        const std::vector<std::uint32_t> buses = partition.at(id);
        const std::uint64_t seed = config.seed;
        nodes::Sampler sampler = [ds, id, buses, seed](std::uint64_t cycle) {
            return dataset::sample_relay(ds, id, buses, cycle, seed);
        };
        topo.relays.push_back(std::make_unique<nodes::RelayNode>(
            id, topo.protocol, std::move(sampler)));
    }
    topo.aggregator = std::make_unique<nodes::AggregatorNode>(
        topo.protocol.aggregator, topo.protocol,
        std::make_unique<SeededRandom>(combine_seed(config.seed, 0xda)));
    topo.control = std::make_unique<nodes::ControlCenterNode>(
        topo.protocol.control, topo.protocol, config.period_ms, config.cycles);
    return topo;
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::ParseError, "cannot write " + path);
    out.write(content.data(), std::streamsize(content.size()));
}

} // namespace

std::string metrics_to_csv(const std::vector<nodes::CycleMetrics>& metrics) {
    std::string out =
        "cycle,total_ms,acq_ms,check_ms,select_ms,mine_ms,verify_ms,add_ms,"
        "selection_fraction,outcome,miner\n";
    for (const nodes::CycleMetrics& m : metrics) {
        out += std::to_string(m.cycle);
        out += ',';
        out += std::to_string(m.total);
        out += ',';
        out += std::to_string(m.acquisition);
        out += ',';
        out += std::to_string(m.chain_check);
        out += ',';
        out += std::to_string(m.selection);
        out += ',';
        out += std::to_string(m.mining);
        out += ',';
        out += std::to_string(m.verification);
        out += ',';
        out += std::to_string(m.addition);
        out += ',';
        out += fraction_string(m.selection_fraction());
        out += ',';
        out += m.outcome();
        out += ',';
        out += m.miner ? m.miner->name() : "";
        out += '\n';
    }
    return out;
}

RunResult run(const RunConfig& config) {
    validate(config);
    Topology topo = build_topology(config);

    const auto wall_start = std::chrono::steady_clock::now();
    harness::Trace trace;

    if (config.transport == RunConfig::Transport::Sim) {
        harness::NetworkPolicy policy;
        policy.latency = {config.latency_ms, config.latency_ms};
        policy.seed = combine_seed(config.seed, 0x5e7);
        policy.proc_ticks = config.proc_ticks;
        for (const auto& [name, p] : config.drop) policy.node_drop[NodeId(name)] = p;

        const bool record = !config.trace_out.empty();
        harness::SimNetwork net(policy, record);
        for (auto& relay : topo.relays) net.add_node(*relay);
        net.add_node(*topo.aggregator);
        net.add_node(*topo.control);

        constexpr Tick kHorizon = INT64_MAX / 4;
        if (config.realtime) {
            // Pace virtual time against the wall clock.
            while (true) {
                const Tick elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                         std::chrono::steady_clock::now() - wall_start)
                                         .count();
                net.run_until_idle(elapsed);
                if (!net.exhausted()) break;
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
            }
        } else {
            net.run_until_idle(kHorizon);
        }
        trace = net.trace();
    } else {
        std::vector<harness::Node*> members;
        members.push_back(topo.aggregator.get()); // DA takes the base port
        for (auto& relay : topo.relays) members.push_back(relay.get());
        members.push_back(topo.control.get());

        tcp::TcpCluster::Options options;
        options.base_port = config.base_port;
        options.record_trace = !config.trace_out.empty();
        tcp::TcpCluster cluster(members, options);

        const nodes::AggregatorNode& da = *topo.aggregator;
        const nodes::ControlCenterNode& cc = *topo.control;
        const std::uint64_t want = config.cycles;
        const auto done = [&]() {
            if (da.cycles_finalized() < want) return false;
            std::uint64_t committed = 0;
            for (const nodes::CycleMetrics& m : da.metrics())
                if (m.committed) ++committed;
            return cc.updates_received() >= committed;
        };
        const Tick budget =
            Tick(config.cycles) * (config.period_ms + 8 * config.await_timeout_ms) + 5000;
        cluster.run(done, budget);
        trace = cluster.trace();
    }

    RunResult result;
    result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - wall_start)
                         .count();
    result.metrics = topo.aggregator->metrics();
    result.trace = std::move(trace);

    for (const nodes::CycleMetrics& m : result.metrics) {
        if (m.committed) {
            ++result.committed;
            if (m.miner) ++result.miner_counts[m.miner->name()];
        } else {
            ++result.aborted;
        }
    }

    result.da_chain_json = topo.aggregator->chain().to_json();
    result.replicas_identical = true;
    for (const auto& relay : topo.relays)
        if (relay->chain().to_json() != result.da_chain_json)
            result.replicas_identical = false;
    result.chain_valid = topo.aggregator->chain().valid();
    result.control_center_in_sync =
        result.committed == 0 ||
        (topo.control->last_tip() == topo.aggregator->chain().tip().current_hash &&
         topo.control->last_length() == topo.aggregator->chain().size());

    const bool faults_injected =
        std::any_of(config.drop.begin(), config.drop.end(),
                    [](const auto& kv) { return kv.second > 0.0; });
    const bool commits_ok = faults_injected || result.aborted == 0;
    result.exit_code = (result.replicas_identical && result.chain_valid &&
                        result.control_center_in_sync && commits_ok)
                           ? 0
                           : 1;

    // Summary text; the CLI prints this verbatim.
    std::ostringstream summary;
    const std::size_t total = result.metrics.size();
    summary << "cycles: " << total << "  committed: " << result.committed
            << "  aborted: " << result.aborted << "\n";
    summary << "chain length: " << topo.aggregator->chain().size()
            << " blocks (genesis included), hash mode "
            << ledger::hash_mode_name(config.hash_mode) << "\n";
    summary << "replicas identical: " << (result.replicas_identical ? "yes" : "NO")
            << ", chain valid: " << (result.chain_valid ? "yes" : "NO")
            << ", control center in sync: "
            << (result.control_center_in_sync ? "yes" : "NO") << "\n";
    if (total > 0) {
        double fraction = 0.0;
        double mean_total = 0.0;
        for (const nodes::CycleMetrics& m : result.metrics) {
            fraction += m.selection_fraction();
            mean_total += double(m.total);
        }
        fraction /= double(total);
        mean_total /= double(total);
        summary << "mean cycle time: " << fraction_string(mean_total)
                << (config.transport == RunConfig::Transport::Sim ? " ticks" : " ms")
                << "\n";
        summary << "mean selection fraction: " << fraction_string(fraction)
                << " (reference prototype figure ~0.75)\n";
    }
    if (!result.miner_counts.empty()) {
        summary << "miner counts:";
        for (const auto& [name, count] : result.miner_counts)
            summary << ' ' << name << '=' << count;
        summary << "\n";
    }
    result.summary = summary.str();

    result.metrics_csv = metrics_to_csv(result.metrics);
    if (!config.chain_out.empty()) write_file(config.chain_out, result.da_chain_json);
    if (!config.metrics_out.empty()) write_file(config.metrics_out, result.metrics_csv);
    if (!config.trace_out.empty())
        write_file(config.trace_out, harness::trace_to_jsonl(result.trace));
    return result;
}

MetricsSummary summarize_metrics_csv(std::string_view csv) {
    MetricsSummary summary;
    std::vector<double> totals;
    double fraction_sum = 0.0;

    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < csv.size()) {
        const std::size_t eol = csv.find('\n', pos);
        std::string_view line = csv.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? csv.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (!line.starts_with("cycle,"))
                throw Error(Errc::ParseError, "metrics CSV missing header");
            header_seen = true;
            continue;
        }

        std::vector<std::string_view> cols;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (cols.size() != 11)
            throw Error(Errc::ParseError, "metrics CSV row with wrong column count");

        const auto as_double = [](std::string_view s) {
            double out = 0.0;
            std::string buf(s);
            char* end = nullptr;
            out = std::strtod(buf.c_str(), &end);
            if (end != buf.c_str() + buf.size())
                throw Error(Errc::ParseError, "bad number in metrics CSV");
            return out;
        };
        totals.push_back(as_double(cols[1]));
        fraction_sum += as_double(cols[8]);
        if (cols[9] == "Committed") {
            ++summary.committed;
            if (!cols[10].empty()) ++summary.miner_counts[std::string(cols[10])];
        }
        ++summary.cycles;
    }
    if (summary.cycles == 0) throw Error(Errc::ParseError, "metrics CSV has no rows");

    summary.mean_total = 0.0;
    for (double t : totals) summary.mean_total += t;
    summary.mean_total /= double(totals.size());
    std::sort(totals.begin(), totals.end());
    const std::size_t mid = totals.size() / 2;
    summary.median_total = totals.size() % 2 == 1
                               ? totals[mid]
                               : (totals[mid - 1] + totals[mid]) / 2.0;
    summary.mean_selection_fraction = fraction_sum / double(summary.cycles);
    return summary;
}

std::string format_report(const MetricsSummary& summary) {
    std::ostringstream out;
    out << "cycles: " << summary.cycles << "\n";
    out << "commit rate: " << fraction_string(summary.commit_rate()) << "\n";
    out << "mean cycle time: " << fraction_string(summary.mean_total) << "\n";
    out << "median cycle time: " << fraction_string(summary.median_total) << "\n";
    out << "mean selection fraction: "
        << fraction_string(summary.mean_selection_fraction)
        << " (reference prototype figure ~0.75)\n";
    out << "miner counts (fairness):";
    if (summary.miner_counts.empty()) {
        out << " none";
    } else {
        for (const auto& [name, count] : summary.miner_counts)
            out << ' ' << name << '=' << count;
    }
    out << "\n";
    return out.str();
}

} // namespace porch::runner
