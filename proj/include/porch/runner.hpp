// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "porch/harness.hpp"
#include "porch/ledger.hpp"
#include "porch/nodes.hpp"

// Cycle execution end to end: topology construction, measurement sampling,
// transport selection, chain/metrics/trace emission. The CLI is a thin shell
// over this module.
namespace porch::runner {

struct RunConfig {
    std::uint32_t relays = 4;
    std::uint64_t cycles = 10;
    Tick period_ms = 15000; // acquisition cadence; virtual under sim
    std::uint64_t seed = 1;
    std::uint64_t challenge_lo = 0;
    std::uint64_t challenge_hi = 9;
    std::uint32_t k_eligible = 0; // 0 keeps every relay eligible
    ledger::HashMode hash_mode = ledger::HashMode::Single;

    enum class Transport { Sim, Tcp } transport = Transport::Sim;
    Tick latency_ms = 1;                 // per-link fixed latency (sim)
    std::map<std::string, double> drop;  // node name -> drop probability
    Tick await_timeout_ms = 2000;
    Tick proc_ticks = 1;
    std::uint16_t base_port = 20000;

    std::string dataset_path; // empty selects the builtin 9-bus table
    std::string chain_out;
    std::string metrics_out;
    std::string trace_out;
    bool realtime = false;
    bool logical_timestamps = false;
    bool countshare_via_da = false;
    consensus::TiePolicy tie_policy = consensus::TiePolicy::TiedSet;
};

// Throws Error on invalid configurations (the CLI maps that to exit 2).
void validate(const RunConfig& config);

struct RunResult {
    int exit_code = 1;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    bool replicas_identical = false;
    bool chain_valid = false;
    bool control_center_in_sync = false;
    std::vector<nodes::CycleMetrics> metrics;
    std::map<std::string, std::uint64_t> miner_counts;
    std::string da_chain_json;
    std::string metrics_csv;
    harness::Trace trace;
    std::string summary;
    Tick wall_ms = 0; // real elapsed time of the cycle phase
};

RunResult run(const RunConfig& config);

std::string metrics_to_csv(const std::vector<nodes::CycleMetrics>& metrics);

struct MetricsSummary {
    std::size_t cycles = 0;
    std::uint64_t committed = 0;
    double mean_total = 0.0;
    double median_total = 0.0;
    double mean_selection_fraction = 0.0;
    std::map<std::string, std::uint64_t> miner_counts;

    double commit_rate() const {
        return cycles == 0 ? 0.0 : double(committed) / double(cycles);
    }
};

// Throws Error(ParseError) on a malformed or empty metrics file.
MetricsSummary summarize_metrics_csv(std::string_view csv);

std::string format_report(const MetricsSummary& summary);

} // namespace porch::runner
