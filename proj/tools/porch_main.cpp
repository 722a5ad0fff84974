// SPDX-License-Identifier: Apache-2.0
//
// porch — blockchain-backed SCADA data-acquisition runner.
//
//   porch run    execute acquisition cycles and write chain/metrics/trace
//   porch report summarize a metrics CSV

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "porch/runner.hpp"

namespace {

int do_run(porch::runner::RunConfig config, const std::vector<std::string>& drops) {
    if (drops.size() % 2 != 0) {
        std::cerr << "--drop expects pairs: <node> <probability>\n";
        return 2;
    }
    for (std::size_t i = 0; i < drops.size(); i += 2) {
        try {
            config.drop[drops[i]] = std::stod(drops[i + 1]);
        } catch (const std::exception&) {
            std::cerr << "--drop: bad probability '" << drops[i + 1] << "'\n";
            return 2;
        }
    }
    if (const char* env_seed = std::getenv("PORCH_SEED")) {
        try {
            config.seed = std::stoull(env_seed);
        } catch (const std::exception&) {
            std::cerr << "PORCH_SEED: not an integer: '" << env_seed << "'\n";
            return 2;
        }
    }

    try {
        porch::runner::validate(config);
    } catch (const porch::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        const porch::runner::RunResult result = porch::runner::run(config);
        std::cout << result.summary;
        if (result.exit_code != 0)
            std::cerr << "run failed: see summary above for the violated condition\n";
        return result.exit_code;
    } catch (const porch::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int do_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        const auto summary = porch::runner::summarize_metrics_csv(buf.str());
        std::cout << porch::runner::format_report(summary);
        return 0;
    } catch (const porch::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PoRCH data-acquisition engine: relay nodes, an aggregator and a "
                 "control center replicate a measurement blockchain"};
    app.require_subcommand(1);

    porch::runner::RunConfig config;
    std::vector<std::string> drops;
    std::string hash_mode = "single";
    std::string transport = "sim";

    CLI::App* run = app.add_subcommand("run", "execute acquisition cycles");
    run->add_option("--relays", config.relays, "relay count")->capture_default_str();
    run->add_option("--cycles", config.cycles, "cycles to execute")->capture_default_str();
    run->add_option("--period-ms", config.period_ms, "acquisition period")
        ->capture_default_str();
    run->add_option("--seed", config.seed, "base seed (PORCH_SEED overrides)")
        ->capture_default_str();
    run->add_option("--challenge-lo", config.challenge_lo, "challenge lower bound")
        ->capture_default_str();
    run->add_option("--challenge-hi", config.challenge_hi, "challenge upper bound")
        ->capture_default_str();
    run->add_option("--k-eligible", config.k_eligible,
                    "mining-eligible subset size (0 = all relays)")
        ->capture_default_str();
    run->add_option("--hash-mode", hash_mode, "single|double")->capture_default_str();
    run->add_option("--transport", transport, "sim|tcp")->capture_default_str();
    run->add_option("--latency-ms", config.latency_ms, "per-link latency (sim)")
        ->capture_default_str();
    run->add_option("--drop", drops, "drop a node's traffic: <node> <probability>")
        ->expected(-1);
    run->add_option("--dataset", config.dataset_path,
                    "measurement CSV (bus,quantity,index,base,jitter)");
    run->add_option("--chain-out", config.chain_out, "write final chain JSON here");
    run->add_option("--metrics-out", config.metrics_out, "write per-cycle metrics CSV here");
    run->add_option("--trace-out", config.trace_out, "write event trace JSON-lines here");
    run->add_option("--await-timeout-ms", config.await_timeout_ms,
                    "per-phase await budget")
        ->capture_default_str();
    run->add_option("--base-port", config.base_port, "first TCP port (tcp transport)")
        ->capture_default_str();
    run->add_flag("--realtime", config.realtime, "honor wall-clock periods");
    run->add_flag("--logical-timestamps", config.logical_timestamps,
                  "stamp blocks with cycle*1000 for cross-transport comparison");

    std::string metrics_path;
    CLI::App* report = app.add_subcommand("report", "summarize a metrics CSV");
    report->add_option("metrics", metrics_path, "metrics CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        const auto mode = porch::ledger::hash_mode_from(hash_mode);
        if (!mode) {
            std::cerr << "--hash-mode must be 'single' or 'double'\n";
            return 2;
        }
        config.hash_mode = *mode;
        if (transport == "sim") {
            config.transport = porch::runner::RunConfig::Transport::Sim;
        } else if (transport == "tcp") {
            config.transport = porch::runner::RunConfig::Transport::Tcp;
        } else {
            std::cerr << "--transport must be 'sim' or 'tcp'\n";
            return 2;
        }
        return do_run(config, drops);
    }
    return do_report(metrics_path);
}
