// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "porch/consensus.hpp"
#include "porch/dnp3m.hpp"
#include "porch/ledger.hpp"
#include "porch/runner.hpp"

namespace py = pybind11;

namespace {

using namespace porch;

py::bytes encode_frame_py(int direction, const py::bytes& payload) {
    dnp3m::Frame frame;
    frame.direction = direction == 0 ? dnp3m::Direction::Request : dnp3m::Direction::Response;
    const std::string raw = payload;
    frame.payload.assign(raw.begin(), raw.end());
    const std::vector<std::uint8_t> out = dnp3m::encode_frame(frame);
    return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
}

py::dict decode_frame_py(const py::bytes& data) {
    const std::string raw = data;
    const dnp3m::DecodeResult result = dnp3m::decode_frame(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    py::dict out;
    out["status"] = dnp3m::codec_status_name(result.status);
    if (result.status == dnp3m::CodecStatus::Ok) {
        out["direction"] = int(result.frame.direction);
        out["payload"] = py::bytes(reinterpret_cast<const char*>(result.frame.payload.data()),
                                   result.frame.payload.size());
        out["consumed"] = result.consumed;
    }
    return out;
}

std::vector<py::bytes> fragment_py(int direction, const py::bytes& body) {
    dnp3m::Message message;
    message.direction = direction == 0 ? dnp3m::Direction::Request : dnp3m::Direction::Response;
    message.body = std::string(body);
    std::vector<py::bytes> out;
    for (const dnp3m::Frame& frame : dnp3m::fragment(message)) {
        const std::vector<std::uint8_t> encoded = dnp3m::encode_frame(frame);
        out.emplace_back(reinterpret_cast<const char*>(encoded.data()), encoded.size());
    }
    return out;
}

std::string sha256_hex_py(const py::bytes& data) { return sha256_hex(std::string(data)); }

std::string double_sha256_hex_py(const py::bytes& data) {
    return double_sha256_hex(std::string(data));
}

std::string merkle_root_py(const std::vector<py::bytes>& leaves) {
    std::vector<std::string> raw;
    raw.reserve(leaves.size());
    for (const py::bytes& leaf : leaves) raw.emplace_back(leaf);
    return ledger::merkle_root(raw);
}

std::uint32_t count_occurrences_py(const std::string& digest, std::uint64_t challenge) {
    return consensus::count_occurrences(digest, consensus::RandomChallenge{challenge});
}

std::string resolve_counts_py(const std::map<std::string, std::uint32_t>& counts,
                              std::uint64_t seed) {
    std::vector<consensus::CountReport> reports;
    for (const auto& [name, count] : counts)
        reports.push_back({NodeId(name), std::string(64, '0'), count});
    const consensus::SelectionTally tally = consensus::build_tally(reports);
    SeededRandom rng(seed);
    return consensus::resolve(tally, rng).name();
}

std::vector<std::string> choose_eligible_py(std::uint32_t k,
                                            const std::vector<std::string>& names,
                                            std::uint64_t seed) {
    std::vector<NodeId> nodes;
    nodes.reserve(names.size());
    for (const std::string& name : names) nodes.emplace_back(name);
    SeededRandom rng(seed);
    const auto picked = consensus::choose_eligible(
        {k, std::uint32_t(nodes.size())}, nodes, rng);
    std::vector<std::string> out;
    out.reserve(picked.size());
    for (const NodeId& node : picked) out.push_back(node.name());
    return out;
}

std::vector<std::string> validate_chain_py(const std::string& chain_json) {
    const ledger::Chain chain = ledger::Chain::from_json(chain_json);
    std::vector<std::string> out;
    for (const ledger::Violation& violation : chain.validate())
        out.push_back(std::to_string(violation.block_index) + ":" +
                      ledger::violation_kind_name(violation.kind));
    return out;
}

py::dict run_simulation_py(std::uint32_t relays, std::uint64_t cycles, std::uint64_t seed,
                           Tick period_ms, std::uint32_t k_eligible,
                           const std::string& hash_mode, const std::string& chain_out,
                           const std::string& metrics_out) {
    runner::RunConfig config;
    config.relays = relays;
    config.cycles = cycles;
    config.seed = seed;
    config.period_ms = period_ms;
    config.k_eligible = k_eligible;
    const auto mode = ledger::hash_mode_from(hash_mode);
    if (!mode) throw Error(Errc::BadConfig, "hash_mode must be single|double");
    config.hash_mode = *mode;
    config.chain_out = chain_out;
    config.metrics_out = metrics_out;

    const runner::RunResult result = runner::run(config);
    py::dict out;
    out["exit_code"] = result.exit_code;
    out["committed"] = result.committed;
    out["aborted"] = result.aborted;
    out["replicas_identical"] = result.replicas_identical;
    out["chain_valid"] = result.chain_valid;
    out["chain_json"] = result.da_chain_json;
    out["metrics_csv"] = result.metrics_csv;
    out["summary"] = result.summary;
    py::dict miners;
    for (const auto& [name, count] : result.miner_counts)
        miners[py::str(name)] = count;
    out["miner_counts"] = miners;
    return out;
}

} // namespace

PYBIND11_MODULE(_porch, m) {
    m.doc() = "Blockchain-backed SCADA data acquisition: DNP3m framing, "
              "measurement ledger and random-count mining-node selection";

    py::register_exception<porch::Error>(m, "PorchError");

    m.def("encode_frame", &encode_frame_py, py::arg("direction"), py::arg("payload"),
          "Encode one DNP3m frame (direction 0=request, 1=response)");
    m.def("decode_frame", &decode_frame_py, py::arg("data"),
          "Decode one frame; returns {status, direction, payload, consumed}");
    m.def("fragment", &fragment_py, py::arg("direction"), py::arg("body"),
          "Split a message body into encoded frames");
    m.def("sha256_hex", &sha256_hex_py, py::arg("data"));
    m.def("double_sha256_hex", &double_sha256_hex_py, py::arg("data"));
    m.def("merkle_root", &merkle_root_py, py::arg("leaves"),
          "Merkle root over raw leaf byte strings");
    m.def("count_occurrences", &count_occurrences_py, py::arg("digest"),
          py::arg("challenge"),
          "Non-overlapping occurrences of the challenge's decimal rendering");
    m.def("resolve_counts", &resolve_counts_py, py::arg("counts"), py::arg("seed"),
          "Mining-node decision over a {name: count} map");
    m.def("choose_eligible", &choose_eligible_py, py::arg("k"), py::arg("names"),
          py::arg("seed"), "Uniform k-subset of node names, sorted");
    m.def("validate_chain", &validate_chain_py, py::arg("chain_json"),
          "Violations ('index:kind') found in a chain JSON document");
    m.def("run_simulation", &run_simulation_py, py::arg("relays") = 4,
          py::arg("cycles") = 10, py::arg("seed") = 1, py::arg("period_ms") = 100,
          py::arg("k_eligible") = 0, py::arg("hash_mode") = "single",
          py::arg("chain_out") = "", py::arg("metrics_out") = "",
          "Run a full simulated acquisition; returns a result summary dict");
}
