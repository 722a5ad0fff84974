// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "porch/error.hpp"
#include "porch/sha256.hpp"
#include "porch/types.hpp"

namespace porch::ledger {

enum class Quantity : std::uint8_t { Vm, Vp, P, Q };

const char* quantity_name(Quantity q);
std::optional<Quantity> quantity_from(std::string_view token);

// Fixed 6-decimal rendering shared by every node, so identical measurements
// hash to identical bytes. Negative zero normalizes to "0.000000".
std::string format_value(double value);

struct MeasurementRecord {
    std::uint32_t bus = 0;
    Quantity quantity = Quantity::Vm;
    std::uint32_t index = 0;
    double value = 0.0;

    // "bus,quantity,index,value"
    std::string canonical() const;

    friend auto operator<=>(const MeasurementRecord&, const MeasurementRecord&) = default;
};

// One relay's telemetry for one cycle. Records are kept sorted by
// (bus, quantity, index); duplicate triples are rejected.
class MeasurementSet {
public:
    MeasurementSet() = default;
    MeasurementSet(NodeId node, std::uint64_t cycle,
                   std::vector<MeasurementRecord> records);

    const NodeId& node() const { return node_; }
    std::uint64_t cycle() const { return cycle_; }
    const std::vector<MeasurementRecord>& records() const { return records_; }

    // "node:cycle|rec;rec;..."
    std::string canonical() const;

    friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;

private:
    NodeId node_;
    std::uint64_t cycle_ = 0;
    std::vector<MeasurementRecord> records_;
};

std::optional<MeasurementSet> parse_measurement_set(std::string_view text);

enum class HashMode { Single, Double };

const char* hash_mode_name(HashMode mode);
std::optional<HashMode> hash_mode_from(std::string_view token);

struct BlockHeader {
    std::uint64_t index = 0;
    std::int64_t timestamp = 0; // ms since epoch, or virtual ticks in simulation
    std::string previous_hash;  // 64-char lowercase hex
    std::string merkle_root;    // 64-char lowercase hex
    std::uint64_t nonce = 0;    // vestigial; always 0

    // "index|timestamp|previous_hash|merkle_root|nonce"
    std::string canonical() const;

    friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

struct Block {
    BlockHeader header;
    std::vector<MeasurementSet> payload;
    std::string current_hash;

    friend bool operator==(const Block&, const Block&) = default;
};

bool is_hex_digest(std::string_view s);

// Merkle tree: leaf hash = sha256_hex(leaf); parents hash the UTF-8 bytes of
// the two child hex strings concatenated; an odd node pairs with itself.
std::string merkle_root(std::span<const std::string> leaves);

std::string block_hash(const BlockHeader& header, HashMode mode);

// Merkle root over the canonical serializations of the payload sets,
// in payload order.
std::string payload_merkle_root(std::span<const MeasurementSet> payload);

// Fixed, reproducible genesis: index 0, zero previous hash, empty payload
// with a sentinel root, nonce 0, timestamp 0.
Block genesis_block(HashMode mode);

Block create_block(const Block& parent, std::vector<MeasurementSet> payload,
                   std::int64_t timestamp, HashMode mode);

std::string block_to_json(const Block& block);
Block block_from_json(std::string_view text); // throws Error(ParseError)

enum class ViolationKind { BadLink, BadIndex, BadRoot, BadHash, BadTimestamp, BadGenesis };

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    std::uint64_t block_index = 0;
    ViolationKind kind = ViolationKind::BadHash;

    friend bool operator==(const Violation&, const Violation&) = default;
};

class Chain {
public:
    explicit Chain(HashMode mode = HashMode::Single);

    HashMode hash_mode() const { return mode_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& tip() const { return blocks_.back(); }
    std::size_t size() const { return blocks_.size(); }

    void append(Block block);

    // Re-derives every root, hash and link; violations are data, not faults.
    std::vector<Violation> validate() const;
    bool valid() const { return validate().empty(); }

    std::string to_json() const;
    static Chain from_json(std::string_view text); // throws Error(ParseError)

    friend bool operator==(const Chain&, const Chain&) = default;

    // Test hook: direct access for tamper experiments.
    std::vector<Block>& mutable_blocks() { return blocks_; }

private:
    HashMode mode_;
    std::vector<Block> blocks_;
};

} // namespace porch::ledger
