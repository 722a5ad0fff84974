// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "porch/ledger.hpp"

using namespace porch;
using namespace porch::ledger;

namespace {

// Frozen from an independent SHA-256 implementation (python hashlib).
constexpr const char* kEmptySha =
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
constexpr const char* kAbcSha =
    "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
constexpr const char* kEmptyDouble =
    "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456";
constexpr const char* kGenesisRoot =
    "901131d838b17aac0f7885b81e03cbdc9f5157a00343d30ab22083685ed1416a";
// merkle over raw leaves "A","B" and "A","B","C" (duplicate-last rule),
// hand-composed with the same tool.
constexpr const char* kRootAB =
    "b30ab174f7459cdd40a3acdf15d0c9444fec2adcfb9d579aa154c084885edd0a";
constexpr const char* kRootABC =
    "bd144551df2d311a947adbb0fc4b4bfa7bd76ae0e60095d88a8f79a3e3986af6";

MeasurementSet tiny_set(const char* node, std::uint64_t cycle, double value) {
    return MeasurementSet(NodeId(node), cycle,
                          {{1, Quantity::Vm, 11, value}, {1, Quantity::P, 13, 71.95}});
}

Chain build_chain(std::size_t blocks, HashMode mode = HashMode::Single) {
    Chain chain(mode);
    for (std::size_t i = 1; i <= blocks; ++i) {
        std::vector<MeasurementSet> payload{
            tiny_set("R1", i, 1.0 + double(i) * 0.001),
            tiny_set("R2", i, 2.0 + double(i) * 0.001)};
        chain.append(create_block(chain.tip(), payload, std::int64_t(i) * 1000, mode));
    }
    return chain;
}

bool has_violation(const std::vector<Violation>& violations, std::uint64_t index,
                   ViolationKind kind) {
    for (const Violation& v : violations)
        if (v.block_index == index && v.kind == kind) return true;
    return false;
}

} // namespace

TEST_CASE("sha256: standard vectors") {
    CHECK(sha256_hex(std::string_view{}) == kEmptySha);
    CHECK(sha256_hex(std::string_view{"abc"}) == kAbcSha);
    CHECK(sha256_hex(std::string_view{"abc"}) == sha256_hex(std::string_view{"abc"}));
    // Multi-block inputs (> 64 bytes) exercise the padding paths.
    CHECK(sha256_hex(std::string(1000, 'a')) ==
          "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
}

TEST_CASE("double_sha256: definition and distinctness") {
    CHECK(double_sha256_hex(std::string_view{}) == kEmptyDouble);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::string data(rng() % 200, '\0');
        for (auto& c : data) c = char(rng());
        // Definitional route: second pass over the raw digest bytes.
        const Digest first = sha256(data);
        const std::string composed =
            sha256_hex(std::span<const std::uint8_t>(first.data(), first.size()));
        CHECK(double_sha256_hex(data) == composed);
        CHECK(double_sha256_hex(data) != sha256_hex(data));
    }
}

TEST_CASE("merkle_root: single, pair, odd duplicate") {
    const std::vector<std::string> one{"A"};
    CHECK(merkle_root(one) == sha256_hex(std::string_view{"A"}));

    const std::vector<std::string> two{"A", "B"};
    CHECK(merkle_root(two) == kRootAB);

    const std::vector<std::string> three{"A", "B", "C"};
    CHECK(merkle_root(three) == kRootABC);

    CHECK_THROWS_AS(merkle_root(std::vector<std::string>{}), Error);
}

TEST_CASE("merkle_root: permutation sensitivity") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> leaves;
        const std::size_t n = 2 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i)
            leaves.push_back("leaf-" + std::to_string(rng()));
        std::vector<std::string> shuffled = leaves;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (shuffled != leaves) CHECK(merkle_root(leaves) != merkle_root(shuffled));
    }
}

TEST_CASE("format_value: fixed six decimals") {
    CHECK(format_value(1.0) == "1.000000");
    CHECK(format_value(-3.65) == "-3.650000");
    CHECK(format_value(-0.0000001) == "0.000000"); // negative zero normalizes
    CHECK(format_value(163.0) == "163.000000");
}

TEST_CASE("canonical serializations") {
    const MeasurementRecord rec{1, Quantity::Vm, 11, 1.02};
    CHECK(rec.canonical() == "1,Vm,11,1.020000");

    // Records sort by (bus, quantity, index) regardless of input order.
    const MeasurementSet set(NodeId("R1"), 5,
                             {{1, Quantity::P, 13, 71.95}, {1, Quantity::Vm, 11, 1.0}});
    CHECK(set.canonical() == "R1:5|1,Vm,11,1.000000;1,P,13,71.950000");

    CHECK_THROWS_AS(MeasurementSet(NodeId("R1"), 1,
                                   {{1, Quantity::Vm, 11, 1.0},
                                    {1, Quantity::Vm, 11, 2.0}}),
                    Error);

    BlockHeader header;
    header.index = 3;
    header.timestamp = 1500;
    header.previous_hash = std::string(64, 'a');
    header.merkle_root = std::string(64, 'b');
    header.nonce = 0;
    CHECK(header.canonical() ==
          "3|1500|" + std::string(64, 'a') + "|" + std::string(64, 'b') + "|0");
}

TEST_CASE("parse_measurement_set: inverse of canonical") {
    const MeasurementSet set = tiny_set("R3", 9, -4.017);
    const auto parsed = parse_measurement_set(set.canonical());
    REQUIRE(parsed.has_value());
    CHECK(parsed->canonical() == set.canonical());

    CHECK(!parse_measurement_set("").has_value());
    CHECK(!parse_measurement_set("R1:x|").has_value());
    CHECK(!parse_measurement_set("R1:1|1,Zz,11,0.5").has_value());
    // Empty record list is legal (a relay may own no buses).
    const auto empty = parse_measurement_set("R9:4|");
    REQUIRE(empty.has_value());
    CHECK(empty->records().empty());
}

TEST_CASE("block_hash: determinism and nonce sensitivity") {
    BlockHeader header;
    header.index = 1;
    header.timestamp = 42;
    header.previous_hash = std::string(64, '0');
    header.merkle_root = kGenesisRoot;
    CHECK(block_hash(header, HashMode::Single) == block_hash(header, HashMode::Single));
    CHECK(is_hex_digest(block_hash(header, HashMode::Single)));

    BlockHeader other = header;
    other.nonce = 1;
    CHECK(block_hash(other, HashMode::Single) != block_hash(header, HashMode::Single));

    CHECK(block_hash(header, HashMode::Double) == double_sha256_hex(header.canonical()));
}

TEST_CASE("genesis block is fixed and reproducible") {
    const Block genesis = genesis_block(HashMode::Single);
    CHECK(genesis.header.index == 0);
    CHECK(genesis.header.previous_hash == std::string(64, '0'));
    CHECK(genesis.header.merkle_root == kGenesisRoot);
    CHECK(genesis.header.nonce == 0);
    CHECK(genesis.payload.empty());
    CHECK(genesis.current_hash == block_hash(genesis.header, HashMode::Single));
    CHECK(genesis == genesis_block(HashMode::Single));
    CHECK(genesis_block(HashMode::Double).current_hash != genesis.current_hash);
}

TEST_CASE("create_block: links, errors, payload sensitivity") {
    const Block genesis = genesis_block(HashMode::Single);
    const std::vector<MeasurementSet> payload{tiny_set("R1", 1, 1.0)};
    const Block block = create_block(genesis, payload, 100, HashMode::Single);
    CHECK(block.header.index == 1);
    CHECK(block.header.previous_hash == genesis.current_hash);
    CHECK(block.header.nonce == 0);

    const std::vector<MeasurementSet> other{tiny_set("R1", 1, 1.5)};
    const Block sibling = create_block(genesis, other, 100, HashMode::Single);
    CHECK(sibling.header.merkle_root != block.header.merkle_root);
    CHECK(sibling.current_hash != block.current_hash);

    CHECK_THROWS_AS(create_block(genesis, {}, 100, HashMode::Single), Error);
    CHECK_THROWS_AS(create_block(block, payload, 99, HashMode::Single), Error);
}

TEST_CASE("validate_chain: fresh chain is clean") {
    CHECK(build_chain(5).validate().empty());
    CHECK(build_chain(5, HashMode::Double).validate().empty());
}

TEST_CASE("validate_chain: payload flip surfaces BadRoot and BadHash") {
    Chain chain = build_chain(5);
    Block& third = chain.mutable_blocks()[3];
    std::vector<MeasurementRecord> records = third.payload[0].records();
    records[0].value += 0.5;
    third.payload[0] = MeasurementSet(third.payload[0].node(),
                                      third.payload[0].cycle(), records);
    const auto violations = chain.validate();
    CHECK(has_violation(violations, 3, ViolationKind::BadRoot));
    // The header still matches its own hash; the root mismatch is the tell.
    CHECK(!has_violation(violations, 3, ViolationKind::BadHash));
}

TEST_CASE("validate_chain: replaced hash breaks the link") {
    Chain chain = build_chain(5);
    chain.mutable_blocks()[2].current_hash = sha256_hex(std::string_view{"bogus"});
    const auto violations = chain.validate();
    CHECK(has_violation(violations, 2, ViolationKind::BadHash));
    CHECK(has_violation(violations, 3, ViolationKind::BadLink));
}

TEST_CASE("validate_chain: index, timestamp and genesis tampering") {
    Chain chain = build_chain(4);
    chain.mutable_blocks()[2].header.index = 7;
    CHECK(has_violation(chain.validate(), 7, ViolationKind::BadIndex));

    Chain regression = build_chain(4);
    regression.mutable_blocks()[3].header.timestamp = 1;
    CHECK(has_violation(regression.validate(), 3, ViolationKind::BadTimestamp));

    Chain genesis_tamper = build_chain(2);
    genesis_tamper.mutable_blocks()[0].header.nonce = 9;
    CHECK(has_violation(genesis_tamper.validate(), 0, ViolationKind::BadGenesis));
}

TEST_CASE("tamper evidence: random single-field mutations never pass") {
    std::mt19937_64 rng(99);
    Chain chain = build_chain(8);
    for (int trial = 0; trial < 80; ++trial) {
        Chain copy = chain;
        auto& blocks = copy.mutable_blocks();
        Block& victim = blocks[1 + rng() % (blocks.size() - 1)];
        switch (rng() % 6) {
        case 0: victim.header.index += 1 + rng() % 5; break;
        case 1: victim.header.timestamp += 1 + std::int64_t(rng() % 100); break;
        case 2: victim.header.previous_hash[5] =
                    victim.header.previous_hash[5] == 'f' ? '0' : 'f';
                break;
        case 3: victim.header.merkle_root[0] =
                    victim.header.merkle_root[0] == 'f' ? '0' : 'f';
                break;
        case 4: victim.header.nonce += 1; break;
        case 5: {
            std::vector<MeasurementRecord> records = victim.payload[0].records();
            records[0].value += 1.0;
            victim.payload[0] = MeasurementSet(victim.payload[0].node(),
                                               victim.payload[0].cycle(), records);
            break;
        }
        }
        CHECK(!copy.validate().empty());
    }
}

TEST_CASE("chain JSON round-trip is lossless and stable") {
    const Chain chain = build_chain(3, HashMode::Double);
    const std::string json = chain.to_json();
    const Chain back = Chain::from_json(json);
    CHECK(back == chain);
    CHECK(back.to_json() == json);

    CHECK_THROWS_AS(Chain::from_json("not json"), Error);
    CHECK_THROWS_AS(Chain::from_json(R"({"hash_mode":"triple","blocks":[]})"), Error);
}

TEST_CASE("block JSON round-trip") {
    const Chain chain = build_chain(2);
    const Block& block = chain.blocks()[1];
    const Block back = block_from_json(block_to_json(block));
    CHECK(back == block);
}
