// SPDX-License-Identifier: Apache-2.0

#include "porch/ledger.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>

#include "json.hpp"

namespace porch::ledger {

const char* quantity_name(Quantity q) {
    switch (q) {
    case Quantity::Vm: return "Vm";
    case Quantity::Vp: return "Vp";
    case Quantity::P: return "P";
    case Quantity::Q: return "Q";
    }
    return "?";
}

std::optional<Quantity> quantity_from(std::string_view token) {
    if (token == "Vm") return Quantity::Vm;
    if (token == "Vp") return Quantity::Vp;
    if (token == "P") return Quantity::P;
    if (token == "Q") return Quantity::Q;
    return std::nullopt;
}

std::string format_value(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    if (std::strcmp(buf, "-0.000000") == 0) return "0.000000";
    return buf;
}

std::string MeasurementRecord::canonical() const {
    std::string out;
    out += std::to_string(bus);
    out += ',';
    out += quantity_name(quantity);
    out += ',';
    out += std::to_string(index);
    out += ',';
    out += format_value(value);
    return out;
}

namespace {

bool record_key_less(const MeasurementRecord& a, const MeasurementRecord& b) {
    if (a.bus != b.bus) return a.bus < b.bus;
    if (a.quantity != b.quantity) return a.quantity < b.quantity;
    return a.index < b.index;
}

bool record_key_equal(const MeasurementRecord& a, const MeasurementRecord& b) {
    return a.bus == b.bus && a.quantity == b.quantity && a.index == b.index;
}

} // namespace

MeasurementSet::MeasurementSet(NodeId node, std::uint64_t cycle,
                               std::vector<MeasurementRecord> records)
    : node_(std::move(node)), cycle_(cycle), records_(std::move(records)) {
    std::stable_sort(records_.begin(), records_.end(), record_key_less);
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (record_key_equal(records_[i - 1], records_[i]))
            throw Error(Errc::DuplicateRecord,
                        "duplicate (bus,quantity,index) " + records_[i].canonical());
    }
}

std::string MeasurementSet::canonical() const {
    std::string out = node_.name();
    out += ':';
    out += std::to_string(cycle_);
    out += '|';
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (i) out += ';';
        out += records_[i].canonical();
    }
    return out;
}

namespace {

template <typename T>
bool parse_uint(std::string_view s, T& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    char buf[64];
    if (s.size() >= sizeof(buf)) return false;
    std::memcpy(buf, s.data(), s.size());
    buf[s.size()] = '\0';
    char* end = nullptr;
    out = std::strtod(buf, &end);
    return end == buf + s.size();
}

} // namespace

std::optional<MeasurementSet> parse_measurement_set(std::string_view text) {
    const std::size_t colon = text.find(':');
    const std::size_t bar = text.find('|');
    if (colon == std::string_view::npos || bar == std::string_view::npos || colon > bar)
        return std::nullopt;
    const std::string_view name = text.substr(0, colon);
    std::uint64_t cycle = 0;
    if (!valid_node_name(name) || !parse_uint(text.substr(colon + 1, bar - colon - 1), cycle))
        return std::nullopt;

    std::vector<MeasurementRecord> records;
    std::string_view rest = text.substr(bar + 1);
    while (!rest.empty()) {
        const std::size_t semi = rest.find(';');
        const std::string_view item =
            semi == std::string_view::npos ? rest : rest.substr(0, semi);
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);

        MeasurementRecord rec;
        const std::size_t c1 = item.find(',');
        if (c1 == std::string_view::npos) return std::nullopt;
        const std::size_t c2 = item.find(',', c1 + 1);
        if (c2 == std::string_view::npos) return std::nullopt;
        const std::size_t c3 = item.find(',', c2 + 1);
        if (c3 == std::string_view::npos) return std::nullopt;
        if (!parse_uint(item.substr(0, c1), rec.bus)) return std::nullopt;
        const auto q = quantity_from(item.substr(c1 + 1, c2 - c1 - 1));
        if (!q) return std::nullopt;
        rec.quantity = *q;
        if (!parse_uint(item.substr(c2 + 1, c3 - c2 - 1), rec.index)) return std::nullopt;
        if (!parse_double(item.substr(c3 + 1), rec.value)) return std::nullopt;
        records.push_back(rec);
    }
    try {
        return MeasurementSet(NodeId(std::string(name)), cycle, std::move(records));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

const char* hash_mode_name(HashMode mode) {
    return mode == HashMode::Single ? "single" : "double";
}

std::optional<HashMode> hash_mode_from(std::string_view token) {
    if (token == "single") return HashMode::Single;
    if (token == "double") return HashMode::Double;
    return std::nullopt;
}

std::string BlockHeader::canonical() const {
    std::string out = std::to_string(index);
    out += '|';
    out += std::to_string(timestamp);
    out += '|';
    out += previous_hash;
    out += '|';
    out += merkle_root;
    out += '|';
    out += std::to_string(nonce);
    return out;
}

bool is_hex_digest(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

std::string merkle_root(std::span<const std::string> leaves) {
    if (leaves.empty()) throw Error(Errc::EmptyLeaves, "merkle_root over no leaves");
    std::vector<std::string> level;
    level.reserve(leaves.size());
    for (const std::string& leaf : leaves) level.push_back(sha256_hex(leaf));
    while (level.size() > 1) {
        std::vector<std::string> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            const std::string& left = level[i];
            const std::string& right = (i + 1 < level.size()) ? level[i + 1] : level[i];
            next.push_back(sha256_hex(left + right));
        }
        level = std::move(next);
    }
    return level.front();
}

std::string block_hash(const BlockHeader& header, HashMode mode) {
    const std::string bytes = header.canonical();
    return mode == HashMode::Single ? sha256_hex(bytes) : double_sha256_hex(bytes);
}

std::string payload_merkle_root(std::span<const MeasurementSet> payload) {
    std::vector<std::string> leaves;
    leaves.reserve(payload.size());
    for (const MeasurementSet& set : payload) leaves.push_back(set.canonical());
    return merkle_root(leaves);
}

namespace {
constexpr char kZeroHash[] =
    "0000000000000000000000000000000000000000000000000000000000000000";
constexpr char kGenesisSentinel[] = "GENESIS";
} // namespace

Block genesis_block(HashMode mode) {
    Block block;
    block.header.index = 0;
    block.header.timestamp = 0;
    block.header.previous_hash = kZeroHash;
    block.header.merkle_root = sha256_hex(kGenesisSentinel);
    block.header.nonce = 0;
    block.current_hash = block_hash(block.header, mode);
    return block;
}

Block create_block(const Block& parent, std::vector<MeasurementSet> payload,
                   std::int64_t timestamp, HashMode mode) {
    if (payload.empty()) throw Error(Errc::EmptyPayload, "block payload is empty");
    if (timestamp < parent.header.timestamp)
        throw Error(Errc::TimestampRegression,
                    std::to_string(timestamp) + " < parent " +
                        std::to_string(parent.header.timestamp));
    Block block;
    block.header.index = parent.header.index + 1;
    block.header.timestamp = timestamp;
    block.header.previous_hash = parent.current_hash;
    block.header.merkle_root = payload_merkle_root(payload);
    block.header.nonce = 0;
    block.payload = std::move(payload);
    block.current_hash = block_hash(block.header, mode);
    return block;
}

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::BadLink: return "BadLink";
    case ViolationKind::BadIndex: return "BadIndex";
    case ViolationKind::BadRoot: return "BadRoot";
    case ViolationKind::BadHash: return "BadHash";
    case ViolationKind::BadTimestamp: return "BadTimestamp";
    case ViolationKind::BadGenesis: return "BadGenesis";
    }
    return "Unknown";
}

Chain::Chain(HashMode mode) : mode_(mode) { blocks_.push_back(genesis_block(mode)); }

void Chain::append(Block block) { blocks_.push_back(std::move(block)); }

std::vector<Violation> Chain::validate() const {
    std::vector<Violation> violations;
    if (blocks_.empty()) return {Violation{0, ViolationKind::BadGenesis}};

    const Block genesis = genesis_block(mode_);
    if (blocks_[0] != genesis)
        violations.push_back({blocks_[0].header.index, ViolationKind::BadGenesis});

    for (std::size_t i = 1; i < blocks_.size(); ++i) {
        const Block& block = blocks_[i];
        const Block& prev = blocks_[i - 1];
        const std::uint64_t at = block.header.index;
        if (block.header.index != prev.header.index + 1)
            violations.push_back({at, ViolationKind::BadIndex});
        if (block.header.previous_hash != prev.current_hash)
            violations.push_back({at, ViolationKind::BadLink});
        if (block.header.timestamp < prev.header.timestamp)
            violations.push_back({at, ViolationKind::BadTimestamp});
        if (block.payload.empty() ||
            block.header.merkle_root != payload_merkle_root(block.payload))
            violations.push_back({at, ViolationKind::BadRoot});
        if (block.current_hash != block_hash(block.header, mode_))
            violations.push_back({at, ViolationKind::BadHash});
    }
    return violations;
}

namespace {

using nlohmann::json;

json set_to_json(const MeasurementSet& set) {
    json records = json::array();
    for (const MeasurementRecord& rec : set.records()) {
        records.push_back({{"bus", rec.bus},
                           {"quantity", quantity_name(rec.quantity)},
                           {"index", rec.index},
                           {"value", format_value(rec.value)}});
    }
    return {{"node", set.node().name()}, {"cycle", set.cycle()}, {"records", records}};
}

MeasurementSet set_from_json(const json& j) {
    std::vector<MeasurementRecord> records;
    for (const json& r : j.at("records")) {
        MeasurementRecord rec;
        rec.bus = r.at("bus").get<std::uint32_t>();
        const auto q = quantity_from(r.at("quantity").get<std::string>());
        if (!q) throw Error(Errc::ParseError, "bad quantity in chain JSON");
        rec.quantity = *q;
        rec.index = r.at("index").get<std::uint32_t>();
        rec.value = std::stod(r.at("value").get<std::string>());
        records.push_back(rec);
    }
    return MeasurementSet(NodeId(j.at("node").get<std::string>()),
                          j.at("cycle").get<std::uint64_t>(), std::move(records));
}

json block_to_json_obj(const Block& block) {
    json payload = json::array();
    for (const MeasurementSet& set : block.payload) payload.push_back(set_to_json(set));
    return {{"index", block.header.index},
            {"timestamp", block.header.timestamp},
            {"previous_hash", block.header.previous_hash},
            {"merkle_root", block.header.merkle_root},
            {"nonce", block.header.nonce},
            {"current_hash", block.current_hash},
            {"payload", payload}};
}

Block block_from_json_obj(const json& b) {
    Block block;
    block.header.index = b.at("index").get<std::uint64_t>();
    block.header.timestamp = b.at("timestamp").get<std::int64_t>();
    block.header.previous_hash = b.at("previous_hash").get<std::string>();
    block.header.merkle_root = b.at("merkle_root").get<std::string>();
    block.header.nonce = b.at("nonce").get<std::uint64_t>();
    block.current_hash = b.at("current_hash").get<std::string>();
    for (const json& s : b.at("payload")) block.payload.push_back(set_from_json(s));
    return block;
}

} // namespace

std::string block_to_json(const Block& block) { return block_to_json_obj(block).dump(); }

Block block_from_json(std::string_view text) {
    try {
        return block_from_json_obj(json::parse(text));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(Errc::ParseError, std::string("block JSON: ") + e.what());
    }
}

std::string Chain::to_json() const {
    json blocks = json::array();
    for (const Block& block : blocks_) blocks.push_back(block_to_json_obj(block));
    const json doc = {{"hash_mode", hash_mode_name(mode_)}, {"blocks", blocks}};
    return doc.dump();
}

Chain Chain::from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        const auto mode = hash_mode_from(doc.at("hash_mode").get<std::string>());
        if (!mode) throw Error(Errc::ParseError, "bad hash_mode");
        Chain chain(*mode);
        chain.blocks_.clear();
        for (const json& b : doc.at("blocks"))
            chain.blocks_.push_back(block_from_json_obj(b));
        return chain;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(Errc::ParseError, std::string("chain JSON: ") + e.what());
    }
}

} // namespace porch::ledger
