// SPDX-License-Identifier: Apache-2.0

#include "porch/messages.hpp"

#include <algorithm>
#include <array>
#include <charconv>

namespace porch::messages {

namespace {

struct KindInfo {
    MsgKind kind;
    const char* name;
    dnp3m::Direction direction;
};

constexpr std::array<KindInfo, 13> kKinds = {{
    {MsgKind::DataRequest, "DataRequest", dnp3m::Direction::Request},
    {MsgKind::DataResponse, "DataResponse", dnp3m::Direction::Response},
    {MsgKind::ChainCheck, "ChainCheck", dnp3m::Direction::Request},
    {MsgKind::ChainCheckReply, "ChainCheckReply", dnp3m::Direction::Response},
    {MsgKind::Challenge, "Challenge", dnp3m::Direction::Request},
    {MsgKind::CountShare, "CountShare", dnp3m::Direction::Response},
    {MsgKind::Vote, "Vote", dnp3m::Direction::Response},
    {MsgKind::MiningAssign, "MiningAssign", dnp3m::Direction::Request},
    {MsgKind::NewBlock, "NewBlock", dnp3m::Direction::Response},
    {MsgKind::VerifyRequest, "VerifyRequest", dnp3m::Direction::Request},
    {MsgKind::VerifyReply, "VerifyReply", dnp3m::Direction::Response},
    {MsgKind::AddBlock, "AddBlock", dnp3m::Direction::Request},
    {MsgKind::ChainUpdate, "ChainUpdate", dnp3m::Direction::Response},
}};

bool is_blob_field(std::string_view name) {
    return name == "data" || name == "payload" || name == "block";
}

} // namespace

const char* msg_kind_name(MsgKind kind) {
    for (const KindInfo& info : kKinds)
        if (info.kind == kind) return info.name;
    return "?";
}

std::optional<MsgKind> msg_kind_from(std::string_view token) {
    for (const KindInfo& info : kKinds)
        if (token == info.name) return info.kind;
    return std::nullopt;
}

dnp3m::Direction direction_of(MsgKind kind) {
    for (const KindInfo& info : kKinds)
        if (info.kind == kind) return info.direction;
    return dnp3m::Direction::Request;
}

const std::string* ProtocolMessage::find(std::string_view name) const {
    for (const auto& [key, value] : fields)
        if (key == name) return &value;
    return nullptr;
}

std::string ProtocolMessage::get(std::string_view name) const {
    const std::string* value = find(name);
    return value ? *value : std::string{};
}

ProtocolMessage make_message(MsgKind kind, const NodeId& sender, std::uint64_t cycle,
                             std::vector<std::pair<std::string, std::string>> fields) {
    ProtocolMessage message;
    message.kind = kind;
    message.direction = direction_of(kind);
    message.sender = sender;
    message.cycle = cycle;
    message.fields = std::move(fields);
    return message;
}

ProtocolMessage make_ack(MsgKind kind, const NodeId& sender, std::uint64_t cycle) {
    ProtocolMessage message = make_message(kind, sender, cycle);
    message.direction = dnp3m::Direction::Response;
    return message;
}

bool utf8_valid(std::string_view text) {
    std::size_t i = 0;
    const auto cont = [&](std::size_t n) {
        if (i + n >= text.size()) return false;
        for (std::size_t k = 1; k <= n; ++k)
            if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80) return false;
        return true;
    };
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            i += 1;
        } else if ((c & 0xe0) == 0xc0) {
            if (c < 0xc2 || !cont(1)) return false; // reject overlong
            i += 2;
        } else if ((c & 0xf0) == 0xe0) {
            if (!cont(2)) return false;
            const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
            if (c == 0xe0 && c1 < 0xa0) return false;
            if (c == 0xed && c1 > 0x9f) return false; // surrogates
            i += 3;
        } else if ((c & 0xf8) == 0xf0) {
            if (c > 0xf4 || !cont(3)) return false;
            const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
            if (c == 0xf0 && c1 < 0x90) return false;
            if (c == 0xf4 && c1 > 0x8f) return false;
            i += 4;
        } else {
            return false;
        }
    }
    return true;
}

dnp3m::Message serialize(const ProtocolMessage& message) {
    std::string body = msg_kind_name(message.kind);
    body += '|';
    body += message.sender.name();
    body += '|';
    body += std::to_string(message.cycle);
    body += '|';
    for (std::size_t i = 0; i < message.fields.size(); ++i) {
        const auto& [key, value] = message.fields[i];
        // Blob fields swallow the rest of the body; anything after one
        // would be unparseable.
        if (is_blob_field(key) && i + 1 != message.fields.size())
            throw std::logic_error("blob field '" + key + "' must be last");
        if (i) body += ';';
        body += key;
        body += '=';
        body += value;
    }
    return dnp3m::Message{message.direction, std::move(body)};
}

namespace {

bool parse_u64(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

std::optional<ProtocolMessage> parse(const dnp3m::Message& wire) {
    if (!utf8_valid(wire.body)) return std::nullopt;
    std::string_view body = wire.body;

    const std::size_t p1 = body.find('|');
    if (p1 == std::string_view::npos) return std::nullopt;
    const std::size_t p2 = body.find('|', p1 + 1);
    if (p2 == std::string_view::npos) return std::nullopt;
    const std::size_t p3 = body.find('|', p2 + 1);
    if (p3 == std::string_view::npos) return std::nullopt;

    const auto kind = msg_kind_from(body.substr(0, p1));
    if (!kind) return std::nullopt;
    const std::string_view sender = body.substr(p1 + 1, p2 - p1 - 1);
    if (!valid_node_name(sender)) return std::nullopt;

    ProtocolMessage message;
    message.kind = *kind;
    message.direction = wire.direction;
    message.sender = NodeId(std::string(sender));
    if (!parse_u64(body.substr(p2 + 1, p3 - p2 - 1), message.cycle)) return std::nullopt;

    // AddBlock acks travel as Response; every other kind has one direction.
    if (wire.direction != direction_of(*kind) &&
        !(*kind == MsgKind::AddBlock && wire.direction == dnp3m::Direction::Response))
        return std::nullopt;

    std::string_view rest = body.substr(p3 + 1);
    while (!rest.empty()) {
        const std::size_t eq = rest.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        const std::string_view key = rest.substr(0, eq);
        if (key.empty()) return std::nullopt;
        if (is_blob_field(key)) {
            message.fields.emplace_back(std::string(key), std::string(rest.substr(eq + 1)));
            break;
        }
        const std::size_t semi = rest.find(';', eq + 1);
        const std::string_view value = semi == std::string_view::npos
                                           ? rest.substr(eq + 1)
                                           : rest.substr(eq + 1, semi - eq - 1);
        message.fields.emplace_back(std::string(key), std::string(value));
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    }
    return message;
}

std::string join_names(const std::vector<NodeId>& nodes) {
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += ',';
        out += nodes[i].name();
    }
    return out;
}

std::optional<std::vector<NodeId>> split_names(std::string_view text) {
    std::vector<NodeId> out;
    while (!text.empty()) {
        const std::size_t comma = text.find(',');
        const std::string_view item =
            comma == std::string_view::npos ? text : text.substr(0, comma);
        if (!valid_node_name(item)) return std::nullopt;
        out.emplace_back(std::string(item));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    return out;
}

} // namespace porch::messages
