// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "porch/dnp3m.hpp"
#include "porch/types.hpp"

// Typed protocol messages and their text encoding. One message renders as
// "kind|sender|cycle|field=value;field=value" in UTF-8 and rides dnp3m
// frames: command kinds use direction Request, reply kinds Response.
// AddBlock appears in both directions; the Response carries no fields and
// acts as the addition acknowledgement.
namespace porch::messages {

enum class MsgKind : std::uint8_t {
    DataRequest,
    DataResponse,
    ChainCheck,
    ChainCheckReply,
    Challenge,
    CountShare,
    Vote,
    MiningAssign,
    NewBlock,
    VerifyRequest,
    VerifyReply,
    AddBlock,
    ChainUpdate,
};

const char* msg_kind_name(MsgKind kind);
std::optional<MsgKind> msg_kind_from(std::string_view token);

// Direction a kind travels in when issued as a command/reply. AddBlock flips
// to Response for the acknowledgement.
dnp3m::Direction direction_of(MsgKind kind);

struct ProtocolMessage {
    MsgKind kind = MsgKind::DataRequest;
    dnp3m::Direction direction = dnp3m::Direction::Request;
    NodeId sender;
    std::uint64_t cycle = 0;
    // Field order is significant; a field named data/payload/block carries
    // an unescaped blob and must come last.
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* find(std::string_view name) const;
    std::string get(std::string_view name) const; // "" when absent

    friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

ProtocolMessage make_message(MsgKind kind, const NodeId& sender, std::uint64_t cycle,
                             std::vector<std::pair<std::string, std::string>> fields = {});

// Ack form: same kind, Response direction.
ProtocolMessage make_ack(MsgKind kind, const NodeId& sender, std::uint64_t cycle);

bool utf8_valid(std::string_view text);

dnp3m::Message serialize(const ProtocolMessage& message);

// Rejects malformed bodies, non-UTF-8 text, unknown kinds and messages whose
// direction does not match their kind.
std::optional<ProtocolMessage> parse(const dnp3m::Message& wire);

// Comma-joined node names for eligible-set fields.
std::string join_names(const std::vector<NodeId>& nodes);
std::optional<std::vector<NodeId>> split_names(std::string_view text);

} // namespace porch::messages
