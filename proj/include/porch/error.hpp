// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace porch {

enum class Errc {
    // dnp3m
    PayloadTooLarge,
    // ledger
    EmptyLeaves,
    EmptyPayload,
    TimestampRegression,
    DuplicateRecord,
    // consensus
    BadRange,
    BadDigest,
    DuplicateNode,
    EmptyTally,
    BadConfig,
    // harness
    UnknownEndpoint,
    BindFailure,
    ConnectFailure,
    // dataset / config
    MissingBus,
    BadQuantity,
    ParseError,
};

const char* errc_name(Errc code);

// Single exception type for precondition violations and environment faults.
// Wire-facing decode paths report status enums instead of throwing.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

inline const char* errc_name(Errc code) {
    switch (code) {
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::EmptyLeaves: return "EmptyLeaves";
    case Errc::EmptyPayload: return "EmptyPayload";
    case Errc::TimestampRegression: return "TimestampRegression";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::BadRange: return "BadRange";
    case Errc::BadDigest: return "BadDigest";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::EmptyTally: return "EmptyTally";
    case Errc::BadConfig: return "BadConfig";
    case Errc::UnknownEndpoint: return "UnknownEndpoint";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ConnectFailure: return "ConnectFailure";
    case Errc::MissingBus: return "MissingBus";
    case Errc::BadQuantity: return "BadQuantity";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace porch
