// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porch/error.hpp"

// DNP3m application framing: a 2-byte header (direction byte + total-length
// byte) followed by the payload, carried over TCP. The length byte counts the
// whole frame, so one frame holds at most 253 payload bytes; longer messages
// travel as a run of full frames closed by one non-full frame.
namespace porch::dnp3m {

inline constexpr std::size_t kHeaderSize = 2;
inline constexpr std::size_t kMaxFrameSize = 255;
inline constexpr std::size_t kMaxPayload = kMaxFrameSize - kHeaderSize;

enum class Direction : std::uint8_t {
    Request = 0x00,
    Response = 0x01,
};

struct Frame {
    Direction direction = Direction::Request;
    std::vector<std::uint8_t> payload;

    // total_length covers the 2-byte header plus the payload.
    std::size_t total_length() const { return payload.size() + kHeaderSize; }
    bool full() const { return total_length() == kMaxFrameSize; }

    friend bool operator==(const Frame&, const Frame&) = default;
};

// Message body is a byte sequence; UTF-8 text by convention. The codec does
// not validate the encoding (the nodes layer does).
struct Message {
    Direction direction = Direction::Request;
    std::string body;

    friend bool operator==(const Message&, const Message&) = default;
};

enum class CodecStatus {
    Ok,
    Truncated,      // fewer than 2 bytes, or fewer than total_length bytes
    BadDirection,   // first byte not 0x00/0x01
    BadLength,      // length byte < 2
    MixedDirection, // frames of one message disagree on direction
    IncompleteMessage, // stream ends on a full frame
    EmptyInput,
    TrailingFrames, // bytes/frames left over after the terminal frame
};

const char* codec_status_name(CodecStatus status);

struct DecodeResult {
    CodecStatus status = CodecStatus::Ok;
    Frame frame;
    std::size_t consumed = 0; // bytes consumed on Ok; never past total_length
};

struct ReassembleResult {
    CodecStatus status = CodecStatus::Ok;
    Message message;
};

// Throws Error(PayloadTooLarge) above 253 payload bytes.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

// Never reads past the declared total_length; trailing bytes are reported
// through `consumed`.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes) noexcept;

// Splits a message into frames: every frame but the last is full (length
// 255); the last is non-full. A body that is a positive multiple of 253
// bytes gains an empty terminal frame so the boundary stays unambiguous.
std::vector<Frame> fragment(const Message& message);

// Inverse of fragment.
ReassembleResult reassemble(std::span<const Frame> frames);

} // namespace porch::dnp3m
