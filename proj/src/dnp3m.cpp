// SPDX-License-Identifier: Apache-2.0

#include "porch/dnp3m.hpp"

namespace porch::dnp3m {

const char* codec_status_name(CodecStatus status) {
    switch (status) {
    case CodecStatus::Ok: return "Ok";
    case CodecStatus::Truncated: return "Truncated";
    case CodecStatus::BadDirection: return "BadDirection";
    case CodecStatus::BadLength: return "BadLength";
    case CodecStatus::MixedDirection: return "MixedDirection";
    case CodecStatus::IncompleteMessage: return "IncompleteMessage";
    case CodecStatus::EmptyInput: return "EmptyInput";
    case CodecStatus::TrailingFrames: return "TrailingFrames";
    }
    return "Unknown";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
    if (frame.payload.size() > kMaxPayload)
        throw Error(Errc::PayloadTooLarge,
                    "frame payload " + std::to_string(frame.payload.size()) +
                        " exceeds " + std::to_string(kMaxPayload) + " bytes");
    std::vector<std::uint8_t> out;
    out.reserve(frame.total_length());
    out.push_back(static_cast<std::uint8_t>(frame.direction));
    out.push_back(static_cast<std::uint8_t>(frame.total_length()));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) noexcept {
    DecodeResult result;
    if (bytes.size() < kHeaderSize) {
        result.status = CodecStatus::Truncated;
        return result;
    }
    const std::uint8_t dir = bytes[0];
    if (dir != 0x00 && dir != 0x01) {
        result.status = CodecStatus::BadDirection;
        return result;
    }
    const std::size_t total = bytes[1];
    if (total < kHeaderSize) {
        result.status = CodecStatus::BadLength;
        return result;
    }
    if (bytes.size() < total) {
        result.status = CodecStatus::Truncated;
        return result;
    }
    result.frame.direction = static_cast<Direction>(dir);
    result.frame.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + total);
    result.consumed = total;
    return result;
}

std::vector<Frame> fragment(const Message& message) {
    std::vector<Frame> frames;
    const std::string& body = message.body;
    std::size_t off = 0;
    for (;;) {
        const std::size_t n = std::min(kMaxPayload, body.size() - off);
        Frame f;
        f.direction = message.direction;
        f.payload.assign(body.begin() + off, body.begin() + off + n);
        frames.push_back(std::move(f));
        off += n;
        if (n < kMaxPayload) break; // non-full frame terminates the message
        if (off == body.size()) {
            // Body ended exactly on a frame boundary: emit the empty
            // terminal frame so the receiver sees a non-full closer.
            frames.push_back(Frame{message.direction, {}});
            break;
        }
    }
    return frames;
}

ReassembleResult reassemble(std::span<const Frame> frames) {
    ReassembleResult result;
    if (frames.empty()) {
        result.status = CodecStatus::EmptyInput;
        return result;
    }
    result.message.direction = frames.front().direction;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        if (f.direction != result.message.direction) {
            result.status = CodecStatus::MixedDirection;
            return result;
        }
        result.message.body.append(f.payload.begin(), f.payload.end());
        if (!f.full()) {
            if (i + 1 != frames.size()) {
                result.status = CodecStatus::TrailingFrames;
                return result;
            }
            return result;
        }
    }
    // Every frame was full: the terminal frame is missing.
    result.status = CodecStatus::IncompleteMessage;
    return result;
}

} // namespace porch::dnp3m
