// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace porch {

// Simulated time in ticks (1 tick = 1 ms of modeled time). In TCP mode the
// same unit carries wall-clock milliseconds.
using Tick = std::int64_t;

inline bool valid_node_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

// Node identity. Names are restricted to [A-Za-z0-9_-]+ so they can be
// embedded in the text message format without escaping.
class NodeId {
public:
    NodeId() = default;
    explicit NodeId(std::string name) : name_(std::move(name)) {
        if (!valid_node_name(name_))
            throw std::invalid_argument("NodeId: invalid name '" + name_ + "'");
    }

    const std::string& name() const { return name_; }
    bool empty() const { return name_.empty(); }

    friend auto operator<=>(const NodeId&, const NodeId&) = default;

private:
    std::string name_;
};

} // namespace porch

template <>
struct std::hash<porch::NodeId> {
    std::size_t operator()(const porch::NodeId& id) const noexcept {
        return std::hash<std::string>{}(id.name());
    }
};
