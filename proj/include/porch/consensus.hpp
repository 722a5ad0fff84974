// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "porch/ledger.hpp"
#include "porch/random.hpp"
#include "porch/types.hpp"

// Mining-node selection: the aggregator broadcasts a random challenge, every
// eligible relay counts the challenge's decimal rendering in the SHA-256
// digest of its measurement data, and the relay with the strictly largest
// count mines. Ties and all-zero rounds fall back to a random draw.
namespace porch::consensus {

struct RandomChallenge {
    std::uint64_t value = 0;

    std::string rendered() const { return std::to_string(value); }

    friend bool operator==(const RandomChallenge&, const RandomChallenge&) = default;
};

RandomChallenge generate_challenge(RandomSource& rng, std::uint64_t lo, std::uint64_t hi);

// Non-overlapping occurrences of the challenge's decimal rendering in the
// digest, scanning left to right ("777" contains "77" once, not twice).
std::uint32_t count_occurrences(std::string_view digest, const RandomChallenge& challenge);

struct CountReport {
    NodeId node;
    std::string digest; // 64-char lowercase hex
    std::uint32_t count = 0;

    friend bool operator==(const CountReport&, const CountReport&) = default;
};

CountReport make_report(const NodeId& node, const ledger::MeasurementSet& data,
                        const RandomChallenge& challenge);

// True iff the digest matches a recomputation over `data` and the count
// matches the counting rule. A tampered count or foreign digest fails.
bool verify_report(const CountReport& report, const ledger::MeasurementSet& data,
                   const RandomChallenge& challenge);

enum class DecisionKind {
    Unique,      // one strict maximum with a nonzero count
    RandomAmong, // tie at the top, or every count zero
    Aborted,
};

struct Decision {
    DecisionKind kind = DecisionKind::Aborted;
    std::vector<NodeId> candidates; // Unique: exactly one entry

    friend bool operator==(const Decision&, const Decision&) = default;
};

struct SelectionTally {
    std::map<NodeId, std::uint32_t> reports;
    // Descending by count; ties ordered by ascending name purely so every
    // node derives the identical tally.
    std::vector<std::pair<NodeId, std::uint32_t>> sorted;
    std::uint32_t largest_count_multiplicity = 0;
    Decision decision;

    std::uint32_t top_count() const { return sorted.empty() ? 0 : sorted.front().second; }

    friend bool operator==(const SelectionTally&, const SelectionTally&) = default;
};

// Deciding which nodes a tied/zero round draws from. The default draws from
// the tied set; AllEligible widens the pool to every reporter.
enum class TiePolicy { TiedSet, AllEligible };

SelectionTally build_tally(std::span<const CountReport> reports,
                           TiePolicy policy = TiePolicy::TiedSet);

// Unique decisions resolve deterministically without touching the rng;
// random decisions draw uniformly from the candidate set.
NodeId resolve(const SelectionTally& tally, RandomSource& rng);

struct EligibilityConfig {
    std::uint32_t k = 0;
    std::uint32_t n = 0;
};

// Uniform k-subset of the relays, returned sorted by name. k == n keeps
// everyone eligible (the default configuration).
std::vector<NodeId> choose_eligible(const EligibilityConfig& cfg,
                                    std::span<const NodeId> nodes, RandomSource& rng);

} // namespace porch::consensus
