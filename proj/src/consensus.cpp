// SPDX-License-Identifier: Apache-2.0

#include "porch/consensus.hpp"

#include <algorithm>

namespace porch::consensus {

RandomChallenge generate_challenge(RandomSource& rng, std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw Error(Errc::BadRange, "challenge range inverted");
    return RandomChallenge{rng.uniform(lo, hi)};
}

std::uint32_t count_occurrences(std::string_view digest, const RandomChallenge& challenge) {
    if (digest.empty()) throw Error(Errc::BadDigest, "empty digest");
    for (char c : digest) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            throw Error(Errc::BadDigest, "digest not lowercase hex");
    }
    const std::string needle = challenge.rendered();
    std::uint32_t count = 0;
    std::size_t pos = 0;
    while ((pos = digest.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

CountReport make_report(const NodeId& node, const ledger::MeasurementSet& data,
                        const RandomChallenge& challenge) {
    CountReport report;
    report.node = node;
    report.digest = sha256_hex(data.canonical());
    report.count = count_occurrences(report.digest, challenge);
    return report;
}

bool verify_report(const CountReport& report, const ledger::MeasurementSet& data,
                   const RandomChallenge& challenge) {
    const std::string digest = sha256_hex(data.canonical());
    if (digest != report.digest) return false;
    return count_occurrences(digest, challenge) == report.count;
}

SelectionTally build_tally(std::span<const CountReport> reports, TiePolicy policy) {
    if (reports.empty()) throw Error(Errc::EmptyTally, "no count reports");

    SelectionTally tally;
    for (const CountReport& report : reports) {
        const auto [it, inserted] = tally.reports.emplace(report.node, report.count);
        (void)it;
        if (!inserted)
            throw Error(Errc::DuplicateNode, "duplicate report from " + report.node.name());
    }

    tally.sorted.assign(tally.reports.begin(), tally.reports.end());
    std::sort(tally.sorted.begin(), tally.sorted.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });

    const std::uint32_t top = tally.sorted.front().second;
    tally.largest_count_multiplicity = 0;
    for (const auto& [node, count] : tally.sorted)
        if (count == top) ++tally.largest_count_multiplicity;

    if (top == 0) {
        // Every count zero: draw from all eligible nodes.
        tally.decision.kind = DecisionKind::RandomAmong;
        for (const auto& [node, count] : tally.sorted)
            tally.decision.candidates.push_back(node);
    } else if (tally.largest_count_multiplicity == 1) {
        tally.decision.kind = DecisionKind::Unique;
        tally.decision.candidates.push_back(tally.sorted.front().first);
    } else {
        tally.decision.kind = DecisionKind::RandomAmong;
        if (policy == TiePolicy::TiedSet) {
            for (const auto& [node, count] : tally.sorted)
                if (count == top) tally.decision.candidates.push_back(node);
        } else {
            for (const auto& [node, count] : tally.sorted)
                tally.decision.candidates.push_back(node);
        }
    }
    return tally;
}

NodeId resolve(const SelectionTally& tally, RandomSource& rng) {
    if (tally.sorted.empty() || tally.decision.candidates.empty())
        throw Error(Errc::EmptyTally, "resolve over empty tally");
    if (tally.decision.kind == DecisionKind::Unique) return tally.decision.candidates.front();
    return tally.decision.candidates[rng.pick(tally.decision.candidates.size())];
}

std::vector<NodeId> choose_eligible(const EligibilityConfig& cfg,
                                    std::span<const NodeId> nodes, RandomSource& rng) {
    if (cfg.n != nodes.size())
        throw Error(Errc::BadConfig, "eligibility n != node count");
    if (cfg.k < 1 || cfg.k > cfg.n)
        throw Error(Errc::BadConfig, "eligibility k out of range");

    std::vector<NodeId> pool(nodes.begin(), nodes.end());
    // Partial Fisher-Yates: the first k slots form a uniform k-subset.
    for (std::uint32_t i = 0; i < cfg.k; ++i) {
        const std::size_t j = i + rng.pick(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(cfg.k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace porch::consensus
