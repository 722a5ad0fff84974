// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "porch/consensus.hpp"

using namespace porch;
using namespace porch::consensus;

namespace {

std::vector<CountReport> reports_from(std::initializer_list<std::pair<const char*, std::uint32_t>> items) {
    std::vector<CountReport> out;
    for (const auto& [name, count] : items)
        out.push_back({NodeId(name), std::string(64, '0'), count});
    return out;
}

ledger::MeasurementSet sample_data(const char* node, double value) {
    return ledger::MeasurementSet(NodeId(node), 1,
                                  {{1, ledger::Quantity::Vm, 11, value}});
}

} // namespace

TEST_CASE("generate_challenge: degenerate range and seeded determinism") {
    SeededRandom rng(1);
    CHECK(generate_challenge(rng, 7, 7).value == 7);
    CHECK(generate_challenge(rng, 7, 7).rendered() == "7");

    SeededRandom a(123), b(123);
    for (int i = 0; i < 100; ++i)
        CHECK(generate_challenge(a, 0, 9).value == generate_challenge(b, 0, 9).value);

    SeededRandom bad(1);
    CHECK_THROWS_AS(generate_challenge(bad, 9, 0), Error);
}

TEST_CASE("generate_challenge: digits on [0,9] are uniform within 3 sigma") {
    SeededRandom rng(2024);
    std::map<std::uint64_t, int> freq;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++freq[generate_challenge(rng, 0, 9).value];
    // sigma = sqrt(n * p * (1-p)) = 30 for p = 0.1
    for (std::uint64_t d = 0; d <= 9; ++d)
        CHECK(std::abs(freq[d] - 1000) <= 90);
}

TEST_CASE("count_occurrences: examples and validation") {
    CHECK(count_occurrences("abcdef", RandomChallenge{7}) == 0);
    // Non-overlapping scan: "777" holds one "77", not two.
    CHECK(count_occurrences("777", RandomChallenge{77}) == 1);
    CHECK(count_occurrences("17a71b7", RandomChallenge{7}) == 3);
    CHECK(count_occurrences("7777", RandomChallenge{77}) == 2);

    CHECK_THROWS_AS(count_occurrences("", RandomChallenge{1}), Error);
    CHECK_THROWS_AS(count_occurrences("ABCDEF", RandomChallenge{1}), Error);
    CHECK_THROWS_AS(count_occurrences("12g4", RandomChallenge{1}), Error);
}

TEST_CASE("count_occurrences: bounded by digest length over needle length") {
    std::mt19937_64 rng(5);
    const char* hex = "0123456789abcdef";
    for (int trial = 0; trial < 500; ++trial) {
        std::string digest(64, '0');
        for (auto& c : digest) c = hex[rng() % 16];
        const RandomChallenge challenge{rng() % 1000};
        const std::uint32_t count = count_occurrences(digest, challenge);
        CHECK(count * challenge.rendered().size() <= 64);
    }
}

TEST_CASE("build_tally: hand-sorted example") {
    const auto tally =
        build_tally(reports_from({{"R1", 3}, {"R2", 1}, {"R3", 3}, {"R4", 0}}));
    REQUIRE(tally.sorted.size() == 4);
    CHECK(tally.sorted[0] == std::pair{NodeId("R1"), 3u});
    CHECK(tally.sorted[1] == std::pair{NodeId("R3"), 3u});
    CHECK(tally.sorted[2] == std::pair{NodeId("R2"), 1u});
    CHECK(tally.sorted[3] == std::pair{NodeId("R4"), 0u});
    CHECK(tally.largest_count_multiplicity == 2);
    CHECK(tally.decision.kind == DecisionKind::RandomAmong);
    CHECK(tally.decision.candidates == std::vector<NodeId>{NodeId("R1"), NodeId("R3")});
}

TEST_CASE("build_tally: zero counts, singleton, errors") {
    const auto zeros = build_tally(reports_from({{"R1", 0}, {"R2", 0}}));
    CHECK(zeros.largest_count_multiplicity == 2);
    CHECK(zeros.top_count() == 0);
    // All-zero rounds draw from every eligible node.
    CHECK(zeros.decision.candidates.size() == 2);

    const auto single = build_tally(reports_from({{"R1", 5}}));
    CHECK(single.largest_count_multiplicity == 1);
    CHECK(single.decision.kind == DecisionKind::Unique);

    CHECK_THROWS_AS(build_tally(reports_from({{"R1", 1}, {"R1", 2}})), Error);
    CHECK_THROWS_AS(build_tally({}), Error);
}

TEST_CASE("build_tally: agreement is independent of report order") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CountReport> reports;
        const std::size_t n = 2 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i)
            reports.push_back({NodeId("R" + std::to_string(i + 1)),
                               std::string(64, 'a'), std::uint32_t(rng() % 9)});
        auto shuffled = reports;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(build_tally(reports) == build_tally(shuffled));
    }
}

TEST_CASE("resolve: unique maximum is deterministic and ignores the rng") {
    const auto tally = build_tally(reports_from({{"R2", 4}, {"R1", 1}, {"R3", 0}}));
    SeededRandom rng(1);
    CHECK(resolve(tally, rng) == NodeId("R2"));
    // The draw stream stayed untouched.
    SeededRandom fresh(1);
    CHECK(rng.next() == fresh.next());
}

TEST_CASE("resolve: tie draws uniformly from the tied set") {
    const auto tally = build_tally(reports_from({{"R1", 3}, {"R3", 3}, {"R2", 1}}));
    SeededRandom rng(77);
    std::map<std::string, int> freq;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++freq[resolve(tally, rng).name()];
    CHECK(freq.size() == 2);
    CHECK(freq.count("R1") == 1);
    CHECK(freq.count("R3") == 1);
    // sigma = sqrt(n/4) = 50
    CHECK(std::abs(freq["R1"] - 5000) <= 150);
}

TEST_CASE("resolve: all-zero round draws from every eligible node") {
    const auto tally =
        build_tally(reports_from({{"R1", 0}, {"R2", 0}, {"R3", 0}, {"R4", 0}}));
    SeededRandom rng(3);
    std::map<std::string, int> freq;
    for (int i = 0; i < 8000; ++i) ++freq[resolve(tally, rng).name()];
    CHECK(freq.size() == 4);
    for (const auto& [name, count] : freq) CHECK(std::abs(count - 2000) <= 130);

    SelectionTally empty;
    CHECK_THROWS_AS(resolve(empty, rng), Error);
}

TEST_CASE("resolve: AllEligible tie policy widens the candidate pool") {
    const auto tally = build_tally(reports_from({{"R1", 3}, {"R3", 3}, {"R2", 1}}),
                                   TiePolicy::AllEligible);
    CHECK(tally.decision.candidates.size() == 3);
}

TEST_CASE("verify_report: honest, inflated, foreign") {
    const auto data = sample_data("R1", 1.02);
    const RandomChallenge challenge{7};
    const CountReport honest = make_report(NodeId("R1"), data, challenge);
    CHECK(verify_report(honest, data, challenge));

    CountReport inflated = honest;
    inflated.count += 1;
    CHECK(!verify_report(inflated, data, challenge));

    CountReport foreign = honest;
    foreign.digest = sha256_hex(std::string_view{"someone else"});
    CHECK(!verify_report(foreign, data, challenge));
}

TEST_CASE("verify_report: any mutation flips the verdict") {
    std::mt19937_64 rng(23);
    const RandomChallenge challenge{4};
    for (int trial = 0; trial < 300; ++trial) {
        const auto data = sample_data("R2", double(rng() % 10000) / 100.0);
        CountReport report = make_report(NodeId("R2"), data, challenge);
        if (rng() & 1) {
            const std::uint32_t delta = 1 + rng() % 5;
            report.count = (rng() & 1) && report.count >= delta ? report.count - delta
                                                                : report.count + delta;
        } else {
            const std::size_t at = rng() % report.digest.size();
            report.digest[at] = report.digest[at] == 'e' ? '2' : 'e';
        }
        CHECK(!verify_report(report, data, challenge));
    }
}

TEST_CASE("choose_eligible: identity, determinism, validation") {
    const std::vector<NodeId> nodes{NodeId("R1"), NodeId("R2"), NodeId("R3"), NodeId("R4")};
    SeededRandom rng(5);
    CHECK(choose_eligible({4, 4}, nodes, rng) == nodes);

    SeededRandom a(9), b(9);
    CHECK(choose_eligible({1, 4}, nodes, a) == choose_eligible({1, 4}, nodes, b));

    SeededRandom bad(1);
    CHECK_THROWS_AS(choose_eligible({0, 4}, nodes, bad), Error);
    CHECK_THROWS_AS(choose_eligible({5, 4}, nodes, bad), Error);
    CHECK_THROWS_AS(choose_eligible({2, 3}, nodes, bad), Error);
}

TEST_CASE("choose_eligible: k-subsets are uniform over members") {
    const std::vector<NodeId> nodes{NodeId("R1"), NodeId("R2"), NodeId("R3"), NodeId("R4")};
    SeededRandom rng(31);
    std::map<std::string, int> freq;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const auto subset = choose_eligible({2, 4}, nodes, rng);
        CHECK(subset.size() == 2);
        CHECK(std::is_sorted(subset.begin(), subset.end()));
        for (const NodeId& node : subset) ++freq[node.name()];
    }
    // Each node appears in half the subsets; sigma = sqrt(n/4) = 50.
    for (const auto& [name, count] : freq) CHECK(std::abs(count - 5000) <= 150);
}
