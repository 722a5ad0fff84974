// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "porch/ledger.hpp"
#include "porch/types.hpp"

// Measurement source: a 9-bus table of base values plus per-cycle jitter.
// The builtin bases come from the standard solved power flow of the 9-bus
// test network (voltage magnitude per unit, phase in degrees, net real power
// in MW, net reactive power in MVAr).
namespace porch::dataset {

struct DatasetRow {
    std::uint32_t bus = 0;
    ledger::Quantity quantity = ledger::Quantity::Vm;
    std::uint32_t index = 0;
    double base = 0.0;
    double jitter = 0.0; // uniform(-jitter, +jitter) added each cycle

    friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

class BusDataset {
public:
    static BusDataset builtin();

    // CSV columns: bus,quantity,index,base,jitter (header line optional).
    static BusDataset from_csv(std::string_view text);
    static BusDataset from_file(const std::string& path);

    const std::vector<DatasetRow>& rows() const { return rows_; }
    std::vector<DatasetRow> rows_for_bus(std::uint32_t bus) const;

private:
    void validate() const; // MissingBus / BadQuantity enforced here
    std::vector<DatasetRow> rows_;
};

// Contiguous bus partition: relay i of n serves buses (9i/n, 9(i+1)/n].
// With four relays that is {1,2} {3,4} {5,6} {7,8,9}.
std::map<NodeId, std::vector<std::uint32_t>> default_partition(
    const std::vector<NodeId>& relays);

// Deterministic per (cycle, seed): every record's jitter draw comes from its
// own derived stream, so row order and call order do not matter.
ledger::MeasurementSet sample_relay(const BusDataset& ds, const NodeId& relay,
                                    const std::vector<std::uint32_t>& buses,
                                    std::uint64_t cycle, std::uint64_t seed);

std::map<NodeId, ledger::MeasurementSet> sample_cycle(
    const BusDataset& ds, const std::map<NodeId, std::vector<std::uint32_t>>& partition,
    std::uint64_t cycle, std::uint64_t seed);

} // namespace porch::dataset
