// SPDX-License-Identifier: Apache-2.0

#include "porch/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "porch/random.hpp"

namespace porch::dataset {

namespace {

using ledger::Quantity;

struct BusSolution {
    double vm;
    double vp;
    double p;
    double q;
};

// Solved power flow of the 9-bus test case: generation at buses 1-3, loads
// at 5, 7 and 9; P/Q are net injections.
constexpr BusSolution kNineBus[9] = {
    {1.000, 0.000, 71.95, 24.07},   // bus 1 (slack)
    {1.000, 9.668, 163.00, 14.46},  // bus 2
    {1.000, 4.771, 85.00, -3.65},   // bus 3
    {0.987, -2.407, 0.00, 0.00},    // bus 4
    {0.975, -4.017, -90.00, -30.00}, // bus 5
    {1.003, 1.926, 0.00, 0.00},     // bus 6
    {0.986, 0.622, -100.00, -35.00}, // bus 7
    {0.996, 3.799, 0.00, 0.00},     // bus 8
    {0.958, -4.350, -125.00, -50.00} // bus 9
};

constexpr double kDefaultJitter[4] = {0.01, 0.10, 2.00, 1.00}; // Vm, Vp, P, Q

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : text) {
        h ^= std::uint8_t(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

BusDataset BusDataset::builtin() {
    BusDataset ds;
    constexpr Quantity kQuantities[4] = {Quantity::Vm, Quantity::Vp, Quantity::P,
                                         Quantity::Q};
    for (std::uint32_t bus = 1; bus <= 9; ++bus) {
        const BusSolution& sol = kNineBus[bus - 1];
        const double bases[4] = {sol.vm, sol.vp, sol.p, sol.q};
        for (std::uint32_t qi = 0; qi < 4; ++qi) {
            DatasetRow row;
            row.bus = bus;
            row.quantity = kQuantities[qi];
            row.index = bus * 10 + qi + 1; // 11,12,13,14, 21,...
            row.base = bases[qi];
            row.jitter = kDefaultJitter[qi];
            ds.rows_.push_back(row);
        }
    }
    ds.validate();
    return ds;
}

void BusDataset::validate() const {
    bool seen[9][4] = {};
    for (const DatasetRow& row : rows_) {
        if (row.bus < 1 || row.bus > 9)
            throw Error(Errc::ParseError, "bus " + std::to_string(row.bus) +
                                              " outside 1..9");
        seen[row.bus - 1][std::size_t(row.quantity)] = true;
    }
    for (std::uint32_t bus = 1; bus <= 9; ++bus)
        for (std::size_t qi = 0; qi < 4; ++qi)
            if (!seen[bus - 1][qi])
                throw Error(Errc::MissingBus,
                            "bus " + std::to_string(bus) + " lacks " +
                                ledger::quantity_name(ledger::Quantity(qi)));
}

BusDataset BusDataset::from_csv(std::string_view text) {
    BusDataset ds;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (lineno == 1 && line.starts_with("bus,")) continue; // header

        std::string_view cols[5];
        std::size_t start = 0;
        std::size_t n = 0;
        for (; n < 5; ++n) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) {
                cols[n] = line.substr(start);
                ++n;
                break;
            }
            cols[n] = line.substr(start, comma - start);
            start = comma + 1;
        }
        if (n != 5)
            throw Error(Errc::ParseError,
                        "line " + std::to_string(lineno) + ": expected 5 columns");

        DatasetRow row;
        const auto parse_u32 = [&](std::string_view s, std::uint32_t& out) {
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            return ec == std::errc() && ptr == s.data() + s.size();
        };
        const auto parse_f = [&](std::string_view s, double& out) {
            char buf[64];
            if (s.empty() || s.size() >= sizeof(buf)) return false;
            std::memcpy(buf, s.data(), s.size());
            buf[s.size()] = '\0';
            char* end = nullptr;
            out = std::strtod(buf, &end);
            return end == buf + s.size();
        };
        if (!parse_u32(cols[0], row.bus))
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad bus");
        const auto quantity = ledger::quantity_from(cols[1]);
        if (!quantity)
            throw Error(Errc::BadQuantity,
                        "line " + std::to_string(lineno) + ": '" + std::string(cols[1]) + "'");
        row.quantity = *quantity;
        if (!parse_u32(cols[2], row.index) || !parse_f(cols[3], row.base) ||
            !parse_f(cols[4], row.jitter))
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad value");
        ds.rows_.push_back(row);
    }
    ds.validate();
    return ds;
}

BusDataset BusDataset::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::ParseError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_csv(buf.str());
}

std::vector<DatasetRow> BusDataset::rows_for_bus(std::uint32_t bus) const {
    std::vector<DatasetRow> out;
    for (const DatasetRow& row : rows_)
        if (row.bus == bus) out.push_back(row);
    return out;
}

std::map<NodeId, std::vector<std::uint32_t>> default_partition(
    const std::vector<NodeId>& relays) {
    std::map<NodeId, std::vector<std::uint32_t>> partition;
    const std::size_t n = relays.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t first = std::uint32_t(9 * i / n) + 1;
        const std::uint32_t last = std::uint32_t(9 * (i + 1) / n);
        std::vector<std::uint32_t> buses;
        for (std::uint32_t bus = first; bus <= last; ++bus) buses.push_back(bus);
        partition.emplace(relays[i], std::move(buses));
    }
    return partition;
}

ledger::MeasurementSet sample_relay(const BusDataset& ds, const NodeId& relay,
                                    const std::vector<std::uint32_t>& buses,
                                    std::uint64_t cycle, std::uint64_t seed) {
    std::vector<ledger::MeasurementRecord> records;
    const std::uint64_t relay_seed =
        combine_seed(combine_seed(seed, cycle), fnv1a64(relay.name()));
    for (const DatasetRow& row : ds.rows()) {
        if (std::find(buses.begin(), buses.end(), row.bus) == buses.end()) continue;
        ledger::MeasurementRecord rec;
        rec.bus = row.bus;
        rec.quantity = row.quantity;
        rec.index = row.index;
        if (row.jitter == 0.0) {
            rec.value = row.base;
        } else {
            const std::uint64_t key =
                (std::uint64_t(row.bus) << 40) | (std::uint64_t(row.index) << 8) |
                std::uint64_t(row.quantity);
            SeededRandom rng(combine_seed(relay_seed, key));
            const double u = double(rng.next() >> 11) * 0x1.0p-53; // [0,1)
            rec.value = row.base + row.jitter * (2.0 * u - 1.0);
        }
        records.push_back(rec);
    }
    return ledger::MeasurementSet(relay, cycle, std::move(records));
}

std::map<NodeId, ledger::MeasurementSet> sample_cycle(
    const BusDataset& ds, const std::map<NodeId, std::vector<std::uint32_t>>& partition,
    std::uint64_t cycle, std::uint64_t seed) {
    std::map<NodeId, ledger::MeasurementSet> out;
    for (const auto& [relay, buses] : partition)
        out.emplace(relay, sample_relay(ds, relay, buses, cycle, seed));
    return out;
}

} // namespace porch::dataset
