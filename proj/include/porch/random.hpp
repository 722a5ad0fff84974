// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "porch/error.hpp"

namespace porch {

// Injected random source. The default is a seeded deterministic generator so
// whole simulations replay bit-exactly; SystemRandom hooks in OS entropy for
// non-reproducible runs. Stronger generators plug in behind this interface.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual std::uint64_t next() = 0;

    // Uniform draw on [lo, hi] by rejection sampling, so sequences do not
    // depend on the standard library's distribution internals.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        if (lo > hi) throw Error(Errc::BadRange, "uniform: lo > hi");
        const std::uint64_t span = hi - lo;
        if (span == UINT64_MAX) return next();
        const std::uint64_t buckets = span + 1;
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % buckets);
        for (;;) {
            const std::uint64_t x = next();
            if (x < limit) return lo + x % buckets;
        }
    }

    // Uniform index in [0, n).
    std::size_t pick(std::size_t n) {
        if (n == 0) throw Error(Errc::BadRange, "pick: empty range");
        return static_cast<std::size_t>(uniform(0, n - 1));
    }
};

class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() override { return engine_(); }

private:
    std::mt19937_64 engine_;
};

class SystemRandom final : public RandomSource {
public:
    std::uint64_t next() override {
        return (static_cast<std::uint64_t>(device_()) << 32) | device_();
    }

private:
    std::random_device device_;
};

// splitmix64; used to derive independent per-(seed, cycle, node) streams.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

} // namespace porch
