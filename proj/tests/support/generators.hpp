#pragma once

// Seeded draws for the property tests. Every test owns its generator so
// reordering or filtering tests never changes the data another test sees.

#include <cstdint>
#include <random>

namespace quadlab::testing {

inline constexpr std::uint64_t kSeed = 0x5eed'2024'0917ULL;

class Draw {
public:
    explicit Draw(std::uint64_t salt = 0) : rng_(kSeed ^ (salt * 0x9e3779b97f4a7c15ULL)) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace quadlab::testing
