// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace glidecast {

/// Seeded random stream backed by std::mt19937_64, whose output sequence is
/// fixed by the C++ standard. Floating-point draws are built from the raw
/// 64-bit words (top 53 bits) rather than std:: distributions, which are
/// implementation-defined, so a seed reproduces the same values everywhere.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n), n > 0, by rejection sampling.
    std::size_t below(std::size_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
};

/// Derives an independent seed for a named sub-stream (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace glidecast
