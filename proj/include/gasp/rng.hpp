#pragma once

#include <cstdint>
#include <string_view>

namespace gasp {

// FNV-1a, used for stream derivation and for canonical log hashing.
std::uint64_t fnv1a64(std::string_view data) noexcept;

// Deterministic counter-free generator (splitmix64). All randomness in the
// engine flows through this type so that runs are reproducible from seeds
// alone; std distributions are avoided because their output sequences are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 significant bits.
    double uniform01() noexcept;

    // Uniform integer in [0, n). n = 0 returns 0.
    std::uint64_t uniform_int(std::uint64_t n) noexcept;

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    // Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() noexcept;

    // Child stream keyed by a label; does not advance this generator.
    Rng derive(std::string_view label) const noexcept;
    Rng derive(std::uint64_t salt) const noexcept;

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace gasp
