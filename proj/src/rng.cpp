#include "gasp/rng.hpp"

#include <cmath>
#include <numbers>

namespace gasp {

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x00000100000001b3ull;
    }
    return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() noexcept { return splitmix64(state_); }

double Rng::uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) noexcept {
    if (n == 0) return 0;
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = ~0ull - (~0ull % n + 1) % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v > limit);
    return v % n;
}

double Rng::normal() noexcept {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::derive(std::string_view label) const noexcept {
    return Rng(state_ ^ fnv1a64(label));
}

Rng Rng::derive(std::uint64_t salt) const noexcept {
    std::uint64_t s = salt;
    return Rng(state_ ^ splitmix64(s));
}

}  // namespace gasp
