// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <utility>
#include <vector>

namespace sift {

/// xoshiro256++ generator seeded through splitmix64.
///
/// The standard library engines are deterministic, but the distributions on
/// top of them are not pinned by the standard. Every stochastic result in
/// this library (plans, copula samples, QMC shifts) must be reproducible
/// bit-for-bit from a seed, so both the generator and the uniform-double
/// conversion are fixed here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in the open interval (0, 1); safe to feed to a quantile function.
    double next_open() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t next_below(std::size_t n) {
        auto k = static_cast<std::size_t>(next_double() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

/// Fisher-Yates shuffle driven by the shared Rng; used for traversal permutations.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t k = values.size(); k > 1; --k) {
        const std::size_t j = rng.next_below(k);
        std::swap(values[k - 1], values[j]);
    }
}

} // namespace sift
