// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace dualtrain {

/// SplitMix64 generator (Steele, Lea & Flood, 2014).
///
/// Every random decision in the project (corpus sampling, top-k decoding,
/// shuffling, weight initialisation) goes through this generator. Its output
/// is a pure function of the 64-bit seed on every compiler and platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31U);
    }

    /// Uniform integer in [0, bound). Unbiased (rejection on the low zone).
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        if (bound <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>(next() >> 11U) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Mixes a stream index into a base seed. Used to give every work item of a
/// parallel map its own generator independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept
{
    Rng mixer(base ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    return mixer.next();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace dualtrain
