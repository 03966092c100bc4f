#pragma once

#include "war/modring.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace war {

using Seed32 = std::array<std::uint8_t, 32>;

// Builds a 32-byte seed from a 64-bit value (little-endian, zero padded).
Seed32 seed_from_u64(std::uint64_t v);

// Keyed counter-mode expanding generator: ChaCha20 blocks keyed by the seed,
// with a 64-bit stream id for domain separation. Output is bit-exact across
// platforms, which is what makes digest regeneration from the seed exact.
class SeedExpander {
public:
    SeedExpander(const Seed32& seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    void fill_bytes(std::span<std::uint8_t> out);
    // Uniform in [0, bound) by rejection; bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound);
    std::uint64_t uniform_residue(const Modulus& m) { return uniform_below(m.value()); }

private:
    void refill();
    std::array<std::uint32_t, 16> state_;
    std::array<std::uint8_t, 64> block_;
    std::size_t pos_;
};

} // namespace war
