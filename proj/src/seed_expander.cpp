#include "war/seed_expander.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace war {

namespace {

inline std::uint32_t load_le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = std::rotl(d, 16);
    c += d; b ^= c; b = std::rotl(b, 12);
    a += b; d ^= a; d = std::rotl(d, 8);
    c += d; b ^= c; b = std::rotl(b, 7);
}

void chacha20_block(const std::array<std::uint32_t, 16>& in, std::array<std::uint8_t, 64>& out) {
    std::array<std::uint32_t, 16> x = in;
    for (int round = 0; round < 10; ++round) {
        quarter_round(x[0], x[4], x[8], x[12]);
        quarter_round(x[1], x[5], x[9], x[13]);
        quarter_round(x[2], x[6], x[10], x[14]);
        quarter_round(x[3], x[7], x[11], x[15]);
        quarter_round(x[0], x[5], x[10], x[15]);
        quarter_round(x[1], x[6], x[11], x[12]);
        quarter_round(x[2], x[7], x[8], x[13]);
        quarter_round(x[3], x[4], x[9], x[14]);
    }
    for (int i = 0; i < 16; ++i) {
        const std::uint32_t v = x[i] + in[i];
        out[4 * i + 0] = static_cast<std::uint8_t>(v);
        out[4 * i + 1] = static_cast<std::uint8_t>(v >> 8);
        out[4 * i + 2] = static_cast<std::uint8_t>(v >> 16);
        out[4 * i + 3] = static_cast<std::uint8_t>(v >> 24);
    }
}

} // namespace

Seed32 seed_from_u64(std::uint64_t v) {
    Seed32 s{};
    for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return s;
}

SeedExpander::SeedExpander(const Seed32& seed, std::uint64_t stream_id) : pos_(64) {
    // "expand 32-byte k" constants, key, 64-bit block counter, 64-bit nonce.
    state_[0] = 0x61707865;
    state_[1] = 0x3320646e;
    state_[2] = 0x79622d32;
    state_[3] = 0x6b206574;
    for (int i = 0; i < 8; ++i) state_[4 + i] = load_le32(seed.data() + 4 * i);
    state_[12] = 0;
    state_[13] = 0;
    state_[14] = static_cast<std::uint32_t>(stream_id);
    state_[15] = static_cast<std::uint32_t>(stream_id >> 32);
}

void SeedExpander::refill() {
    chacha20_block(state_, block_);
    pos_ = 0;
    if (++state_[12] == 0) ++state_[13];
}

std::uint64_t SeedExpander::next_u64() {
    if (pos_ + 8 > 64) refill();
    std::uint64_t v;
    std::memcpy(&v, block_.data() + pos_, 8);
    pos_ += 8;
    if constexpr (std::endian::native == std::endian::big) {
        v = __builtin_bswap64(v);
    }
    return v;
}

void SeedExpander::fill_bytes(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ >= 64) refill();
        const std::size_t take = std::min<std::size_t>(64 - pos_, out.size() - done);
        std::memcpy(out.data() + done, block_.data() + pos_, take);
        pos_ += take;
        done += take;
    }
}

std::uint64_t SeedExpander::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
    if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
    // Rejection: accept draws below the largest multiple of bound.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

} // namespace war
