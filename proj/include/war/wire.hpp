#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace war {

struct codec_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct bad_magic_error : codec_error {
    using codec_error::codec_error;
};
struct truncation_error : codec_error {
    using codec_error::codec_error;
};
struct version_error : codec_error {
    using codec_error::codec_error;
};

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }
    void put_u128(unsigned __int128 v) {
        put_u64(static_cast<std::uint64_t>(v));
        put_u64(static_cast<std::uint64_t>(v >> 64));
    }
    void put_bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t>& bytes() { return buf_; }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }
    unsigned __int128 get_u128() {
        const std::uint64_t lo = get_u64();
        const std::uint64_t hi = get_u64();
        return (static_cast<unsigned __int128>(hi) << 64) | lo;
    }
    void get_bytes(std::span<std::uint8_t> out) {
        need(out.size());
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(), out.begin());
        pos_ += out.size();
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    void expect_end() const {
        if (pos_ != data_.size()) throw truncation_error("trailing bytes after message");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw truncation_error("message truncated");
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace war
