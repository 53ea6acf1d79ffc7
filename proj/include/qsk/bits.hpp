#pragma once

#include <cstdint>
#include <vector>

#include "qsk/errors.hpp"

namespace qsk {

/// Append-only bit vector. Bits fill each byte LSB-first.
class BitWriter {
  public:
    void put(bool bit) {
        if (nbits_ % 8 == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (nbits_ % 8));
        ++nbits_;
    }

    // low `width` bits of v, least significant first
    void put_uint(std::uint64_t v, unsigned width) {
        for (unsigned i = 0; i < width; ++i) put((v >> i) & 1);
    }

    // Elias gamma code for v >= 1: N zeros, then the N+1 significant
    // bits of v starting from the most significant (which is 1).
    void put_gamma(std::uint64_t v) {
        unsigned nbits = 64 - static_cast<unsigned>(__builtin_clzll(v));
        for (unsigned i = 1; i < nbits; ++i) put(false);
        for (unsigned i = nbits; i-- > 0;) put((v >> i) & 1);
    }

    std::size_t bit_count() const { return nbits_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
    std::size_t nbits_ = 0;
};

/// Bounds-checked reader over a bit vector; throws CorruptSketch on
/// underflow so malformed streams can never read out of bounds.
class BitReader {
  public:
    BitReader(const std::uint8_t* data, std::size_t nbits)
        : data_(data), nbits_(nbits) {}

    bool get() {
        if (pos_ >= nbits_) throw CorruptSketch("bitstream underflow at bit " + std::to_string(pos_));
        bool b = (data_[pos_ / 8] >> (pos_ % 8)) & 1;
        ++pos_;
        return b;
    }

    std::uint64_t get_uint(unsigned width) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i)
            if (get()) v |= std::uint64_t{1} << i;
        return v;
    }

    std::uint64_t get_gamma() {
        unsigned zeros = 0;
        while (!get()) {
            if (++zeros > 63) throw CorruptSketch("gamma code too long");
        }
        std::uint64_t v = 1;
        for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | (get() ? 1 : 0);
        return v;
    }

    std::size_t pos() const { return pos_; }
    bool exhausted() const { return pos_ == nbits_; }

  private:
    const std::uint8_t* data_;
    std::size_t nbits_;
    std::size_t pos_ = 0;
};

}  // namespace qsk
