#pragma once

#include <cstdint>
#include <vector>

#include "qsk/bits.hpp"
#include "qsk/core.hpp"
#include "qsk/quadtree.hpp"

namespace qsk {

inline constexpr char kSketchMagic[4] = {'Q', 'S', 'K', '1'};
inline constexpr std::uint16_t kSketchVersion = 1;

/// One serialized quadtree sketch. Layout (all integers little-endian):
/// magic "QSK1" | version u16 | flags u16 | n u64 | d u32 | m u32 |
/// L u16 | Lambda u16 | rootLevel i32 | seed u64 | origin d*f64 |
/// leafCount u64 | treeBits u64 bit count + bytes | leafIds packed
/// bitstream (ceil(log2 leafCount) bits per point).
struct SketchBytes {
    std::uint16_t version = kSketchVersion;
    std::uint16_t flags = 0;
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::uint32_t m = 1;
    std::uint16_t L = 0;
    std::uint16_t lambda = 0;
    std::int32_t rootLevel = 0;
    std::uint64_t seed = 0;
    std::vector<double> origin;
    std::uint64_t leafCount = 0;
    std::uint64_t treeBitCount = 0;
    std::vector<std::uint8_t> treeBits;
    std::vector<std::uint8_t> leafIds;  // n * leaf_id_width() bits

    unsigned leaf_id_width() const;
    std::size_t header_bits() const;   // everything except treeBits + leafIds
    std::size_t payload_bits() const;  // treeBits + leafIds
    std::size_t total_bits() const { return header_bits() + payload_bits(); }

    std::vector<std::uint8_t> serialize() const;
    static SketchBytes deserialize(const std::uint8_t* data, std::size_t size);
    static SketchBytes deserialize(const std::vector<std::uint8_t>& bytes);
};

/// DFS/Euler-tour encoding: each downward step writes 0, a short/long
/// discriminator bit, and the edge label (d bits, or Elias gamma for a
/// long edge length); each upward step writes 1. Leaf ordinals follow
/// DFS visit order. Deterministic for a given tree.
SketchBytes encode(const PrunedTree& t, const ShiftedHypercube& cube,
                   const SketchParams& params);

struct DecodedSketch {
    PrunedTree tree;
    ShiftedHypercube cube;
    SketchParams params;
};

/// Exact inverse of encode; levels recomputed from rootLevel and edge
/// labels. Throws CorruptSketch / VersionMismatch on malformed input.
DecodedSketch decode(const SketchBytes& b);

/// Reconstruct c(v) for a leaf: per coordinate, short-edge bits on the
/// root path contribute bit * 2^childLevel, long edges contribute zeros.
std::vector<double> decompress_point(const PrunedTree& t, std::size_t leaf,
                                     const ShiftedHypercube& cube);

}  // namespace qsk
