#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qsk/codec.hpp"
#include "qsk/core.hpp"

namespace qsk {

/// enclosing_cube -> build -> prune -> encode. Degenerate inputs (all
/// points identical) fall back to a unit-diameter cube so the pipeline
/// still yields a valid one-leaf sketch.
SketchBytes compress(const PointSet& ps, const SketchParams& params);

/// Decompress every stored point back into the original frame.
PointSet decompress(const SketchBytes& sk);

/// Independent QuadSketch per contiguous coordinate block; block i
/// covers coordinates [i*d/m, (i+1)*d/m). Per-block randomness is
/// forked from the master seed by block index.
struct BlockSketch {
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::vector<SketchBytes> blocks;

    std::size_t m() const { return blocks.size(); }
    std::size_t payload_bits() const;
    std::size_t total_bits() const;

    std::vector<std::uint8_t> serialize() const;
    static BlockSketch deserialize(const std::vector<std::uint8_t>& bytes);
};

BlockSketch compress_blocks(const PointSet& ps, const SketchParams& params);
PointSet decompress_blocks(const BlockSketch& bsk);

/// Recursive sketch for max-distortion queries: tree T_t covers the
/// points still unpadded after trees 1..t-1; gamma maps each point to
/// the first tree where it is padded.
struct MultiTreeSketch {
    double eps = 0.0;
    std::uint64_t n = 0;
    std::vector<SketchBytes> trees;
    std::vector<std::vector<std::uint32_t>> members;  // global ids, local order
    std::vector<std::uint32_t> gamma;                 // point -> tree index (0-based)

    // local index of a global point within each tree it belongs to
    std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> localIndex;

    std::size_t total_bits() const;
    void rebuild_index();

    std::vector<std::uint8_t> serialize() const;
    static MultiTreeSketch deserialize(const std::vector<std::uint8_t>& bytes);
};

/// Theorem-2-style construction with per-tree failure probability 0.25
/// and retry amplification (cap 4*ceil(log2 n)+8 per level). Throws
/// AmplificationExhausted if a level never pads half its points.
MultiTreeSketch compress_maxdist(const PointSet& ps, double eps,
                                 std::uint64_t seed);

/// Estimate of ||x_i - x_j|| from the first tree containing both points
/// padded; within (1 +- eps) of the truth when construction succeeded.
double distance_query(const MultiTreeSketch& msk, std::size_t i, std::size_t j);

}  // namespace qsk
