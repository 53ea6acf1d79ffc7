#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <vector>

#include "qsk/core.hpp"

namespace qsk {

/// d-bit child label; bit j is 0 when the child occupies the lower half
/// of the parent cell along coordinate j.
struct Label {
    std::vector<std::uint64_t> words;

    explicit Label(std::size_t d = 0) : words((d + 63) / 64, 0) {}
    bool bit(std::size_t j) const { return (words[j >> 6] >> (j & 63)) & 1; }
    void set(std::size_t j) { words[j >> 6] |= std::uint64_t{1} << (j & 63); }

    bool operator==(const Label&) const = default;
    auto operator<=>(const Label& o) const {
        // numeric order, most significant word first
        for (std::size_t w = words.size(); w-- > 0;)
            if (auto c = words[w] <=> o.words[w]; c != 0) return c;
        return std::strong_ordering::equal;
    }
};

/// 2^d-ary quadtree over nested grids. Only occupied cells exist; points
/// are attached to the bottom-level leaves. Children are kept in label
/// order so traversal is deterministic.
struct RawTree {
    struct Node {
        int level = 0;
        std::vector<std::pair<Label, int>> children;  // sorted by label
        std::vector<std::uint32_t> points;            // leaves only
    };
    std::size_t d = 0;
    int rootLevel = 0;
    int levels = 0;  // L
    std::vector<Node> nodes;  // nodes[0] is the root

    std::size_t node_count() const { return nodes.size(); }
};

/// RawTree with non-branching chains longer than Lambda collapsed into
/// long edges labeled by the path length they replace.
struct PrunedTree {
    struct Edge {
        int child = -1;
        bool isLong = false;
        Label label;                 // short edges
        std::uint32_t longLen = 0;   // long edges, >= 2
    };
    struct Node {
        int level = 0;
        int parent = -1;
        int parentEdge = -1;  // index into nodes[parent].children
        std::vector<Edge> children;
        std::vector<std::uint32_t> points;
    };
    std::size_t d = 0;
    int rootLevel = 0;
    int levels = 0;
    std::vector<Node> nodes;               // nodes[0] is the root
    std::vector<int> leafOrder;            // DFS enumeration of leaves
    std::vector<std::uint32_t> pointToLeaf;  // point index -> leaf ordinal

    std::size_t leaf_count() const { return leafOrder.size(); }
    std::size_t long_edge_count() const;
};

/// Child bit of point coordinate y (relative to the cube origin) at a
/// node of side 2^level: which half of the parent cell it falls in,
/// half-open [low, high).
inline bool half_bit(double y, int childLevel) {
    return static_cast<std::int64_t>(std::floor(std::ldexp(y, -childLevel))) & 1;
}

/// Bucket the points into L levels of nested grids below the root cube.
RawTree build(const PointSet& ps, const ShiftedHypercube& cube, int L);

/// Collapse every maximal degree-1 chain u_0..u_k with k > Lambda+1 by
/// removing u_{Lambda+1}..u_{k-1} and attaching u_k to u_Lambda with a
/// long edge labeled k-Lambda.
PrunedTree prune(const RawTree& t, int lambda);

/// True iff at every listed level the cell containing x_i also contains
/// the l-infinity box of radius rho(level) around it.
bool is_padded(std::size_t pointIdx, const PointSet& ps,
               const ShiftedHypercube& cube, const std::vector<int>& levels,
               double eps, int lambda);

/// Distinct node levels of a pruned tree, root down.
std::vector<int> tree_levels(const PrunedTree& t);

}  // namespace qsk
