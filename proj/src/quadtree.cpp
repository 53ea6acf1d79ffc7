#include "qsk/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace qsk {

std::size_t PrunedTree::long_edge_count() const {
    std::size_t c = 0;
    for (const auto& node : nodes)
        for (const auto& e : node.children)
            if (e.isLong) ++c;
    return c;
}

RawTree build(const PointSet& ps, const ShiftedHypercube& cube, int L) {
    RawTree t;
    t.d = ps.d;
    t.rootLevel = cube.rootLevel;
    t.levels = L;
    t.nodes.push_back({cube.rootLevel, {}, {}});

    struct Frame {
        int node;
        std::vector<std::uint32_t> pts;
    };
    std::vector<Frame> stack;
    {
        std::vector<std::uint32_t> all(ps.n);
        for (std::size_t i = 0; i < ps.n; ++i) all[i] = static_cast<std::uint32_t>(i);
        stack.push_back({0, std::move(all)});
    }

    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        int level = t.nodes[fr.node].level;
        if (level == cube.rootLevel - L) {
            t.nodes[fr.node].points = std::move(fr.pts);
            continue;
        }
        int childLevel = level - 1;
        std::map<Label, std::vector<std::uint32_t>> buckets;
        Label key(ps.d);
        for (std::uint32_t p : fr.pts) {
            std::fill(key.words.begin(), key.words.end(), 0);
            for (std::size_t j = 0; j < ps.d; ++j)
                if (half_bit(ps.at(p, j) - cube.origin[j], childLevel)) key.set(j);
            buckets[key].push_back(p);
        }
        for (auto& [label, pts] : buckets) {
            int child = static_cast<int>(t.nodes.size());
            t.nodes.push_back({childLevel, {}, {}});
            t.nodes[fr.node].children.emplace_back(label, child);
            stack.push_back({child, std::move(pts)});
        }
    }
    return t;
}

namespace {

struct Pruner {
    const RawTree& src;
    PrunedTree& dst;
    int lambda;

    // Copy a node (points only, no children yet) and attach it under
    // dstParent via the given edge. Returns the new node index.
    int attach(int srcNode, int dstParent, PrunedTree::Edge edge) {
        int me = static_cast<int>(dst.nodes.size());
        dst.nodes.emplace_back();
        auto& node = dst.nodes[me];
        node.level = src.nodes[srcNode].level;
        node.parent = dstParent;
        node.points = src.nodes[srcNode].points;
        if (dstParent >= 0) {
            edge.child = me;
            node.parentEdge = static_cast<int>(dst.nodes[dstParent].children.size());
            dst.nodes[dstParent].children.push_back(edge);
        }
        return me;
    }

    // srcNode is a path endpoint u_0 (root, leaf, or degree >= 2),
    // already copied as dstNode. Process each outgoing chain.
    void recurse(int srcNode, int dstNode) {
        for (const auto& [label, childIdx] : src.nodes[srcNode].children) {
            // edges u_0->u_1 ... u_{k-1}->u_k; u_1..u_{k-1} have degree 1
            std::vector<std::pair<Label, int>> chain;
            chain.emplace_back(label, childIdx);
            int cur = childIdx;
            while (src.nodes[cur].children.size() == 1) {
                chain.push_back(src.nodes[cur].children[0]);
                cur = src.nodes[cur].children[0].second;
            }
            int k = static_cast<int>(chain.size());
            int keep = (k > lambda + 1) ? lambda : k - 1;
            int at = dstNode;
            for (int s = 0; s < keep; ++s) {
                PrunedTree::Edge e;
                e.isLong = false;
                e.label = chain[s].first;
                at = attach(chain[s].second, at, e);
            }
            PrunedTree::Edge last;
            if (k > lambda + 1) {
                last.isLong = true;
                last.longLen = static_cast<std::uint32_t>(k - lambda);
            } else {
                last.isLong = false;
                last.label = chain[k - 1].first;
            }
            int endNode = attach(cur, at, last);
            recurse(cur, endNode);
        }
    }
};

}  // namespace

PrunedTree prune(const RawTree& t, int lambda) {
    PrunedTree out;
    out.d = t.d;
    out.rootLevel = t.rootLevel;
    out.levels = t.levels;
    Pruner pr{t, out, lambda};
    int root = pr.attach(0, -1, PrunedTree::Edge{});
    pr.recurse(0, root);

    // DFS leaf enumeration and point->leaf map
    std::size_t n = 0;
    for (const auto& node : out.nodes) n += node.points.size();
    out.pointToLeaf.assign(n, 0);
    // iterative DFS, children visited in stored (label) order
    std::vector<std::pair<int, std::size_t>> walk{{0, 0}};
    while (!walk.empty()) {
        auto& [node, childPos] = walk.back();
        if (out.nodes[node].children.empty() && childPos == 0) {
            std::uint32_t leaf = static_cast<std::uint32_t>(out.leafOrder.size());
            out.leafOrder.push_back(node);
            for (std::uint32_t p : out.nodes[node].points) out.pointToLeaf[p] = leaf;
            walk.pop_back();
            continue;
        }
        if (childPos >= out.nodes[node].children.size()) {
            walk.pop_back();
            continue;
        }
        int next = out.nodes[node].children[childPos].child;
        ++childPos;
        walk.push_back({next, 0});
    }
    return out;
}

bool is_padded(std::size_t pointIdx, const PointSet& ps,
               const ShiftedHypercube& cube, const std::vector<int>& levels,
               double eps, int lambda) {
    for (int level : levels) {
        double radius = rho(level, ps.d, eps, lambda);
        double cellSide = std::exp2(level);
        if (2.0 * radius > cellSide) return false;
        for (std::size_t j = 0; j < ps.d; ++j) {
            double y = ps.at(pointIdx, j) - cube.origin[j];
            double within = y - std::floor(std::ldexp(y, -level)) * cellSide;
            if (within < radius || cellSide - within < radius) return false;
        }
    }
    return true;
}

std::vector<int> tree_levels(const PrunedTree& t) {
    std::set<int> s;
    for (const auto& node : t.nodes) s.insert(node.level);
    return std::vector<int>(s.rbegin(), s.rend());
}

}  // namespace qsk
