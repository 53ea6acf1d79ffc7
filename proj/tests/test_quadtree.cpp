#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qsk/core.hpp"
#include "qsk/quadtree.hpp"

using namespace qsk;

namespace {

ShiftedHypercube unit_cube(std::size_t d, int rootLevel = 0) {
    ShiftedHypercube cube;
    cube.origin.assign(d, 0.0);
    cube.shift.assign(d, 0.0);
    cube.rootLevel = rootLevel;
    cube.side = std::exp2(rootLevel);
    return cube;
}

PointSet random_points(std::size_t n, std::size_t d, Rng& rng) {
    PointSet ps(n, d);
    for (auto& v : ps.coords) v = rng.next_double();
    return ps;
}

// per-leaf root path length in raw levels: short edges + long labels
int path_levels(const PrunedTree& t, int leafNode) {
    int total = 0;
    for (int node = leafNode; t.nodes[node].parent >= 0; node = t.nodes[node].parent) {
        const auto& e =
            t.nodes[t.nodes[node].parent].children[t.nodes[node].parentEdge];
        total += e.isLong ? static_cast<int>(e.longLen) : 1;
    }
    return total;
}

}  // namespace

TEST_CASE("build: single point yields a degree-1 chain") {
    PointSet ps(1, 3, {0.3, 0.6, 0.1});
    auto cube = unit_cube(3);
    for (int L : {1, 4, 9}) {
        RawTree t = build(ps, cube, L);
        CHECK(t.nodes.size() == static_cast<std::size_t>(L + 1));
        int node = 0, depth = 0;
        while (!t.nodes[node].children.empty()) {
            CHECK(t.nodes[node].children.size() == 1);
            node = t.nodes[node].children[0].second;
            ++depth;
        }
        CHECK(depth == L);
        CHECK(t.nodes[node].points == std::vector<std::uint32_t>{0});
    }
}

TEST_CASE("build: 1-d hand bucketing") {
    // {0.25, 0.75} in [0,1), L=1: children 0 and 1
    PointSet ps(2, 1, {0.25, 0.75});
    RawTree t = build(ps, unit_cube(1), 1);
    REQUIRE(t.nodes[0].children.size() == 2);
    CHECK(t.nodes[0].children[0].first.bit(0) == false);
    CHECK(t.nodes[0].children[1].first.bit(0) == true);
    CHECK(t.nodes[t.nodes[0].children[0].second].points == std::vector<std::uint32_t>{0});
    CHECK(t.nodes[t.nodes[0].children[1].second].points == std::vector<std::uint32_t>{1});
}

TEST_CASE("build: upper half in both coordinates gets label 11") {
    PointSet ps(2, 2, {0.9, 0.8, 0.1, 0.1});
    RawTree t = build(ps, unit_cube(2), 1);
    REQUIRE(t.nodes[0].children.size() == 2);
    const auto& hi = t.nodes[0].children[1].first;  // labels sorted, 11 last
    CHECK(hi.bit(0));
    CHECK(hi.bit(1));
}

TEST_CASE("build: boundary coordinate goes to the upper (half-open) cell") {
    PointSet ps(1, 1, {0.5});
    RawTree t = build(ps, unit_cube(1), 1);
    REQUIRE(t.nodes[0].children.size() == 1);
    CHECK(t.nodes[0].children[0].first.bit(0) == true);
}

TEST_CASE("prune: chain rules") {
    Rng rng(5);
    PointSet one(1, 2, {0.3, 0.7});
    auto cube = unit_cube(2);

    SUBCASE("k=5 chain, lambda=2 -> long edge labeled 3") {
        RawTree t = build(one, cube, 5);
        PrunedTree p = prune(t, 2);
        // root, u1, u2, then the leaf u5 behind a long edge
        CHECK(p.nodes.size() == 4);
        const auto& u2 = p.nodes[2];
        REQUIRE(u2.children.size() == 1);
        CHECK(u2.children[0].isLong);
        CHECK(u2.children[0].longLen == 3);
        CHECK(p.nodes[u2.children[0].child].level == p.nodes[0].level - 5);
        CHECK(p.leaf_count() == 1);
    }
    SUBCASE("k=lambda+1 untouched") {
        RawTree t = build(one, cube, 3);
        PrunedTree p = prune(t, 2);
        CHECK(p.nodes.size() == t.nodes.size());
        CHECK(p.long_edge_count() == 0);
    }
    SUBCASE("lambda >= L is the identity") {
        PointSet ps = random_points(20, 2, rng);
        RawTree t = build(ps, cube, 6);
        PrunedTree p = prune(t, 6);
        CHECK(p.nodes.size() == t.nodes.size());
        CHECK(p.long_edge_count() == 0);
    }
}

TEST_CASE("prune invariants on random trees") {
    Rng rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 1 + rng.next_below(40);
        std::size_t d = 1 + rng.next_below(4);
        int L = 1 + static_cast<int>(rng.next_below(10));
        int lambda = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(L)));
        PointSet ps = random_points(n, d, rng);
        auto cube = unit_cube(d);
        RawTree raw = build(ps, cube, L);
        PrunedTree p = prune(raw, lambda);

        // leaf census: every point in exactly one leaf, raw and pruned agree
        std::size_t rawLeaves = 0;
        for (const auto& node : raw.nodes)
            if (node.children.empty()) ++rawLeaves;
        CHECK(p.leaf_count() == rawLeaves);
        CHECK(p.pointToLeaf.size() == n);
        std::vector<int> seen(p.leaf_count(), 0);
        for (std::uint32_t i = 0; i < n; ++i) ++seen[p.pointToLeaf[i]];
        std::size_t covered = 0;
        for (int node : p.leafOrder) covered += p.nodes[node].points.size();
        CHECK(covered == n);

        // path-length conservation: short edges + long labels = L per leaf
        for (int leaf : p.leafOrder) CHECK(path_levels(p, leaf) == L);

        // chain bound: runs of degree-1 nodes joined by short edges <= lambda
        for (std::size_t v = 0; v < p.nodes.size(); ++v) {
            if (p.nodes[v].children.size() != 1) continue;
            int run = 1, node = static_cast<int>(v);
            while (true) {
                const auto& e = p.nodes[node].children[0];
                if (e.isLong) break;
                node = e.child;
                if (p.nodes[node].children.size() != 1) break;
                ++run;
            }
            // a kept chain has up to lambda short edges plus the node
            // carrying the long (or final) edge: lambda + 1 nodes
            CHECK(run <= lambda + 1);
        }

        // node count bound consistent with the sketch size lemma
        CHECK(p.nodes.size() <= 2 * n * (lambda + 1) + n + 1);

        // level bookkeeping
        for (const auto& node : p.nodes)
            for (const auto& e : node.children) {
                int drop = e.isLong ? static_cast<int>(e.longLen) : 1;
                CHECK(p.nodes[e.child].level == node.level - drop);
            }

        // every long edge bottoms out at a leaf or branching node;
        // labels >= 2 and never stacked immediately below another long edge
        for (const auto& node : p.nodes)
            for (const auto& e : node.children)
                if (e.isLong) {
                    CHECK(e.longLen >= 2);
                    CHECK(p.nodes[e.child].children.size() != 1);
                }
    }
}

TEST_CASE("build matches floor-division bucketing oracle") {
    Rng rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 2 + rng.next_below(200);
        std::size_t d = 1 + rng.next_below(8);
        int L = 1 + static_cast<int>(rng.next_below(6));
        PointSet ps = random_points(n, d, rng);
        auto cube = enclosing_cube(ps, rng.next_u64());
        RawTree raw = build(ps, cube, L);
        PrunedTree p = prune(raw, L);  // identity pruning

        // oracle: bottom-level cell coordinates by direct floor division
        int bottom = cube.rootLevel - L;
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < n; ++j) {
                bool sameCell = true;
                for (std::size_t c = 0; c < d && sameCell; ++c) {
                    auto cell = [&](std::uint32_t pt) {
                        return std::floor(
                            std::ldexp(ps.at(pt, c) - cube.origin[c], -bottom));
                    };
                    sameCell = cell(i) == cell(j);
                }
                CHECK((p.pointToLeaf[i] == p.pointToLeaf[j]) == sameCell);
            }
    }
}

TEST_CASE("is_padded basics") {
    auto cube = unit_cube(1, 4);  // side 16
    SUBCASE("cell-center point is padded when rho is small") {
        PointSet ps(1, 1, {6.0});  // center of [4,8) at level 2
        // rho(l) = 8/eps * 2^(l-lambda); eps=8, lambda=4 -> rho(2)=0.25
        CHECK(is_padded(0, ps, cube, {2}, 8.0, 4));
    }
    SUBCASE("boundary point is never padded") {
        PointSet ps(1, 1, {4.0});
        CHECK_FALSE(is_padded(0, ps, cube, {2}, 8.0, 4));
    }
    SUBCASE("fails when rho exceeds the half cell") {
        PointSet ps(1, 1, {6.0});
        CHECK_FALSE(is_padded(0, ps, cube, {2}, 8.0, 0));
    }
}

TEST_CASE("padding probability obeys the per-level union bound (Monte Carlo)") {
    // Each level fails per coordinate with probability 2*rho(l)/2^l =
    // 16*sqrt(d)/(eps*2^Lambda), independent of l, so the union bound over
    // all tree levels is numLevels * d * that. The often-quoted <= delta
    // figure only covers the log2(Phi) coarsest levels; the full-tree
    // probability carries the extra (L/log2(Phi)) factor checked here.
    const double eps = 0.25, delta = 0.2;
    Rng rng(31337);
    PointSet ps = random_points(64, 4, rng);
    double phi = aspect_ratio(ps);
    SketchParams params = derive_params(eps, delta, ps.d, phi);

    std::size_t trials = 200, notPadded = 0, total = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        auto cube = enclosing_cube(ps, rng.next_u64());
        RawTree raw = build(ps, cube, params.L);
        PrunedTree p = prune(raw, params.lambda);
        auto levels = tree_levels(p);
        for (std::uint32_t i = 0; i < ps.n; ++i) {
            ++total;
            if (!is_padded(i, ps, cube, levels, eps, params.lambda)) ++notPadded;
        }
    }
    double fraction = static_cast<double>(notPadded) / static_cast<double>(total);
    double perLevel =
        std::min(1.0, 16.0 * std::sqrt(static_cast<double>(ps.d)) /
                          (eps * std::exp2(static_cast<double>(params.lambda))));
    double bound = static_cast<double>(params.L + 1) * static_cast<double>(ps.d) *
                   perLevel;
    CHECK(fraction <= bound + 0.05);
    // and it still tracks delta within the L/log2(Phi) factor
    CHECK(fraction <= delta * (static_cast<double>(params.L) / std::log2(phi)) + 0.05);
}
