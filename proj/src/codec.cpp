#include "qsk/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace qsk {

namespace {

void put_le(std::vector<std::uint8_t>& out, const void* p, std::size_t size) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + size);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    static_assert(std::endian::native == std::endian::little);
    put_le(out, &v, sizeof(v));
}

struct ByteReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    void read(void* out, std::size_t count) {
        if (pos + count > size)
            throw CorruptSketch("sketch truncated at byte offset " + std::to_string(pos));
        std::memcpy(out, data + pos, count);
        pos += count;
    }

    template <typename T>
    T get() {
        T v;
        read(&v, sizeof(v));
        return v;
    }
};

}  // namespace

unsigned SketchBytes::leaf_id_width() const {
    if (leafCount <= 1) return 0;
    return 64 - static_cast<unsigned>(__builtin_clzll(leafCount - 1));
}

std::size_t SketchBytes::header_bits() const {
    return 8 * (4 + 2 + 2 + 8 + 4 + 4 + 2 + 2 + 4 + 8 + 8 * origin.size() + 8 + 8);
}

std::size_t SketchBytes::payload_bits() const {
    return treeBitCount + n * leaf_id_width();
}

std::vector<std::uint8_t> SketchBytes::serialize() const {
    std::vector<std::uint8_t> out;
    put_le(out, kSketchMagic, 4);
    put_le(out, version);
    put_le(out, flags);
    put_le(out, n);
    put_le(out, d);
    put_le(out, m);
    put_le(out, L);
    put_le(out, lambda);
    put_le(out, rootLevel);
    put_le(out, seed);
    for (double v : origin) put_le(out, v);
    put_le(out, leafCount);
    put_le(out, treeBitCount);
    put_le(out, treeBits.data(), treeBits.size());
    put_le(out, leafIds.data(), leafIds.size());
    return out;
}

SketchBytes SketchBytes::deserialize(const std::uint8_t* data, std::size_t size) {
    ByteReader r{data, size};
    char magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, kSketchMagic, 4) != 0)
        throw CorruptSketch("bad magic");
    SketchBytes b;
    b.version = r.get<std::uint16_t>();
    if (b.version != kSketchVersion)
        throw VersionMismatch("unsupported sketch version " + std::to_string(b.version));
    b.flags = r.get<std::uint16_t>();
    b.n = r.get<std::uint64_t>();
    b.d = r.get<std::uint32_t>();
    b.m = r.get<std::uint32_t>();
    b.L = r.get<std::uint16_t>();
    b.lambda = r.get<std::uint16_t>();
    b.rootLevel = r.get<std::int32_t>();
    b.seed = r.get<std::uint64_t>();
    if (b.d == 0 || b.d > (1u << 24))
        throw CorruptSketch("implausible dimension");
    if (b.n > size * 8 + (1u << 20))
        throw CorruptSketch("implausible point count");
    b.origin.resize(b.d);
    for (auto& v : b.origin) v = r.get<double>();
    b.leafCount = r.get<std::uint64_t>();
    b.treeBitCount = r.get<std::uint64_t>();
    std::size_t treeBytes = (b.treeBitCount + 7) / 8;
    if (treeBytes > size) throw CorruptSketch("tree bitstream longer than file");
    b.treeBits.resize(treeBytes);
    r.read(b.treeBits.data(), treeBytes);
    std::size_t idBits = b.n * b.leaf_id_width();
    std::size_t idBytes = (idBits + 7) / 8;
    if (idBytes > size) throw CorruptSketch("leaf id stream longer than file");
    b.leafIds.resize(idBytes);
    r.read(b.leafIds.data(), idBytes);
    return b;
}

SketchBytes SketchBytes::deserialize(const std::vector<std::uint8_t>& bytes) {
    return deserialize(bytes.data(), bytes.size());
}

SketchBytes encode(const PrunedTree& t, const ShiftedHypercube& cube,
                   const SketchParams& params) {
    SketchBytes b;
    b.n = t.pointToLeaf.size();
    b.d = static_cast<std::uint32_t>(t.d);
    b.m = static_cast<std::uint32_t>(params.m);
    b.L = static_cast<std::uint16_t>(params.L);
    b.lambda = static_cast<std::uint16_t>(params.lambda);
    b.rootLevel = t.rootLevel;
    b.seed = params.seed;
    b.origin = cube.origin;
    b.leafCount = t.leaf_count();

    BitWriter tw;
    // DFS; encode() relies on the tree's child order being deterministic.
    struct Frame { int node; std::size_t next; };
    std::vector<Frame> stack{{0, 0}};
    while (!stack.empty()) {
        auto& fr = stack.back();
        const auto& node = t.nodes[fr.node];
        if (fr.next < node.children.size()) {
            const auto& e = node.children[fr.next++];
            tw.put(false);  // downward
            tw.put(e.isLong);
            if (e.isLong) {
                tw.put_gamma(e.longLen);
            } else {
                for (std::size_t j = 0; j < t.d; ++j) tw.put(e.label.bit(j));
            }
            stack.push_back({e.child, 0});
        } else {
            stack.pop_back();
            if (!stack.empty()) tw.put(true);  // upward
        }
    }
    b.treeBitCount = tw.bit_count();
    b.treeBits = tw.bytes();

    BitWriter iw;
    unsigned width = b.leaf_id_width();
    for (std::uint32_t leaf : t.pointToLeaf) iw.put_uint(leaf, width);
    b.leafIds = iw.bytes();
    return b;
}

DecodedSketch decode(const SketchBytes& b) {
    DecodedSketch out;
    out.cube.origin = b.origin;
    out.cube.rootLevel = b.rootLevel;
    out.cube.side = std::exp2(b.rootLevel);
    out.params.L = b.L;
    out.params.lambda = b.lambda;
    out.params.m = b.m;
    out.params.seed = b.seed;

    PrunedTree& t = out.tree;
    t.d = b.d;
    t.rootLevel = b.rootLevel;
    t.levels = b.L;
    t.nodes.emplace_back();
    t.nodes[0].level = b.rootLevel;

    BitReader r(b.treeBits.data(), b.treeBitCount);
    std::vector<int> stack{0};
    while (!r.exhausted()) {
        if (!r.get()) {  // downward
            int parent = stack.back();
            PrunedTree::Edge e;
            e.isLong = r.get();
            int childLevel;
            if (e.isLong) {
                std::uint64_t len = r.get_gamma();
                if (len < 2 || len > (1u << 20))
                    throw CorruptSketch("invalid long edge length");
                e.longLen = static_cast<std::uint32_t>(len);
                childLevel = t.nodes[parent].level - static_cast<int>(len);
            } else {
                e.label = Label(b.d);
                for (std::size_t j = 0; j < b.d; ++j)
                    if (r.get()) e.label.set(j);
                childLevel = t.nodes[parent].level - 1;
            }
            int me = static_cast<int>(t.nodes.size());
            if (t.nodes.size() > b.treeBitCount + 1)
                throw CorruptSketch("tree node count exceeds bitstream bound");
            e.child = me;
            t.nodes.emplace_back();
            t.nodes[me].level = childLevel;
            t.nodes[me].parent = parent;
            t.nodes[me].parentEdge = static_cast<int>(t.nodes[parent].children.size());
            t.nodes[parent].children.push_back(e);
            stack.push_back(me);
        } else {  // upward
            if (stack.size() <= 1)
                throw CorruptSketch("upward step at root, bit " + std::to_string(r.pos()));
            stack.pop_back();
        }
    }
    if (stack.size() != 1)
        throw CorruptSketch("DFS walk did not return to the root");

    // leaf enumeration in DFS order
    std::vector<std::pair<int, std::size_t>> walk{{0, 0}};
    while (!walk.empty()) {
        auto& [node, childPos] = walk.back();
        if (t.nodes[node].children.empty()) {
            t.leafOrder.push_back(node);
            walk.pop_back();
            continue;
        }
        if (childPos >= t.nodes[node].children.size()) {
            walk.pop_back();
            continue;
        }
        int next = t.nodes[node].children[childPos].child;
        ++childPos;
        walk.push_back({next, 0});
    }
    if (t.leafOrder.size() != b.leafCount)
        throw CorruptSketch("leaf count mismatch");

    BitReader ir(b.leafIds.data(), b.leafIds.size() * 8);
    unsigned width = b.leaf_id_width();
    t.pointToLeaf.resize(b.n);
    for (std::uint64_t i = 0; i < b.n; ++i) {
        std::uint64_t leaf = ir.get_uint(width);
        if (leaf >= b.leafCount) throw CorruptSketch("leaf id out of range");
        t.pointToLeaf[i] = static_cast<std::uint32_t>(leaf);
        t.nodes[t.leafOrder[leaf]].points.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

std::vector<double> decompress_point(const PrunedTree& t, std::size_t leaf,
                                     const ShiftedHypercube& cube) {
    if (leaf >= t.leafOrder.size())
        throw LeafOutOfRange("leaf ordinal " + std::to_string(leaf) + " out of range");
    // collect the root path
    std::vector<std::pair<int, int>> path;  // (node, parentEdge)
    for (int node = t.leafOrder[leaf]; t.nodes[node].parent >= 0;
         node = t.nodes[node].parent)
        path.emplace_back(t.nodes[node].parent, t.nodes[node].parentEdge);

    std::vector<double> x = cube.origin;
    // most significant level first, so additions stay exact as long as
    // the expansion fits a double (<= 1 ulp drift otherwise)
    for (std::size_t s = path.size(); s-- > 0;) {
        auto [parent, edgeIdx] = path[s];
        const auto& e = t.nodes[parent].children[edgeIdx];
        if (e.isLong) continue;  // zeros
        double scale = std::exp2(t.nodes[e.child].level);
        for (std::size_t j = 0; j < t.d; ++j)
            if (e.label.bit(j)) x[j] += scale;
    }
    return x;
}

}  // namespace qsk
