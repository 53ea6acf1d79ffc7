#include "qsk/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "qsk/quadtree.hpp"

namespace qsk {

namespace {

constexpr char kBlockMagic[4] = {'Q', 'S', 'K', 'B'};
constexpr char kMultiMagic[4] = {'Q', 'S', 'K', 'M'};

template <typename T>
void put_raw(std::vector<std::uint8_t>& out, T v) {
    static_assert(std::endian::native == std::endian::little);
    const auto* b = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), b, b + sizeof(v));
}

template <typename T>
T get_raw(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw CorruptSketch("container truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

ShiftedHypercube cube_for(const PointSet& ps, std::uint64_t seed) {
    try {
        return enclosing_cube(ps, seed);
    } catch (const DegeneratePointSet&) {
        // all points identical: force Delta = 1, one-leaf chain
        return enclosing_cube_with_delta(ps, 1.0, seed);
    }
}

}  // namespace

SketchBytes compress(const PointSet& ps, const SketchParams& params) {
    ps.validate();
    if (params.L < 1 || params.lambda < 1)
        throw InvalidParams("compress: L and Lambda must be >= 1");
    ShiftedHypercube cube = cube_for(ps, params.seed);
    RawTree raw = build(ps, cube, params.L);
    PrunedTree pruned = prune(raw, params.lambda);
    return encode(pruned, cube, params);
}

PointSet decompress(const SketchBytes& sk) {
    DecodedSketch dec = decode(sk);
    PointSet out(sk.n, sk.d);
    for (std::uint64_t i = 0; i < sk.n; ++i) {
        auto x = decompress_point(dec.tree, dec.tree.pointToLeaf[i], dec.cube);
        std::copy(x.begin(), x.end(), out.coords.begin() + i * sk.d);
    }
    return out;
}

std::size_t BlockSketch::payload_bits() const {
    std::size_t b = 0;
    for (const auto& s : blocks) b += s.payload_bits();
    return b;
}

std::size_t BlockSketch::total_bits() const {
    std::size_t b = 0;
    for (const auto& s : blocks) b += s.total_bits();
    return b;
}

std::vector<std::uint8_t> BlockSketch::serialize() const {
    // outer header: magic, version, m, n, d, then a section offset table
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kBlockMagic, kBlockMagic + 4);
    put_raw<std::uint16_t>(out, 1);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
    put_raw<std::uint64_t>(out, n);
    put_raw<std::uint32_t>(out, d);
    std::vector<std::vector<std::uint8_t>> sections;
    sections.reserve(blocks.size());
    for (const auto& s : blocks) sections.push_back(s.serialize());
    std::uint64_t offset = out.size() + 8 * blocks.size();
    for (const auto& s : sections) {
        put_raw<std::uint64_t>(out, offset);
        offset += s.size();
    }
    for (const auto& s : sections) out.insert(out.end(), s.begin(), s.end());
    return out;
}

BlockSketch BlockSketch::deserialize(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kBlockMagic, 4) != 0)
        throw CorruptSketch("bad block sketch magic");
    pos = 4;
    auto version = get_raw<std::uint16_t>(bytes, pos);
    if (version != 1) throw VersionMismatch("unsupported block sketch version");
    BlockSketch bsk;
    auto m = get_raw<std::uint32_t>(bytes, pos);
    bsk.n = get_raw<std::uint64_t>(bytes, pos);
    bsk.d = get_raw<std::uint32_t>(bytes, pos);
    if (m == 0 || m > bsk.d) throw CorruptSketch("bad block count");
    std::vector<std::uint64_t> offsets(m);
    for (auto& o : offsets) o = get_raw<std::uint64_t>(bytes, pos);
    for (std::uint32_t i = 0; i < m; ++i) {
        if (offsets[i] > bytes.size()) throw CorruptSketch("section offset out of range");
        std::size_t end = (i + 1 < m) ? offsets[i + 1] : bytes.size();
        if (end < offsets[i] || end > bytes.size())
            throw CorruptSketch("section extent out of range");
        bsk.blocks.push_back(
            SketchBytes::deserialize(bytes.data() + offsets[i], end - offsets[i]));
    }
    return bsk;
}

BlockSketch compress_blocks(const PointSet& ps, const SketchParams& params) {
    ps.validate();
    std::size_t m = params.m;
    if (m == 0 || ps.d % m != 0)
        throw BlockMismatch("block count " + std::to_string(m) +
                            " does not divide dimension " + std::to_string(ps.d));
    std::size_t db = ps.d / m;
    BlockSketch bsk;
    bsk.n = ps.n;
    bsk.d = static_cast<std::uint32_t>(ps.d);
    Rng master(params.seed);
    for (std::size_t b = 0; b < m; ++b) {
        PointSet sub(ps.n, db);
        for (std::size_t i = 0; i < ps.n; ++i)
            for (std::size_t j = 0; j < db; ++j)
                sub.at(i, j) = ps.at(i, b * db + j);
        SketchParams sp = params;
        sp.m = m;
        sp.seed = master.fork(b).next_u64();
        bsk.blocks.push_back(compress(sub, sp));
    }
    return bsk;
}

PointSet decompress_blocks(const BlockSketch& bsk) {
    if (bsk.blocks.empty()) throw CorruptSketch("block sketch has no sections");
    std::size_t db = bsk.blocks[0].d;
    PointSet out(bsk.n, bsk.d);
    for (std::size_t b = 0; b < bsk.m(); ++b) {
        PointSet part = decompress(bsk.blocks[b]);
        if (part.n != bsk.n || part.d != db)
            throw CorruptSketch("block section shape mismatch");
        for (std::size_t i = 0; i < part.n; ++i)
            for (std::size_t j = 0; j < db; ++j)
                out.at(i, b * db + j) = part.at(i, j);
    }
    return out;
}

std::size_t MultiTreeSketch::total_bits() const {
    std::size_t b = 0;
    for (const auto& t : trees) b += t.total_bits();
    // gamma entries are fixed-width indices into the tree list
    unsigned w = trees.size() <= 1
                     ? 1
                     : std::bit_width(trees.size() - 1);
    return b + gamma.size() * w;
}

void MultiTreeSketch::rebuild_index() {
    localIndex.clear();
    localIndex.resize(members.size());
    for (std::size_t t = 0; t < members.size(); ++t)
        for (std::uint32_t k = 0; k < members[t].size(); ++k)
            localIndex[t][members[t][k]] = k;
}

std::vector<std::uint8_t> MultiTreeSketch::serialize() const {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMultiMagic, kMultiMagic + 4);
    put_raw<std::uint16_t>(out, 1);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(trees.size()));
    put_raw<std::uint64_t>(out, n);
    put_raw<double>(out, eps);
    for (std::uint32_t g : gamma) put_raw<std::uint32_t>(out, g);
    for (std::size_t t = 0; t < trees.size(); ++t) {
        auto bytes = trees[t].serialize();
        put_raw<std::uint64_t>(out, bytes.size());
        out.insert(out.end(), bytes.begin(), bytes.end());
        put_raw<std::uint64_t>(out, members[t].size());
        for (std::uint32_t g : members[t]) put_raw<std::uint32_t>(out, g);
    }
    return out;
}

MultiTreeSketch MultiTreeSketch::deserialize(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMultiMagic, 4) != 0)
        throw CorruptSketch("bad multi-tree sketch magic");
    pos = 4;
    auto version = get_raw<std::uint16_t>(bytes, pos);
    if (version != 1) throw VersionMismatch("unsupported multi-tree version");
    MultiTreeSketch msk;
    auto k = get_raw<std::uint32_t>(bytes, pos);
    msk.n = get_raw<std::uint64_t>(bytes, pos);
    msk.eps = get_raw<double>(bytes, pos);
    msk.gamma.resize(msk.n);
    for (auto& g : msk.gamma) g = get_raw<std::uint32_t>(bytes, pos);
    for (std::uint32_t t = 0; t < k; ++t) {
        auto len = get_raw<std::uint64_t>(bytes, pos);
        if (pos + len > bytes.size()) throw CorruptSketch("tree section truncated");
        msk.trees.push_back(SketchBytes::deserialize(bytes.data() + pos, len));
        pos += len;
        auto cnt = get_raw<std::uint64_t>(bytes, pos);
        std::vector<std::uint32_t> mem(cnt);
        for (auto& g : mem) g = get_raw<std::uint32_t>(bytes, pos);
        msk.members.push_back(std::move(mem));
    }
    msk.rebuild_index();
    return msk;
}

MultiTreeSketch compress_maxdist(const PointSet& ps, double eps,
                                 std::uint64_t seed) {
    ps.validate();
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidParams("compress_maxdist: need 0 < eps < 1");

    // Parameters fixed once from the whole set; subsets can only shrink
    // the aspect ratio.
    constexpr double kDelta = 0.25;
    double phi = ps.n >= 2 ? aspect_ratio(ps, 2048, seed ^ 0x5eedULL) : 2.0;
    SketchParams params = derive_params(eps, kDelta, ps.d, std::max(phi, 2.0));
    params.eps = eps;

    int retryCap = 4 * static_cast<int>(std::ceil(std::log2(std::max<double>(ps.n, 2)))) + 8;

    MultiTreeSketch msk;
    msk.eps = eps;
    msk.n = ps.n;
    msk.gamma.assign(ps.n, 0);

    std::vector<std::uint32_t> remaining(ps.n);
    for (std::size_t i = 0; i < ps.n; ++i) remaining[i] = static_cast<std::uint32_t>(i);

    Rng master(seed);
    while (!remaining.empty()) {
        PointSet sub(remaining.size(), ps.d);
        for (std::size_t i = 0; i < remaining.size(); ++i)
            std::copy(ps.row(remaining[i]), ps.row(remaining[i]) + ps.d,
                      sub.coords.begin() + i * ps.d);

        bool done = false;
        for (int attempt = 0; attempt < retryCap && !done; ++attempt) {
            std::uint64_t treeSeed = master.next_u64();
            ShiftedHypercube cube = cube_for(sub, treeSeed);
            RawTree raw = build(sub, cube, params.L);
            PrunedTree pruned = prune(raw, params.lambda);
            std::vector<int> levels = tree_levels(pruned);

            std::vector<std::uint32_t> padded, rest;
            for (std::uint32_t i = 0; i < sub.n; ++i) {
                if (is_padded(i, sub, cube, levels, eps, params.lambda))
                    padded.push_back(i);
                else
                    rest.push_back(i);
            }
            // require the halving guarantee before accepting a tree
            if (sub.n > 1 && padded.size() * 2 < sub.n) continue;
            if (sub.n == 1 && padded.empty()) continue;

            SketchParams sp = params;
            sp.seed = treeSeed;
            std::uint32_t treeIdx = static_cast<std::uint32_t>(msk.trees.size());
            msk.trees.push_back(encode(pruned, cube, sp));
            msk.members.push_back(remaining);
            for (std::uint32_t i : padded) msk.gamma[remaining[i]] = treeIdx;
            std::vector<std::uint32_t> nextRemaining;
            nextRemaining.reserve(rest.size());
            for (std::uint32_t i : rest) nextRemaining.push_back(remaining[i]);
            remaining = std::move(nextRemaining);
            done = true;
        }
        if (!done)
            throw AmplificationExhausted(
                "compress_maxdist: no tree padded half of the remaining " +
                std::to_string(remaining.size()) + " points after " +
                std::to_string(retryCap) + " retries");
    }
    msk.rebuild_index();
    return msk;
}

double distance_query(const MultiTreeSketch& msk, std::size_t i, std::size_t j) {
    if (i == j) throw InvalidParams("distance_query: i and j must differ");
    if (i >= msk.n || j >= msk.n)
        throw IndexOutOfRange("distance_query: point index out of range");
    std::uint32_t g = std::min(msk.gamma[i], msk.gamma[j]);
    const auto& index = msk.localIndex[g];
    auto it = index.find(static_cast<std::uint32_t>(i));
    auto jt = index.find(static_cast<std::uint32_t>(j));
    if (it == index.end() || jt == index.end())
        throw CorruptSketch("distance_query: point missing from tree membership");
    DecodedSketch dec = decode(msk.trees[g]);
    auto xi = decompress_point(dec.tree, dec.tree.pointToLeaf[it->second], dec.cube);
    auto xj = decompress_point(dec.tree, dec.tree.pointToLeaf[jt->second], dec.cube);
    return euclidean(xi.data(), xj.data(), xi.size());
}

}  // namespace qsk
