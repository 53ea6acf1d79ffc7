#include "qsk/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace qsk {

namespace {

double sqdist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

unsigned bits_for(std::size_t k) {
    return k <= 1 ? 1 : static_cast<unsigned>(std::bit_width(k - 1));
}

}  // namespace

double GridQuantizer::quantize_value(double v, std::size_t dim) const {
    double lo = minv[dim], hi = maxv[dim];
    if (hi == lo) return lo;  // constant dimension, single landmark
    double step = (hi - lo) / static_cast<double>(k - 1);
    // midpoint ties round toward the larger landmark
    double idx = std::floor((v - lo) / step + 0.5);
    idx = std::clamp(idx, 0.0, static_cast<double>(k - 1));
    return lo + idx * step;
}

std::size_t GridQuantizer::code_bits(std::size_t n, std::size_t d) const {
    return n * d * bits_for(k);
}

std::pair<GridQuantizer, PointSet> grid_fit_quantize(const PointSet& ps,
                                                     std::size_t k) {
    if (k < 2) throw InvalidParams("grid_fit_quantize: k must be >= 2");
    GridQuantizer q;
    q.k = k;
    q.minv.assign(ps.d, std::numeric_limits<double>::infinity());
    q.maxv.assign(ps.d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ps.n; ++i)
        for (std::size_t j = 0; j < ps.d; ++j) {
            q.minv[j] = std::min(q.minv[j], ps.at(i, j));
            q.maxv[j] = std::max(q.maxv[j], ps.at(i, j));
        }
    PointSet out(ps.n, ps.d);
    for (std::size_t i = 0; i < ps.n; ++i)
        for (std::size_t j = 0; j < ps.d; ++j)
            out.at(i, j) = q.quantize_value(ps.at(i, j), j);
    return {std::move(q), std::move(out)};
}

KMeansResult kmeans(const std::vector<double>& vectors, std::size_t count,
                    std::size_t dim, std::size_t k, std::uint64_t seed,
                    std::size_t maxIters) {
    if (count == 0 || dim == 0) throw EmptyInput("kmeans: empty input");
    if (k < 1 || maxIters < 1) throw InvalidParams("kmeans: k and maxIters must be >= 1");
    k = std::min(k, count);

    KMeansResult res;
    res.k = k;
    res.dim = dim;
    res.centroids.resize(k * dim);
    res.assign.assign(count, 0);

    const double* data = vectors.data();
    auto vec = [&](std::size_t i) { return data + i * dim; };
    auto cen = [&](std::size_t c) { return res.centroids.data() + c * dim; };

    // k-means++ seeding
    Rng rng(seed);
    std::vector<double> nearestSq(count, std::numeric_limits<double>::infinity());
    std::size_t first = rng.next_below(count);
    std::copy(vec(first), vec(first) + dim, cen(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            nearestSq[i] = std::min(nearestSq[i], sqdist(vec(i), cen(c - 1), dim));
            total += nearestSq[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = rng.next_double() * total, acc = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                acc += nearestSq[i];
                if (acc >= target) { pick = i; break; }
            }
        } else {
            pick = rng.next_below(count);
        }
        std::copy(vec(pick), vec(pick) + dim, cen(c));
    }

    std::vector<double> sums(k * dim);
    std::vector<std::size_t> sizes(k);
    for (std::size_t iter = 0; iter < maxIters; ++iter) {
        bool changed = false;
        double objective = 0.0;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t best = 0;
            double bestSq = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double s = sqdist(vec(i), cen(c), dim);
                if (s < bestSq) { bestSq = s; best = static_cast<std::uint32_t>(c); }
            }
            objective += bestSq;
            if (res.assign[i] != best) changed = true;
            res.assign[i] = best;
            ++sizes[best];
            for (std::size_t j = 0; j < dim; ++j) sums[best * dim + j] += vec(i)[j];
        }
        res.objectiveTrace.push_back(objective);
        if (!changed && iter > 0) break;
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                for (std::size_t j = 0; j < dim; ++j)
                    cen(c)[j] = sums[c * dim + j] / static_cast<double>(sizes[c]);
            } else {
                // re-seed an empty cluster from the farthest point
                std::size_t far = 0;
                double farSq = -1.0;
                for (std::size_t i = 0; i < count; ++i) {
                    double s = sqdist(vec(i), cen(res.assign[i]), dim);
                    if (s > farSq) { farSq = s; far = i; }
                }
                std::copy(vec(far), vec(far) + dim, cen(c));
            }
        }
    }

    // final assignment against the last centroid update
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t best = 0;
        double bestSq = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double s = sqdist(vec(i), cen(c), dim);
            if (s < bestSq) { bestSq = s; best = static_cast<std::uint32_t>(c); }
        }
        res.assign[i] = best;
    }
    return res;
}

std::size_t PQCodebook::code_bits() const { return n * m * bits_for(k); }

std::size_t PQCodebook::codebook_bits() const {
    return m * k * block_dim() * 64;
}

std::vector<std::uint8_t> PQCodebook::serialize() const {
    std::vector<std::uint8_t> out;
    const char magic[4] = {'Q', 'S', 'P', 'Q'};
    out.insert(out.end(), magic, magic + 4);
    auto put64 = [&](std::uint64_t v) {
        const auto* b = reinterpret_cast<const std::uint8_t*>(&v);
        out.insert(out.end(), b, b + 8);
    };
    put64(n); put64(d); put64(m); put64(k);
    const auto* cb = reinterpret_cast<const std::uint8_t*>(centroids.data());
    out.insert(out.end(), cb, cb + centroids.size() * 8);
    // packed code array
    unsigned w = bits_for(k);
    std::size_t nbits = codes.size() * w;
    std::size_t start = out.size();
    out.resize(out.size() + (nbits + 7) / 8, 0);
    std::size_t bit = 0;
    for (std::uint32_t c : codes) {
        for (unsigned i = 0; i < w; ++i, ++bit)
            if ((c >> i) & 1) out[start + bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    return out;
}

PQCodebook PQCodebook::deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 36 || std::memcmp(bytes.data(), "QSPQ", 4) != 0)
        throw CorruptSketch("bad PQ codebook magic");
    std::size_t pos = 4;
    auto get64 = [&]() {
        if (pos + 8 > bytes.size()) throw CorruptSketch("PQ codebook truncated");
        std::uint64_t v;
        std::memcpy(&v, bytes.data() + pos, 8);
        pos += 8;
        return v;
    };
    PQCodebook cb;
    cb.n = get64(); cb.d = get64(); cb.m = get64(); cb.k = get64();
    if (cb.m == 0 || cb.d == 0 || cb.d % cb.m != 0 || cb.k == 0)
        throw CorruptSketch("bad PQ codebook shape");
    std::size_t csize = cb.m * cb.k * cb.block_dim();
    if (pos + csize * 8 > bytes.size()) throw CorruptSketch("PQ codebook truncated");
    cb.centroids.resize(csize);
    std::memcpy(cb.centroids.data(), bytes.data() + pos, csize * 8);
    pos += csize * 8;
    unsigned w = bits_for(cb.k);
    std::size_t nbits = cb.n * cb.m * w;
    if (pos + (nbits + 7) / 8 > bytes.size()) throw CorruptSketch("PQ code array truncated");
    cb.codes.resize(cb.n * cb.m);
    std::size_t bit = 0;
    for (auto& c : cb.codes) {
        c = 0;
        for (unsigned i = 0; i < w; ++i, ++bit)
            if ((bytes[pos + bit / 8] >> (bit % 8)) & 1) c |= 1u << i;
        if (c >= cb.k) throw CorruptSketch("PQ code out of range");
    }
    return cb;
}

PQCodebook pq_fit(const PointSet& ps, std::size_t m, std::size_t k,
                  std::uint64_t seed, std::size_t maxIters) {
    ps.validate();
    if (m == 0 || ps.d % m != 0)
        throw BlockMismatch("pq_fit: block count must divide dimension");
    if (k < 1) throw InvalidParams("pq_fit: k must be >= 1");
    std::size_t db = ps.d / m;
    PQCodebook cb;
    cb.n = ps.n;
    cb.d = ps.d;
    cb.m = m;
    cb.k = std::min(k, ps.n);
    cb.centroids.resize(m * cb.k * db);
    cb.codes.resize(ps.n * m);
    Rng master(seed);
    for (std::size_t b = 0; b < m; ++b) {
        std::vector<double> sub(ps.n * db);
        for (std::size_t i = 0; i < ps.n; ++i)
            for (std::size_t j = 0; j < db; ++j)
                sub[i * db + j] = ps.at(i, b * db + j);
        KMeansResult km = kmeans(sub, ps.n, db, cb.k, master.fork(b).next_u64(), maxIters);
        std::copy(km.centroids.begin(), km.centroids.end(),
                  cb.centroids.begin() + b * cb.k * db);
        for (std::size_t i = 0; i < ps.n; ++i) cb.codes[i * m + b] = km.assign[i];
    }
    return cb;
}

PointSet pq_decode(const PQCodebook& cb) {
    PointSet out(cb.n, cb.d);
    std::size_t db = cb.block_dim();
    for (std::size_t i = 0; i < cb.n; ++i)
        for (std::size_t b = 0; b < cb.m; ++b) {
            const double* c = cb.centroid(b, cb.codes[i * cb.m + b]);
            for (std::size_t j = 0; j < db; ++j) out.at(i, b * db + j) = c[j];
        }
    return out;
}

}  // namespace qsk
