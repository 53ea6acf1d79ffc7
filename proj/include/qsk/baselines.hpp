#pragma once

#include <cstdint>
#include <vector>

#include "qsk/core.hpp"

namespace qsk {

/// Uniform scalar quantization: k equally spaced landmarks per dimension
/// between the observed min and max; coordinates round to the nearest
/// landmark (midpoint ties round up).
struct GridQuantizer {
    std::size_t k = 2;
    std::vector<double> minv;  // per dimension
    std::vector<double> maxv;

    double quantize_value(double v, std::size_t dim) const;

    // storage accounting in bits
    std::size_t code_bits(std::size_t n, std::size_t d) const;
    std::size_t header_bits(std::size_t d) const { return 2 * d * 64; }
};

std::pair<GridQuantizer, PointSet> grid_fit_quantize(const PointSet& ps,
                                                     std::size_t k);

/// Lloyd's algorithm with k-means++ seeding. Ties break to the lowest
/// centroid index; empty clusters are re-seeded from the farthest point.
struct KMeansResult {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;        // k * dim
    std::vector<std::uint32_t> assign;    // per input vector
    std::vector<double> objectiveTrace;   // sum of squared distances per iteration
};

KMeansResult kmeans(const std::vector<double>& vectors, std::size_t count,
                    std::size_t dim, std::size_t k, std::uint64_t seed,
                    std::size_t maxIters = 25);

/// Product quantization codebook: k centroids per contiguous block of
/// d/m coordinates, each point stored as m centroid indices.
struct PQCodebook {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t m = 1;
    std::size_t k = 2;
    std::vector<double> centroids;       // m * k * (d/m)
    std::vector<std::uint32_t> codes;    // n * m

    std::size_t block_dim() const { return d / m; }
    const double* centroid(std::size_t block, std::size_t idx) const {
        return centroids.data() + (block * k + idx) * block_dim();
    }

    std::size_t code_bits() const;      // packed index array
    std::size_t codebook_bits() const;  // centroid storage (f64)

    std::vector<std::uint8_t> serialize() const;
    static PQCodebook deserialize(const std::vector<std::uint8_t>& bytes);
};

PQCodebook pq_fit(const PointSet& ps, std::size_t m, std::size_t k,
                  std::uint64_t seed, std::size_t maxIters = 25);
PointSet pq_decode(const PQCodebook& cb);

}  // namespace qsk
