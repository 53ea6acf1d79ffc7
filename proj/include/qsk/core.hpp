#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/rng.hpp"

namespace qsk {

/// n points in d dimensions, row-major doubles. Immutable after
/// construction; point indices are 0-based and stable.
struct PointSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> coords;  // n*d, row-major

    PointSet() = default;
    PointSet(std::size_t n_, std::size_t d_);
    PointSet(std::size_t n_, std::size_t d_, std::vector<double> coords_);

    double at(std::size_t i, std::size_t j) const { return coords[i * d + j]; }
    double& at(std::size_t i, std::size_t j) { return coords[i * d + j]; }
    const double* row(std::size_t i) const { return coords.data() + i * d; }

    void validate() const;  // throws InvalidParams on bad shape / non-finite
};

double euclidean(const double* a, const double* b, std::size_t d);
double euclidean(const PointSet& ps, std::size_t i, std::size_t j);

/// Axis-parallel enclosing cube H after the random shift.
struct ShiftedHypercube {
    std::vector<double> origin;  // bottom-left corner
    double side = 0.0;           // 4*Delta, exact power of two
    int rootLevel = 0;           // 2^rootLevel == side
    std::vector<double> shift;   // sigma_j in [-Delta, Delta]

    bool contains(const PointSet& ps) const;
};

struct SketchParams {
    int L = 1;            // levels before pruning
    int lambda = 1;       // pruning parameter
    std::size_t m = 1;    // block count, divides d
    std::uint64_t seed = 0;
    double eps = 0.0;     // 0 = unset
    double delta = 0.0;   // 0 = unset
};

/// Max pairwise distance over min pairwise distance. Exact O(n^2 d) for
/// n <= exactCap; above the cap a random-pair sample is used and the
/// result is a lower-bound style estimate.
double aspect_ratio(const PointSet& ps, std::size_t exactCap = 2048,
                    std::uint64_t sampleSeed = 1);

/// Lambda = ceil(log2(16 d^1.5 log2(Phi) / (eps*delta))), L = ceil(log2 Phi) + Lambda.
SketchParams derive_params(double eps, double delta, std::size_t d, double phi);

/// Cube centered at x_1 with side 4*Delta, Delta = 2^ceil(log2 Delta'),
/// shifted per coordinate by uniform sigma_j in [-Delta, Delta].
ShiftedHypercube enclosing_cube(const PointSet& ps, std::uint64_t seed);

/// Same construction with a caller-forced Delta; used for degenerate
/// point sets where Delta' = 0 (all points identical).
ShiftedHypercube enclosing_cube_with_delta(const PointSet& ps, double delta,
                                           std::uint64_t seed);

/// Padding radius rho(l) = 8 eps^-1 2^(l-Lambda) sqrt(d).
double rho(int level, std::size_t d, double eps, int lambda);

}  // namespace qsk
