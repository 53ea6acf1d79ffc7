#include "qsk/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qsk {

PointSet::PointSet(std::size_t n_, std::size_t d_)
    : n(n_), d(d_), coords(n_ * d_, 0.0) {}

PointSet::PointSet(std::size_t n_, std::size_t d_, std::vector<double> coords_)
    : n(n_), d(d_), coords(std::move(coords_)) {
    validate();
}

void PointSet::validate() const {
    if (n < 1 || d < 1)
        throw InvalidParams("PointSet requires n >= 1 and d >= 1");
    if (coords.size() != n * d)
        throw InvalidParams("PointSet coords size does not match n*d");
    for (double v : coords)
        if (!std::isfinite(v))
            throw InvalidParams("PointSet contains non-finite coordinate");
}

double euclidean(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double diff = a[j] - b[j];
        s += diff * diff;
    }
    return std::sqrt(s);
}

double euclidean(const PointSet& ps, std::size_t i, std::size_t j) {
    return euclidean(ps.row(i), ps.row(j), ps.d);
}

bool ShiftedHypercube::contains(const PointSet& ps) const {
    for (std::size_t i = 0; i < ps.n; ++i)
        for (std::size_t j = 0; j < ps.d; ++j) {
            double y = ps.at(i, j);
            if (y < origin[j] || y > origin[j] + side) return false;
        }
    return true;
}

double aspect_ratio(const PointSet& ps, std::size_t exactCap,
                    std::uint64_t sampleSeed) {
    if (ps.n < 2) throw TooFewPoints("aspect_ratio requires n >= 2");
    double maxD = 0.0, minD = std::numeric_limits<double>::infinity();
    if (ps.n <= exactCap) {
        for (std::size_t i = 0; i < ps.n; ++i)
            for (std::size_t j = i + 1; j < ps.n; ++j) {
                double dist = euclidean(ps, i, j);
                maxD = std::max(maxD, dist);
                minD = std::min(minD, dist);
            }
    } else {
        // Sampled estimate; reported as a lower bound on the true ratio.
        Rng rng(sampleSeed);
        std::size_t pairs = 64 * ps.n;
        for (std::size_t t = 0; t < pairs; ++t) {
            std::size_t i = rng.next_below(ps.n);
            std::size_t j = rng.next_below(ps.n);
            if (i == j) continue;
            double dist = euclidean(ps, i, j);
            if (dist == 0.0) continue;  // sampled duplicate, skip
            maxD = std::max(maxD, dist);
            minD = std::min(minD, dist);
        }
    }
    if (minD == 0.0) throw DuplicatePoints("aspect_ratio: duplicate points (min distance 0)");
    return maxD / minD;
}

SketchParams derive_params(double eps, double delta, std::size_t d, double phi) {
    if (!(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta <= 1.0) || !(phi > 1.0))
        throw InvalidParams("derive_params: need eps, delta in (0,1] and Phi>1");
    double logPhi = std::log2(phi);
    double arg = 16.0 * std::pow(static_cast<double>(d), 1.5) * logPhi / (eps * delta);
    int lambda = static_cast<int>(std::ceil(std::log2(arg)));
    lambda = std::max(lambda, 1);
    int L = static_cast<int>(std::ceil(logPhi)) + lambda;
    L = std::max(L, 1);
    SketchParams p;
    p.L = L;
    p.lambda = lambda;
    p.eps = eps;
    p.delta = delta;
    return p;
}

namespace {

// Smallest power of two >= v, as an exponent. exp2(result) >= v, exact.
int ceil_log2(double v) {
    int e = 0;
    double f = std::frexp(v, &e);  // v = f * 2^e, f in [0.5, 1)
    return f == 0.5 ? e - 1 : e;
}

ShiftedHypercube make_cube(const PointSet& ps, double delta, std::uint64_t seed) {
    int deltaExp = ceil_log2(delta);
    double deltaPow = std::exp2(deltaExp);
    ShiftedHypercube cube;
    cube.rootLevel = deltaExp + 2;
    cube.side = std::exp2(cube.rootLevel);
    cube.origin.resize(ps.d);
    cube.shift.resize(ps.d);
    Rng rng(seed);
    for (std::size_t j = 0; j < ps.d; ++j) {
        cube.shift[j] = rng.next_double(-deltaPow, deltaPow);
        cube.origin[j] = ps.at(0, j) - 2.0 * deltaPow + cube.shift[j];
    }
    if (!cube.contains(ps))
        throw InvalidParams("enclosing_cube: containment postcondition failed");
    return cube;
}

}  // namespace

ShiftedHypercube enclosing_cube(const PointSet& ps, std::uint64_t seed) {
    if (ps.n < 1) throw TooFewPoints("enclosing_cube: empty point set");
    double diam = 0.0;
    for (std::size_t i = 1; i < ps.n; ++i)
        diam = std::max(diam, euclidean(ps, 0, i));
    if (diam == 0.0)
        throw DegeneratePointSet("enclosing_cube: all points identical");
    return make_cube(ps, diam, seed);
}

ShiftedHypercube enclosing_cube_with_delta(const PointSet& ps, double delta,
                                           std::uint64_t seed) {
    if (!(delta > 0.0)) throw InvalidParams("enclosing_cube_with_delta: delta must be > 0");
    return make_cube(ps, delta, seed);
}

double rho(int level, std::size_t d, double eps, int lambda) {
    if (!(eps > 0.0)) throw InvalidParams("rho: eps must be > 0");
    return 8.0 / eps * std::exp2(level - lambda) * std::sqrt(static_cast<double>(d));
}

}  // namespace qsk
