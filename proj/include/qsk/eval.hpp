#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsk/core.hpp"

namespace qsk {

enum class Method { QS, PQ, Grid };

std::string method_name(Method m);

struct MethodParams {
    Method method = Method::QS;
    std::size_t blocks = 1;    // QS / PQ
    int L = 8;                 // QS
    int lambda = 4;            // QS
    std::size_t k = 256;       // PQ / Grid
    std::uint64_t seed = 0;
    std::size_t kmeansIters = 25;

    std::string key() const;  // journal identity
};

/// One sweep point. bitsPerCoordinate excludes fixed headers and (for
/// PQ) the codebook; the codebook accounting is reported separately.
struct EvalRecord {
    MethodParams params;
    double bitsPerCoordinate = 0.0;
    double auxBitsPerCoordinate = 0.0;  // codebook / header overhead
    double accuracy = 0.0;              // fraction of true NNs recovered
    double avgDistortion = 1.0;         // >= 1
    double wallTimeSec = 0.0;

    std::string csv_row() const;
    std::string json_line() const;
    static std::string csv_header();
    static std::optional<EvalRecord> from_json_line(const std::string& line);
};

/// Exact brute-force nearest neighbor of each query within base,
/// Euclidean, ties to the lowest index.
std::vector<std::uint32_t> true_nn(const PointSet& queries, const PointSet& base);

/// Compress base and queries jointly, find each query's NN in the
/// decompressed space, and score accuracy / average distortion against
/// true_nn using original coordinates.
EvalRecord evaluate(const PointSet& base, const PointSet& queries,
                    const MethodParams& params);

/// Evaluate every parameter combination. Finished records are appended
/// to the journal (JSON lines) as they complete, and combinations
/// already present in the journal are skipped, so an interrupted sweep
/// resumes without recomputation. threads = 0 means use QSK_THREADS or
/// the hardware default.
std::vector<EvalRecord> sweep(const PointSet& base, const PointSet& queries,
                              const std::vector<MethodParams>& grid,
                              const std::string& journalPath = "",
                              std::size_t threads = 0);

/// Records not dominated in (bits down, accuracy up); sorted by size.
/// With byDistortion set, domination is (bits down, distortion down).
std::vector<EvalRecord> pareto_envelope(const std::vector<EvalRecord>& records,
                                        bool byDistortion = false);

}  // namespace qsk
