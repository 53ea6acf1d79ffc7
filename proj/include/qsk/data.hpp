#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsk/core.hpp"

namespace qsk {

/// fvecs: each record is a u32 little-endian dimension followed by that
/// many f32 values; every record must share the same dimension.
PointSet read_fvecs(const std::string& path);
void write_fvecs(const std::string& path, const PointSet& ps);

/// IDX image file (MNIST): magic 0x00000803, images flattened to d =
/// rows*cols. With normalize set, each vector is scaled to unit
/// Euclidean norm; all-zero images are dropped with a warning.
PointSet read_idx(const std::string& path, bool normalize);

/// CSV with a header row; one point per row over the selected columns
/// (empty selection = all numeric columns of the header).
PointSet read_csv(const std::string& path,
                  const std::vector<std::string>& columns = {});

/// Native binary cache: magic "QSPC" | n u64 | d u32 | n*d f64.
PointSet read_cache(const std::string& path);
void write_cache(const std::string& path, const PointSet& ps);

/// n copies of (x, x, ..., x) with x uniform in [0, hi].
PointSet gen_diagonal(std::size_t n = 10000, std::size_t d = 128,
                      double hi = 40000.0, std::uint64_t seed = 0);

/// Uniform sample without replacement: (queries, rest), deterministic
/// under seed. Point order within each part follows the original order.
std::pair<PointSet, PointSet> sample_queries(const PointSet& ps,
                                             std::size_t count,
                                             std::uint64_t seed);

}  // namespace qsk
