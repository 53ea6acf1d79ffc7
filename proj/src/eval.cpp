#include "qsk/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "qsk/baselines.hpp"
#include "qsk/sketch.hpp"

namespace qsk {

std::string method_name(Method m) {
    switch (m) {
        case Method::QS: return "qs";
        case Method::PQ: return "pq";
        case Method::Grid: return "grid";
    }
    return "?";
}

std::string MethodParams::key() const {
    return method_name(method) + ",m=" + std::to_string(blocks) +
           ",L=" + std::to_string(L) + ",lambda=" + std::to_string(lambda) +
           ",k=" + std::to_string(k) + ",seed=" + std::to_string(seed);
}

std::string EvalRecord::csv_header() {
    return "method,blocks,L,lambda,k,seed,bits_per_coord,aux_bits_per_coord,"
           "accuracy,avg_distortion,wall_time_sec";
}

std::string EvalRecord::csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%zu,%d,%d,%zu,%llu,%.6g,%.6g,%.6g,%.8g,%.4g",
                  method_name(params.method).c_str(), params.blocks, params.L,
                  params.lambda, params.k,
                  static_cast<unsigned long long>(params.seed), bitsPerCoordinate,
                  auxBitsPerCoordinate, accuracy, avgDistortion, wallTimeSec);
    return buf;
}

std::string EvalRecord::json_line() const {
    nlohmann::json j{{"method", method_name(params.method)},
                     {"blocks", params.blocks},
                     {"L", params.L},
                     {"lambda", params.lambda},
                     {"k", params.k},
                     {"seed", params.seed},
                     {"bits_per_coord", bitsPerCoordinate},
                     {"aux_bits_per_coord", auxBitsPerCoordinate},
                     {"accuracy", accuracy},
                     {"avg_distortion", avgDistortion},
                     {"wall_time_sec", wallTimeSec}};
    return j.dump();
}

std::optional<EvalRecord> EvalRecord::from_json_line(const std::string& line) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        EvalRecord r;
        std::string m = j.at("method");
        r.params.method = m == "qs" ? Method::QS : m == "pq" ? Method::PQ : Method::Grid;
        r.params.blocks = j.at("blocks");
        r.params.L = j.at("L");
        r.params.lambda = j.at("lambda");
        r.params.k = j.at("k");
        r.params.seed = j.at("seed");
        r.bitsPerCoordinate = j.at("bits_per_coord");
        r.auxBitsPerCoordinate = j.at("aux_bits_per_coord");
        r.accuracy = j.at("accuracy");
        r.avgDistortion = j.at("avg_distortion");
        r.wallTimeSec = j.at("wall_time_sec");
        return r;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

std::vector<std::uint32_t> true_nn(const PointSet& queries, const PointSet& base) {
    if (base.n == 0 || queries.n == 0)
        throw EmptyInput("true_nn: empty base or query set");
    std::vector<std::uint32_t> out(queries.n);
    for (std::size_t q = 0; q < queries.n; ++q) {
        std::uint32_t best = 0;
        double bestSq = std::numeric_limits<double>::infinity();
        const double* qp = queries.row(q);
        for (std::size_t i = 0; i < base.n; ++i) {
            double s = 0.0;
            const double* bp = base.row(i);
            for (std::size_t j = 0; j < base.d; ++j) {
                double diff = qp[j] - bp[j];
                s += diff * diff;
            }
            if (s < bestSq) {  // strict: ties stay at the lowest index
                bestSq = s;
                best = static_cast<std::uint32_t>(i);
            }
        }
        out[q] = best;
    }
    return out;
}

EvalRecord evaluate(const PointSet& base, const PointSet& queries,
                    const MethodParams& params) {
    if (base.d != queries.d) throw DimensionMismatch("evaluate: dimension mismatch");
    auto t0 = std::chrono::steady_clock::now();

    // joint quantization of base + queries
    PointSet joint(base.n + queries.n, base.d);
    std::copy(base.coords.begin(), base.coords.end(), joint.coords.begin());
    std::copy(queries.coords.begin(), queries.coords.end(),
              joint.coords.begin() + base.n * base.d);

    PointSet approx;
    EvalRecord rec;
    rec.params = params;
    double coordCount = static_cast<double>(joint.n) * joint.d;
    switch (params.method) {
        case Method::QS: {
            SketchParams sp;
            sp.L = params.L;
            sp.lambda = params.lambda;
            sp.m = params.blocks;
            sp.seed = params.seed;
            BlockSketch bsk = compress_blocks(joint, sp);
            approx = decompress_blocks(bsk);
            rec.bitsPerCoordinate = static_cast<double>(bsk.payload_bits()) / coordCount;
            rec.auxBitsPerCoordinate =
                static_cast<double>(bsk.total_bits() - bsk.payload_bits()) / coordCount;
            break;
        }
        case Method::PQ: {
            PQCodebook cb = pq_fit(joint, params.blocks, params.k, params.seed,
                                   params.kmeansIters);
            approx = pq_decode(cb);
            rec.bitsPerCoordinate = static_cast<double>(cb.code_bits()) / coordCount;
            rec.auxBitsPerCoordinate = static_cast<double>(cb.codebook_bits()) / coordCount;
            break;
        }
        case Method::Grid: {
            auto [gq, quantized] = grid_fit_quantize(joint, params.k);
            approx = std::move(quantized);
            rec.bitsPerCoordinate =
                static_cast<double>(gq.code_bits(joint.n, joint.d)) / coordCount;
            rec.auxBitsPerCoordinate = static_cast<double>(gq.header_bits(joint.d)) / coordCount;
            break;
        }
    }

    // NN of each decompressed query among decompressed base points
    PointSet approxBase(base.n, base.d,
                        {approx.coords.begin(), approx.coords.begin() + base.n * base.d});
    PointSet approxQueries(queries.n, base.d,
                           {approx.coords.begin() + base.n * base.d, approx.coords.end()});
    std::vector<std::uint32_t> reported = true_nn(approxQueries, approxBase);
    std::vector<std::uint32_t> truth = true_nn(queries, base);

    std::size_t hits = 0;
    double distortionSum = 0.0;
    for (std::size_t q = 0; q < queries.n; ++q) {
        if (reported[q] == truth[q]) {
            ++hits;
            distortionSum += 1.0;  // exact by definition of the metric
            continue;
        }
        double dTrue = euclidean(queries.row(q), base.row(truth[q]), base.d);
        double dRep = euclidean(queries.row(q), base.row(reported[q]), base.d);
        distortionSum += dTrue > 0.0 ? dRep / dTrue : 1.0;
    }
    rec.accuracy = static_cast<double>(hits) / static_cast<double>(queries.n);
    rec.avgDistortion = distortionSum / static_cast<double>(queries.n);
    rec.wallTimeSec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

namespace {

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QSK_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

std::vector<EvalRecord> sweep(const PointSet& base, const PointSet& queries,
                              const std::vector<MethodParams>& grid,
                              const std::string& journalPath, std::size_t threads) {
    if (grid.empty()) throw InvalidParams("sweep: empty parameter grid");

    std::vector<EvalRecord> results;
    std::set<std::string> doneKeys;
    if (!journalPath.empty()) {
        std::ifstream in(journalPath);
        std::string line;
        while (in && std::getline(in, line)) {
            auto rec = EvalRecord::from_json_line(line);
            if (rec) {
                doneKeys.insert(rec->params.key());
                results.push_back(*rec);
            }
        }
    }

    std::vector<MethodParams> todo;
    for (const auto& p : grid)
        if (!doneKeys.contains(p.key())) todo.push_back(p);

    std::mutex mu;
    std::ofstream journal;
    if (!journalPath.empty()) journal.open(journalPath, std::ios::app);

    std::atomic<std::size_t> next{0};
    std::size_t nThreads = std::min(resolve_threads(threads), std::max<std::size_t>(todo.size(), 1));
    std::vector<std::thread> pool;
    std::exception_ptr firstError;
    for (std::size_t t = 0; t < nThreads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= todo.size()) return;
                try {
                    EvalRecord rec = evaluate(base, queries, todo[i]);
                    std::lock_guard lock(mu);
                    results.push_back(rec);
                    if (journal.is_open()) journal << rec.json_line() << "\n" << std::flush;
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!firstError) firstError = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (firstError) std::rethrow_exception(firstError);
    return results;
}

std::vector<EvalRecord> pareto_envelope(const std::vector<EvalRecord>& records,
                                        bool byDistortion) {
    if (records.empty()) throw EmptyInput("pareto_envelope: no records");
    auto quality = [byDistortion](const EvalRecord& r) {
        return byDistortion ? -r.avgDistortion : r.accuracy;
    };
    std::vector<EvalRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](const EvalRecord& a, const EvalRecord& b) {
                         if (a.bitsPerCoordinate != b.bitsPerCoordinate)
                             return a.bitsPerCoordinate < b.bitsPerCoordinate;
                         return quality(a) > quality(b);
                     });
    // one pass over (bits asc, quality desc): a record survives only if it
    // strictly improves on everything smaller, which also collapses
    // equal-size ties to their best representative
    std::vector<EvalRecord> out;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : sorted) {
        if (quality(r) > best) {
            best = quality(r);
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace qsk
