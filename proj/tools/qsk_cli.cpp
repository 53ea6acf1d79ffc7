// qsk: QuadSketch compression, baselines, and evaluation harness.
//
// Exit codes: 0 success, 2 usage error, 3 data/corruption error, 4 internal.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qsk/baselines.hpp"
#include "qsk/data.hpp"
#include "qsk/eval.hpp"
#include "qsk/sketch.hpp"

namespace {

using namespace qsk;

PointSet load_dataset(const std::string& path, const std::string& format) {
    if (format == "fvecs") return read_fvecs(path);
    if (format == "idx") return read_idx(path, /*normalize=*/true);
    if (format == "csv") return read_csv(path);
    if (format == "cache") return read_cache(path);
    throw ParseError("unknown dataset format: " + format);
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ParseError("write failed: " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoull(tok));
    return out;
}

std::vector<std::size_t> divisors(std::size_t d) {
    std::vector<std::size_t> out;
    for (std::size_t m = 1; m <= d; ++m)
        if (d % m == 0) out.push_back(m);
    return out;
}

struct CommonOpts {
    std::string dataset;
    std::string format = "fvecs";
    std::uint64_t seed = 0;
};

int cmd_compress(const CommonOpts& common, const std::string& method,
                 std::size_t blocks, int L, int lambda, std::size_t k,
                 const std::string& out) {
    PointSet ps = load_dataset(common.dataset, common.format);
    std::printf("config: compress method=%s dataset=%s format=%s n=%zu d=%zu "
                "blocks=%zu L=%d lambda=%d k=%zu seed=%llu out=%s\n",
                method.c_str(), common.dataset.c_str(), common.format.c_str(), ps.n,
                ps.d, blocks, L, lambda, k,
                static_cast<unsigned long long>(common.seed), out.c_str());
    auto t0 = std::chrono::steady_clock::now();
    double coordCount = static_cast<double>(ps.n) * ps.d;
    if (method == "qs") {
        SketchParams sp;
        sp.L = L;
        sp.lambda = lambda;
        sp.m = blocks;
        sp.seed = common.seed;
        BlockSketch bsk = compress_blocks(ps, sp);
        write_bytes(out, bsk.serialize());
        std::printf("bits/coordinate: %.4f (payload), %.4f (with headers)\n",
                    bsk.payload_bits() / coordCount, bsk.total_bits() / coordCount);
    } else if (method == "pq") {
        PQCodebook cb = pq_fit(ps, blocks, k, common.seed);
        write_bytes(out, cb.serialize());
        std::printf("bits/coordinate: %.4f (codes), %.4f (with codebook)\n",
                    cb.code_bits() / coordCount,
                    (cb.code_bits() + cb.codebook_bits()) / coordCount);
    } else if (method == "grid") {
        auto [gq, quantized] = grid_fit_quantize(ps, k);
        write_cache(out, quantized);
        std::printf("bits/coordinate: %.4f (codes), %.4f (with header)\n",
                    gq.code_bits(ps.n, ps.d) / coordCount,
                    (gq.code_bits(ps.n, ps.d) + gq.header_bits(ps.d)) / coordCount);
    } else {
        std::fprintf(stderr, "unknown method: %s\n", method.c_str());
        return 2;
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("elapsed: %.3f s\n", secs);
    return 0;
}

int cmd_decompress(const std::string& input, const std::string& out) {
    auto bytes = read_bytes(input);
    BlockSketch bsk = BlockSketch::deserialize(bytes);
    PointSet ps = decompress_blocks(bsk);
    write_fvecs(out, ps);
    std::printf("decompressed %llu points, d=%u -> %s\n",
                static_cast<unsigned long long>(bsk.n), bsk.d, out.c_str());
    return 0;
}

int cmd_info(const std::string& input) {
    auto bytes = read_bytes(input);
    BlockSketch bsk = BlockSketch::deserialize(bytes);
    std::printf("block sketch: n=%llu d=%u blocks=%zu file=%zu bytes\n",
                static_cast<unsigned long long>(bsk.n), bsk.d, bsk.m(), bytes.size());
    std::size_t totalBits = 0;
    for (std::size_t b = 0; b < bsk.m(); ++b) {
        const auto& sk = bsk.blocks[b];
        DecodedSketch dec = decode(sk);
        std::printf(
            "  block %zu: L=%u lambda=%u rootLevel=%d nodes=%zu leaves=%llu "
            "long_edges=%zu tree_bits=%llu leaf_id_bits=%llu header_bits=%zu\n",
            b, sk.L, sk.lambda, sk.rootLevel, dec.tree.nodes.size(),
            static_cast<unsigned long long>(sk.leafCount),
            dec.tree.long_edge_count(),
            static_cast<unsigned long long>(sk.treeBitCount),
            static_cast<unsigned long long>(sk.n * sk.leaf_id_width()),
            sk.header_bits());
        totalBits += sk.total_bits();
    }
    double coordCount = static_cast<double>(bsk.n) * bsk.d;
    std::printf("bits/coordinate: %.4f (payload), %.4f (total)\n",
                bsk.payload_bits() / coordCount, totalBits / coordCount);
    return 0;
}

int cmd_gen_diagonal(std::size_t n, std::size_t d, double hi, std::uint64_t seed,
                     const std::string& out) {
    PointSet ps = gen_diagonal(n, d, hi, seed);
    write_fvecs(out, ps);
    std::printf("wrote diagonal dataset: n=%zu d=%zu hi=%g seed=%llu -> %s\n", n, d,
                hi, static_cast<unsigned long long>(seed), out.c_str());
    return 0;
}

int run_sweep(const CommonOpts& common, const std::string& method,
              std::size_t queries, const std::string& blocksList,
              const std::string& lList, const std::string& lambdaList,
              const std::string& kList, std::size_t seeds, const std::string& outCsv,
              const std::string& journal, bool envelopeOnly, bool single,
              std::size_t blocks, int L, int lambda, std::size_t k) {
    PointSet full = load_dataset(common.dataset, common.format);
    auto [q, base] = sample_queries(full, queries, common.seed ^ 0x9e3779b9ULL);

    std::vector<MethodParams> grid;
    Method m = method == "qs" ? Method::QS : method == "pq" ? Method::PQ : Method::Grid;
    if (single) {
        MethodParams p;
        p.method = m;
        p.blocks = blocks;
        p.L = L;
        p.lambda = lambda;
        p.k = k;
        p.seed = common.seed;
        grid.push_back(p);
    } else {
        auto blockChoices = blocksList.empty() ? divisors(full.d) : parse_list(blocksList);
        auto kChoices = kList.empty()
                            ? std::vector<std::size_t>{32, 64, 128, 256, 512, 1024, 2048, 4096}
                            : parse_list(kList);
        std::vector<std::size_t> lChoices, lambdaChoices;
        if (lList.empty()) {
            for (std::size_t v = 2; v <= 20; ++v) lChoices.push_back(v);
        } else {
            lChoices = parse_list(lList);
        }
        if (!lambdaList.empty()) lambdaChoices = parse_list(lambdaList);
        for (std::size_t s = 0; s < seeds; ++s) {
            std::uint64_t seed = Rng(common.seed).fork(s).next_u64();
            if (m == Method::QS) {
                for (std::size_t b : blockChoices)
                    for (std::size_t lv : lChoices) {
                        auto lams = lambdaChoices;
                        if (lams.empty())
                            for (std::size_t lam = 1; lam + 1 <= lv; ++lam)
                                lams.push_back(lam);
                        for (std::size_t lam : lams) {
                            if (lam >= lv) continue;
                            MethodParams p;
                            p.method = m;
                            p.blocks = b;
                            p.L = static_cast<int>(lv);
                            p.lambda = static_cast<int>(lam);
                            p.seed = seed;
                            grid.push_back(p);
                        }
                    }
            } else if (m == Method::PQ) {
                for (std::size_t b : blockChoices)
                    for (std::size_t kk : kChoices) {
                        MethodParams p;
                        p.method = m;
                        p.blocks = b;
                        p.k = kk;
                        p.seed = seed;
                        grid.push_back(p);
                    }
            } else {
                for (std::size_t kk : kChoices) {
                    MethodParams p;
                    p.method = m;
                    p.k = kk;
                    p.seed = seed;
                    grid.push_back(p);
                }
            }
        }
    }

    std::printf("config: %s method=%s dataset=%s n=%zu d=%zu queries=%zu grid=%zu "
                "seeds=%zu seed=%llu journal=%s\n",
                single ? "eval" : "sweep", method.c_str(), common.dataset.c_str(),
                base.n, base.d, q.n, grid.size(), seeds,
                static_cast<unsigned long long>(common.seed), journal.c_str());

    auto records = sweep(base, q, grid, journal);
    std::vector<EvalRecord> output =
        envelopeOnly ? pareto_envelope(records) : records;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!outCsv.empty()) {
        file.open(outCsv);
        if (!file) throw ParseError("cannot open output file: " + outCsv);
        os = &file;
    }
    *os << EvalRecord::csv_header() << "\n";
    for (const auto& rec : output) *os << rec.csv_row() << "\n";
    if (!outCsv.empty())
        std::printf("wrote %zu records to %s\n", output.size(), outCsv.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QuadSketch metric compression and evaluation"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string method = "qs", out, journal, blocksList, lList, lambdaList, kList;
    std::size_t blocks = 1, k = 256, queries = 500, seeds = 1, genN = 10000, genD = 128;
    int L = 8, lambda = 4;
    double eps = 0.0, delta = 0.1, genHi = 40000.0;
    bool envelopeOnly = false;

    auto addCommon = [&](CLI::App* sub) {
        sub->add_option("--dataset", common.dataset, "input dataset path")->required();
        sub->add_option("--format", common.format, "fvecs|idx|csv|cache");
        sub->add_option("--seed", common.seed, "master RNG seed");
    };

    auto* cComp = app.add_subcommand("compress", "compress a dataset to a sketch file");
    addCommon(cComp);
    cComp->add_option("--method", method, "qs|pq|grid");
    cComp->add_option("--blocks", blocks, "coordinate blocks (qs/pq)");
    cComp->add_option("-L,--levels", L, "quadtree levels (qs)");
    cComp->add_option("--lambda", lambda, "pruning parameter (qs)");
    cComp->add_option("-k", k, "landmarks per block (pq) / per dim (grid)");
    cComp->add_option("--eps", eps, "derive L and lambda from eps (qs)");
    cComp->add_option("--delta", delta, "failure probability used with --eps");
    cComp->add_option("--out", out, "output file")->required();

    auto* cDec = app.add_subcommand("decompress", "decompress a sketch file to fvecs");
    std::string input;
    cDec->add_option("--input", input, "sketch file")->required();
    cDec->add_option("--out", out, "output fvecs path")->required();

    auto* cInfo = app.add_subcommand("info", "print sketch header and tree stats");
    cInfo->add_option("--input", input, "sketch file")->required();

    auto* cGen = app.add_subcommand("gen-diagonal", "generate the Diagonal dataset");
    cGen->add_option("-n", genN, "point count");
    cGen->add_option("-d", genD, "dimension");
    cGen->add_option("--hi", genHi, "coordinate range upper bound");
    cGen->add_option("--seed", common.seed, "RNG seed");
    cGen->add_option("--out", out, "output fvecs path")->required();

    auto* cEval = app.add_subcommand("eval", "evaluate one parameter combination");
    addCommon(cEval);
    cEval->add_option("--method", method, "qs|pq|grid");
    cEval->add_option("--blocks", blocks);
    cEval->add_option("-L,--levels", L);
    cEval->add_option("--lambda", lambda);
    cEval->add_option("-k", k);
    cEval->add_option("--queries", queries, "query sample size");
    cEval->add_option("--out", out, "output CSV (default stdout)");
    cEval->add_option("--journal", journal, "JSONL journal for resume");

    auto* cSweep = app.add_subcommand("sweep", "parameter sweep with journal/resume");
    addCommon(cSweep);
    cSweep->add_option("--method", method, "qs|pq|grid");
    cSweep->add_option("--blocks-list", blocksList, "comma list; default all divisors of d");
    cSweep->add_option("--L-list", lList, "comma list; default 2..20");
    cSweep->add_option("--lambda-list", lambdaList, "comma list; default 1..L-1");
    cSweep->add_option("--k-list", kList, "comma list; default 32..4096 powers of two");
    cSweep->add_option("--seeds", seeds, "seeds per combination");
    cSweep->add_option("--queries", queries, "query sample size");
    cSweep->add_option("--out", out, "output CSV (default stdout)");
    cSweep->add_option("--journal", journal, "JSONL journal for resume");
    cSweep->add_flag("--envelope-only", envelopeOnly, "emit only the Pareto envelope");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cComp->parsed()) {
            if (method == "qs" && eps > 0.0) {
                PointSet ps = load_dataset(common.dataset, common.format);
                double phi = aspect_ratio(ps);
                SketchParams sp = derive_params(eps, delta, ps.d / blocks, phi);
                L = sp.L;
                lambda = sp.lambda;
                std::printf("derived params from eps=%g delta=%g phi=%.4g: L=%d lambda=%d\n",
                            eps, delta, phi, L, lambda);
            }
            return cmd_compress(common, method, blocks, L, lambda, k, out);
        }
        if (cDec->parsed()) return cmd_decompress(input, out);
        if (cInfo->parsed()) return cmd_info(input);
        if (cGen->parsed()) return cmd_gen_diagonal(genN, genD, genHi, common.seed, out);
        if (cEval->parsed())
            return run_sweep(common, method, queries, "", "", "", "", 1, out, journal,
                             false, /*single=*/true, blocks, L, lambda, k);
        if (cSweep->parsed())
            return run_sweep(common, method, queries, blocksList, lList, lambdaList,
                             kList, seeds, out, journal, envelopeOnly,
                             /*single=*/false, blocks, L, lambda, k);
    } catch (const CorruptSketch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const VersionMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const MalformedRecord& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const BadMagic& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const DimensionMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const BlockMismatch& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const InvalidParams& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 2;
}
