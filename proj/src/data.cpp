#include "qsk/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qsk {

namespace {

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    return in;
}

std::uint32_t read_u32_be(std::istream& in) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw MalformedRecord("unexpected end of IDX file");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

PointSet read_fvecs(const std::string& path) {
    auto in = open_binary(path);
    std::vector<double> coords;
    std::size_t d = 0, n = 0, offset = 0;
    while (true) {
        std::uint32_t dim;
        in.read(reinterpret_cast<char*>(&dim), 4);
        if (in.gcount() == 0) break;
        if (in.gcount() != 4)
            throw MalformedRecord("fvecs: truncated dimension field at byte " +
                                  std::to_string(offset));
        if (dim == 0 || dim > (1u << 24))
            throw MalformedRecord("fvecs: implausible dimension " + std::to_string(dim) +
                                  " at byte " + std::to_string(offset));
        if (n == 0) d = dim;
        else if (dim != d)
            throw DimensionMismatch("fvecs: record " + std::to_string(n) + " has d=" +
                                    std::to_string(dim) + ", expected " + std::to_string(d));
        std::vector<float> buf(dim);
        in.read(reinterpret_cast<char*>(buf.data()), 4 * dim);
        if (in.gcount() != static_cast<std::streamsize>(4 * dim))
            throw MalformedRecord("fvecs: truncated record at byte " + std::to_string(offset + 4));
        for (float v : buf) coords.push_back(static_cast<double>(v));
        ++n;
        offset += 4 + 4 * static_cast<std::size_t>(dim);
    }
    if (n == 0) throw MalformedRecord("fvecs: file contains no records");
    return PointSet(n, d, std::move(coords));
}

void write_fvecs(const std::string& path, const PointSet& ps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    std::uint32_t dim = static_cast<std::uint32_t>(ps.d);
    for (std::size_t i = 0; i < ps.n; ++i) {
        out.write(reinterpret_cast<const char*>(&dim), 4);
        for (std::size_t j = 0; j < ps.d; ++j) {
            float v = static_cast<float>(ps.at(i, j));
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
    }
    if (!out) throw ParseError("write failed: " + path);
}

PointSet read_idx(const std::string& path, bool normalize) {
    auto in = open_binary(path);
    std::uint32_t magic = read_u32_be(in);
    if (magic != 0x00000803u)
        throw BadMagic("IDX: expected image magic 0x00000803, got " + std::to_string(magic));
    std::uint32_t count = read_u32_be(in);
    std::uint32_t rows = read_u32_be(in);
    std::uint32_t cols = read_u32_be(in);
    std::size_t d = static_cast<std::size_t>(rows) * cols;
    if (count == 0 || d == 0) throw MalformedRecord("IDX: empty image file");
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(count) * d);
    std::vector<std::uint8_t> img(d);
    std::size_t kept = 0, dropped = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(d));
        if (in.gcount() != static_cast<std::streamsize>(d))
            throw MalformedRecord("IDX: truncated image " + std::to_string(i));
        double norm2 = 0.0;
        for (std::uint8_t v : img) norm2 += static_cast<double>(v) * v;
        if (normalize && norm2 == 0.0) {
            ++dropped;
            continue;
        }
        double scale = normalize ? 1.0 / std::sqrt(norm2) : 1.0;
        for (std::uint8_t v : img) coords.push_back(scale * v);
        ++kept;
    }
    if (dropped > 0)
        std::cerr << "read_idx: dropped " << dropped << " all-zero image(s) under normalization\n";
    if (kept == 0) throw NormZero("IDX: no nonzero images to normalize");
    return PointSet(kept, d, std::move(coords));
}

PointSet read_csv(const std::string& path, const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    // header
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::vector<std::size_t> selected;
    if (columns.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) selected.push_back(j);
    } else {
        for (const auto& name : columns) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end())
                throw ParseError(path + ": column not found: " + name);
            selected.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }
    std::vector<double> coords;
    std::size_t n = 0, lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        for (std::size_t j : selected) {
            if (j >= cells.size())
                throw ParseError(path + ":" + std::to_string(lineNo) + ": too few columns");
            try {
                std::size_t used = 0;
                double v = std::stod(cells[j], &used);
                if (used != cells[j].size()) throw std::invalid_argument("trailing junk");
                coords.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineNo) +
                                 ": non-numeric cell '" + cells[j] + "'");
            }
        }
        ++n;
    }
    if (n == 0) throw ParseError(path + ": no data rows");
    return PointSet(n, selected.size(), std::move(coords));
}

PointSet read_cache(const std::string& path) {
    auto in = open_binary(path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "QSPC", 4) != 0)
        throw BadMagic("cache: bad magic in " + path);
    std::uint64_t n;
    std::uint32_t d;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in) throw MalformedRecord("cache: truncated header");
    std::vector<double> coords(n * d);
    in.read(reinterpret_cast<char*>(coords.data()),
            static_cast<std::streamsize>(coords.size() * 8));
    if (in.gcount() != static_cast<std::streamsize>(coords.size() * 8))
        throw MalformedRecord("cache: truncated matrix");
    return PointSet(n, d, std::move(coords));
}

void write_cache(const std::string& path, const PointSet& ps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out.write("QSPC", 4);
    std::uint64_t n = ps.n;
    std::uint32_t d = static_cast<std::uint32_t>(ps.d);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(ps.coords.data()),
              static_cast<std::streamsize>(ps.coords.size() * 8));
    if (!out) throw ParseError("write failed: " + path);
}

PointSet gen_diagonal(std::size_t n, std::size_t d, double hi, std::uint64_t seed) {
    if (n < 1 || d < 1) throw InvalidParams("gen_diagonal: n and d must be >= 1");
    PointSet ps(n, d);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.next_double(0.0, hi);
        for (std::size_t j = 0; j < d; ++j) ps.at(i, j) = x;
    }
    return ps;
}

std::pair<PointSet, PointSet> sample_queries(const PointSet& ps, std::size_t count,
                                             std::uint64_t seed) {
    if (count > ps.n) throw CountTooLarge("sample_queries: count exceeds n");
    // partial Fisher-Yates over index array, then restore original order
    std::vector<std::uint32_t> idx(ps.n);
    for (std::size_t i = 0; i < ps.n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + rng.next_below(ps.n - i);
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> isQuery(ps.n, false);
    for (std::size_t i = 0; i < count; ++i) isQuery[idx[i]] = true;
    PointSet queries(std::max<std::size_t>(count, 1), ps.d);
    PointSet rest(std::max<std::size_t>(ps.n - count, 1), ps.d);
    std::size_t qi = 0, ri = 0;
    for (std::size_t i = 0; i < ps.n; ++i) {
        auto& dst = isQuery[i] ? queries : rest;
        auto& pos = isQuery[i] ? qi : ri;
        std::copy(ps.row(i), ps.row(i) + ps.d, dst.coords.begin() + pos * ps.d);
        ++pos;
    }
    queries.n = count;
    queries.coords.resize(count * ps.d);
    rest.n = ps.n - count;
    rest.coords.resize(rest.n * ps.d);
    return {std::move(queries), std::move(rest)};
}

}  // namespace qsk
