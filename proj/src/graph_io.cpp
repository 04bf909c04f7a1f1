#include "streamspan/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "streamspan/errors.hpp"
#include "streamspan/prng.hpp"

namespace streamspan {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::uint64_t parse_u64(const std::string& tok, const char* what, std::uint64_t line_no) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(std::string("bad ") + what + " '" + tok + "'", line_no);
    return value;
}

double parse_weight(const std::string& tok, std::uint64_t line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("bad weight '" + tok + "'", line_no);
    if (!std::isfinite(value) || value < 0.0)
        throw ParseError("weight must be finite and nonnegative", line_no);
    return value;
}

std::string format_weight(double w) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
    if (ec != std::errc()) throw std::logic_error("weight formatting failed");
    return std::string(buf, ptr);
}

std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed ^ 0x6E65747730726BULL));
}

void assign_weights(EdgeStream& s, std::mt19937_64& rng,
                    const std::optional<WeightRange>& weights) {
    if (!weights) return;
    if (weights->lo < 0.0 || weights->lo > weights->hi)
        throw std::invalid_argument("weight range must satisfy 0 <= lo <= hi");
    s.weighted = true;
    for (auto& e : s.edges) e.w = uniform_real(rng, weights->lo, weights->hi);
}

void shuffle_edges(EdgeStream& s, std::mt19937_64& rng) {
    for (std::size_t i = s.edges.size(); i > 1; --i) {
        const std::size_t j = bounded_uniform(rng, i);
        std::swap(s.edges[i - 1], s.edges[j]);
    }
}

} // namespace

EdgeStream read_edge_stream(std::istream& in) {
    std::string line;
    std::uint64_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++line_no;
    const auto header = split_ws(line);
    if (header.size() != 3)
        throw ParseError("header must be 'n m weighted|unweighted'", line_no);

    EdgeStream s;
    const std::uint64_t n = parse_u64(header[0], "vertex count", line_no);
    if (n < 1) throw ParseError("vertex count must be positive", line_no);
    s.n = static_cast<VertexId>(n);
    const std::uint64_t m = parse_u64(header[1], "edge count", line_no);
    if (header[2] == "weighted") {
        s.weighted = true;
    } else if (header[2] == "unweighted") {
        s.weighted = false;
    } else {
        throw ParseError("mode must be 'weighted' or 'unweighted'", line_no);
    }

    s.edges.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        if (!std::getline(in, line))
            throw ParseError("expected " + std::to_string(m) + " edges, found " +
                                 std::to_string(i), line_no + 1);
        ++line_no;
        const auto tok = split_ws(line);
        const std::size_t expected = s.weighted ? 3 : 2;
        if (tok.size() != expected)
            throw ParseError("expected " + std::to_string(expected) + " fields", line_no);

        WeightedEdge e;
        const std::uint64_t u = parse_u64(tok[0], "endpoint", line_no);
        const std::uint64_t v = parse_u64(tok[1], "endpoint", line_no);
        if (u < 1 || u > n || v < 1 || v > n)
            throw ParseError("endpoint out of range 1.." + std::to_string(n), line_no);
        e.u = static_cast<VertexId>(u);
        e.v = static_cast<VertexId>(v);
        e.w = s.weighted ? parse_weight(tok[2], line_no) : 1.0;

        if (e.u == e.v) {
            ++s.self_loops_dropped;
            continue;
        }
        s.edges.push_back(e);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!split_ws(line).empty()) throw ParseError("unexpected content after edges", line_no);
    }
    return s;
}

EdgeStream read_edge_stream_file(const std::string& path) {
    if (path == "-") return read_edge_stream(std::cin);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_edge_stream(in);
}

void write_edge_stream(const EdgeStream& s, std::ostream& out) {
    out << s.n << ' ' << s.edges.size() << ' ' << (s.weighted ? "weighted" : "unweighted")
        << '\n';
    for (const auto& e : s.edges) {
        out << e.u << ' ' << e.v;
        if (s.weighted) out << ' ' << format_weight(e.w);
        out << '\n';
    }
}

void write_edge_stream_file(const EdgeStream& s, const std::string& path) {
    if (path == "-") {
        write_edge_stream(s, std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_edge_stream(s, out);
}

EdgeStream gen_gnp(VertexId n, double p, std::uint64_t seed,
                   std::optional<WeightRange> weights) {
    if (n < 1) throw std::invalid_argument("gnp needs at least one vertex");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gnp probability must be in [0,1]");

    EdgeStream s;
    s.n = n;
    auto rng = make_rng(seed);

    if (p >= 1.0) {
        for (VertexId u = 1; u <= n; ++u)
            for (VertexId v = u + 1; v <= n; ++v) s.edges.push_back({u, v, 1.0});
    } else if (p > 0.0) {
        // Geometric skips between successive present pairs; O(m) draws total.
        const double log_q = std::log1p(-p);
        std::uint64_t idx = 0; // linear index into the u<v pair sequence
        const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
        VertexId u = 1;
        std::uint64_t row_start = 0; // linear index of pair (u, u+1)
        for (;;) {
            const double unit = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
            const double skip = std::floor(std::log(unit) / log_q);
            if (skip >= static_cast<double>(total - idx)) break;
            idx += static_cast<std::uint64_t>(skip);
            if (idx >= total) break;
            while (idx - row_start >= static_cast<std::uint64_t>(n - u)) {
                row_start += n - u;
                ++u;
            }
            const VertexId v = static_cast<VertexId>(u + 1 + (idx - row_start));
            s.edges.push_back({u, v, 1.0});
            ++idx;
        }
    }

    assign_weights(s, rng, weights);
    shuffle_edges(s, rng);
    return s;
}

EdgeStream gen_complete(VertexId n, std::uint64_t seed, std::optional<WeightRange> weights) {
    if (n < 1) throw std::invalid_argument("complete graph needs at least one vertex");
    EdgeStream s;
    s.n = n;
    s.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (VertexId u = 1; u <= n; ++u)
        for (VertexId v = u + 1; v <= n; ++v) s.edges.push_back({u, v, 1.0});
    auto rng = make_rng(seed);
    assign_weights(s, rng, weights);
    shuffle_edges(s, rng);
    return s;
}

EdgeStream gen_grid(VertexId rows, VertexId cols, std::uint64_t seed,
                    std::optional<WeightRange> weights) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid needs positive dimensions");
    EdgeStream s;
    s.n = rows * cols;
    auto id = [cols](VertexId r, VertexId c) { return r * cols + c + 1; };
    for (VertexId r = 0; r < rows; ++r) {
        for (VertexId c = 0; c < cols; ++c) {
            if (c + 1 < cols) s.edges.push_back({id(r, c), id(r, c + 1), 1.0});
            if (r + 1 < rows) s.edges.push_back({id(r, c), id(r + 1, c), 1.0});
        }
    }
    auto rng = make_rng(seed);
    assign_weights(s, rng, weights);
    return s;
}

EdgeStream sort_by_weight(EdgeStream s) {
    std::stable_sort(s.edges.begin(), s.edges.end(),
                     [](const WeightedEdge& a, const WeightedEdge& b) { return a.w < b.w; });
    return s;
}

} // namespace streamspan
