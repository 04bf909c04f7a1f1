#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "streamspan/core_model.hpp"

namespace streamspan {

// Materialized edge stream: header data plus the edges in emission order.
// Replay = iterate `edges` again.
struct EdgeStream {
    VertexId n = 0;
    bool weighted = false;
    std::vector<WeightedEdge> edges;
    std::uint64_t self_loops_dropped = 0;
};

struct WeightRange {
    double lo = 1.0;
    double hi = 1.0;
};

// Text format: one header line "n m weighted|unweighted", then m lines
// "u v" or "u v w". Self-loop lines are counted and dropped, not errors.
// Malformed input raises ParseError with the 1-based line number.
EdgeStream read_edge_stream(std::istream& in);
EdgeStream read_edge_stream_file(const std::string& path); // "-" reads stdin

void write_edge_stream(const EdgeStream& s, std::ostream& out);
void write_edge_stream_file(const EdgeStream& s, const std::string& path); // "-" writes stdout

// Random graph generators. Deterministic in their arguments; emission order
// of gnp/complete is a seeded shuffle, grid emits row-major lattice edges.
EdgeStream gen_gnp(VertexId n, double p, std::uint64_t seed,
                   std::optional<WeightRange> weights = std::nullopt);
EdgeStream gen_complete(VertexId n, std::uint64_t seed,
                        std::optional<WeightRange> weights = std::nullopt);
EdgeStream gen_grid(VertexId rows, VertexId cols, std::uint64_t seed,
                    std::optional<WeightRange> weights = std::nullopt);

// Stable sort by nondecreasing weight; ties keep stream order.
EdgeStream sort_by_weight(EdgeStream s);

} // namespace streamspan
