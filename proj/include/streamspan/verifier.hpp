#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "streamspan/core_model.hpp"
#include "streamspan/incremental.hpp"
#include "streamspan/streamsort_spanner.hpp"

namespace streamspan::verify {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Exact-distance work is near quadratic, so refuse graphs beyond this size
// unless the caller raises the limit explicitly.
struct VerifyLimits {
    VertexId max_vertices = 3000;
};

class AdjacencyGraph {
public:
    AdjacencyGraph(VertexId n, const std::vector<WeightedEdge>& edges);

    VertexId vertex_count() const { return n_; }
    bool unit_weights() const { return unit_; }

    struct Arc {
        VertexId to = kNoVertex;
        Weight w = 1.0;
    };
    const Arc* begin(VertexId v) const { return arcs_.data() + offsets_[v]; }
    const Arc* end(VertexId v) const { return arcs_.data() + offsets_[v + 1]; }

private:
    VertexId n_ = 0;
    bool unit_ = true;
    std::vector<std::size_t> offsets_;
    std::vector<Arc> arcs_;
};

// Single-source shortest paths: breadth-first when every weight is one,
// Dijkstra otherwise. Unreached vertices report kUnreachable.
std::vector<double> exact_distances(const AdjacencyGraph& g, VertexId source);

struct StretchReport {
    bool ok = true;
    std::size_t edges_checked = 0;
    double max_ratio = 0.0; // worst d_S(u,v) / (stretch * w(u,v))
    WeightedEdge worst{};
    std::string detail; // first failure, empty when ok
};

// Bound d_S(u,v) <= stretch * w(u,v) for every input edge. That suffices
// for arbitrary pairs: any shortest path detours edge by edge, so the
// per-edge bound carries over to full paths. The 1e-9 relative slack only
// absorbs floating-point accumulation.
StretchReport check_stretch(VertexId n, const std::vector<WeightedEdge>& graph,
                            const std::vector<WeightedEdge>& spanner, double stretch,
                            const VerifyLimits& limits = {});

// Every vertex clustered at a level reaches that cluster's center within
// `level` hook edges.
std::string check_cluster_radius(const SpannerState& state);

// Clustering sweeps plus quiescent buffer balance, first violation wins.
std::string check_invariants(const SpannerState& state);

// Prune work never exceeds two scans per edge that entered a buffer.
std::string check_work_counters(const WorkCounters& c);

struct SizeWorkSample {
    std::size_t spanner_edges = 0;
    std::uint64_t hook_edges = 0;
    std::uint64_t prune_scans = 0;
    std::size_t stream_edges = 0;
};

struct SizeWorkReport {
    bool ok = true;
    double mean_size = 0.0;
    double size_bound = 0.0; // 4 (k n^{1+1/k} + k n)
    double mean_scans = 0.0;
    double scan_bound = 0.0; // 10 (mean m + k n)
    std::uint64_t hook_bound = 0;
    std::uint64_t max_hooks = 0;
    double min_scans_per_edge = 0.0;
    double max_scans_per_edge = 0.0;
    std::string detail;
};

// Aggregate independent runs of one configuration. Averages over fewer
// than ten runs say nothing, so that is rejected outright.
SizeWorkReport aggregate_size_work(const std::vector<SizeWorkSample>& samples, VertexId n,
                                   unsigned k);

// Pass accounting against the documented budget: at most kPassBound * k
// passes, transducer state within kDefaultStateBudget throughout.
std::string check_pass_budget(const streamsort::RunResult& r);

// Snapshot invariant: at the start of iteration i every live vertex owns a
// path to its center inside the spanner emitted so far, using fewer than i
// hops none of which outweighs any live edge at that vertex. Requires
// capture_snapshots.
std::string check_center_paths(const streamsort::RunResult& r);

// Every edge removed without entering the spanner has a replacement path
// among the spanner edges emitted by the end of its iteration i: at most
// 2i-1 hops for dominated edges, 2i for same-cluster purges, every hop at
// or below the removed weight. Requires capture_snapshots.
std::string check_deletion_witnesses(const streamsort::RunResult& r);

} // namespace streamspan::verify
