#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamspan/core_model.hpp"
#include "streamspan/graph_io.hpp"

namespace streamspan {

// Edge buffered at a vertex; the owning endpoint is implicit.
struct BufferedEdge {
    VertexId other = kNoVertex;
    Weight w = 1.0;
};

struct CommittedEdge {
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    Weight w = 1.0;
    bool hook = false; // edge that raised u into a higher cluster
};

struct WorkCounters {
    std::uint64_t edges_processed = 0;
    std::uint64_t buffered = 0;
    std::uint64_t prune_calls = 0;
    std::uint64_t prune_scans = 0; // element scans charged to prune
    std::uint64_t promotions = 0;
    std::uint64_t discards = 0;
    std::uint64_t rises = 0;
};

enum class CheckMode { off, on };

// One-pass spanner construction. Each arriving edge is charged O(1)
// amortized work; prune settles a vertex's buffer against its retained
// list whenever the buffer catches up in size.
class SpannerState {
public:
    explicit SpannerState(SamplingHierarchy h, CheckMode check = CheckMode::off);

    void process_edge(const WeightedEdge& e);

    // Buffer settlement for vertex u at its residence level. process_edge
    // invokes this at the balance trigger; callable directly only with
    // level == level_of(u).
    void prune(VertexId u, unsigned level);

    // Committed edges plus both per-vertex buffers, deduplicated on
    // unordered endpoints (lightest copy wins), canonical orientation,
    // sorted. Valid at any point of the stream.
    std::vector<WeightedEdge> spanner_edges() const;

    const SamplingHierarchy& hierarchy() const { return hierarchy_; }
    const MultiLevelClustering& clustering() const { return clustering_; }
    const WorkCounters& counters() const { return counters_; }
    const std::vector<CommittedEdge>& committed() const { return committed_; }
    std::uint64_t hook_edge_count() const { return hook_edges_; }

    const std::vector<BufferedEdge>& pending(VertexId u) const { return pending_[u]; }
    const std::vector<BufferedEdge>& retained(VertexId u) const { return retained_[u]; }

    // Edges promoted into u's retained list while u resided at level 0.
    std::uint32_t level0_retained_adds(VertexId u) const { return level0_adds_[u]; }

    // Quiescent buffer balance: |pending| <= |retained| for every vertex.
    std::string check_buffer_balance() const;

private:
    void flush_to_committed(VertexId u);

    SamplingHierarchy hierarchy_;
    MultiLevelClustering clustering_;
    CheckMode check_;

    std::vector<std::vector<BufferedEdge>> pending_;  // per-vertex buffer
    std::vector<std::vector<BufferedEdge>> retained_; // per-vertex kept edges
    std::vector<CommittedEdge> committed_;
    std::uint64_t hook_edges_ = 0;

    // Scratch cluster-presence array; all zero between prune calls.
    std::vector<std::uint8_t> scratch_;
    std::size_t scratch_set_ = 0;

    std::vector<std::uint32_t> level0_adds_;
    WorkCounters counters_;
};

// Drive a whole stream through process_edge.
SpannerState build_spanner(SamplingHierarchy h, const EdgeStream& stream,
                           CheckMode check = CheckMode::off);

// Same algorithm on a stream promised nondecreasing in weight; the output
// then respects weights. Raises WeightOrderError at the first violation.
SpannerState build_from_sorted_weighted_stream(SamplingHierarchy h, const EdgeStream& stream,
                                               CheckMode check = CheckMode::off);

} // namespace streamspan
