#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "streamspan/core_model.hpp"
#include "streamspan/graph_io.hpp"
#include "streamspan/streamsort_runtime.hpp"

namespace streamspan::streamsort {

// Multi-pass spanner construction on the sort/stream pass model.
//
// Each of the k iterations runs five sort passes and five stream passes:
//   1. group by current cluster, flip one coin per cluster  (no coins in
//      iteration k)
//   2. pair occurrences, OR the sampled flag across each pair
//   3. group edges before their owner vertex, fold the running minimum
//      over sampled edges into the trailing vertex record
//   4. group by (owner, far cluster) with weights ascending; mark the hook
//      edge and per-cluster selections +1, dominated group members -1, and
//      stamp the owner's new center onto its occurrences
//   5. pair occurrences again; +1 pairs leave for the spanner sink, -1
//      pairs are dropped, surviving pairs exchange refreshed centers and
//      same-cluster pairs are purged; dead vertex records are dropped
//
// With the single preprocessing pass that is 10k+1 passes, within the
// documented bound below.
inline constexpr unsigned kPassesPerIteration = 10;
inline constexpr unsigned kPassBound = 11; // total passes <= kPassBound * k

struct SelectionStats {
    std::size_t unsampled_vertices = 0;
    std::size_t spanner_marks = 0;
};

struct DeletedEdge {
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    Weight w = 0.0;
    bool same_cluster_purge = false; // dropped because both endpoints landed
                                     // in one cluster, not by a -1 mark
};

struct RebuildStats {
    std::size_t emitted = 0;
    std::size_t deleted_edges = 0;
    std::size_t dead_vertices = 0;
    std::size_t live_vertices = 0;
    std::size_t live_edge_occurrences = 0;
};

struct IterationStats {
    unsigned iteration = 0;
    SelectionStats selection;
    RebuildStats rebuild;
};

// State captured at the start of an iteration (and once after the last).
struct IterationSnapshot {
    unsigned iteration = 0;
    std::vector<StreamRecord> live;
    std::size_t spanner_prefix = 0; // spanner edges emitted before this point
    std::vector<DeletedEdge> deleted; // edges removed during this iteration
};

struct RunOptions {
    Storage storage = Storage::memory;
    std::filesystem::path tmpdir;
    bool capture_snapshots = false;
    // Re-scan the stream after every pass and fail on structural damage.
    // Test aid; uses memory far beyond the transducer budget.
    bool check_passes = false;
};

struct RunResult {
    VertexId n = 0;
    unsigned k = 0;
    std::vector<WeightedEdge> spanner; // output stream, in emission order
    PassAccounting accounting;
    std::vector<IterationStats> iterations;
    std::vector<IterationSnapshot> snapshots; // k+1 entries when captured
};

// Expand the input into n vertex records plus two oriented occurrences per
// edge. Counts as one stream pass. The input must be a simple graph; a
// repeated endpoint pair breaks occurrence pairing and is reported as
// stream corruption by the first pairing pass.
RecordSequence preprocess(const EdgeStream& input, Runtime& rt);

// The five per-iteration steps. Each runs one sort pass and one stream
// pass on `rt`. They are exposed for tests; run() composes them.
RecordSequence sample_clusters(Runtime& rt, const RecordSequence& s, unsigned k,
                               unsigned iteration, std::uint64_t seed, double probability);
RecordSequence propagate_sampled_flags(Runtime& rt, const RecordSequence& s);
RecordSequence assign_nearest_sampled(Runtime& rt, const RecordSequence& s);
RecordSequence select_spanner_edges(Runtime& rt, const RecordSequence& s, SelectionStats& stats);
RecordSequence resolve_and_rebuild(Runtime& rt, const RecordSequence& s,
                                   std::vector<WeightedEdge>& spanner_sink, RebuildStats& stats,
                                   std::vector<DeletedEdge>* deleted_log = nullptr);

// Full run: k iterations over the preprocessed stream. The working stream
// is empty when the last iteration finishes.
RunResult run(unsigned k, std::uint64_t seed, const EdgeStream& input,
              const RunOptions& opts = {});

// Structural audit used by tests and check_passes: every edge occurs as an
// adjacent-in-sorted-order pair of mirrored occurrences with equal weight.
// Returns an empty string when clean.
std::string check_pairing(const RecordSequence& s);

} // namespace streamspan::streamsort
