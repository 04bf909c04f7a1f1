#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace streamspan {

// Vertices are 1..n; 0 is the "no vertex / not clustered" sentinel.
using VertexId = std::uint32_t;
using Weight = double;

inline constexpr VertexId kNoVertex = 0;

struct WeightedEdge {
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    Weight w = 1.0;

    friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Stretch guaranteed for a given number of levels.
inline constexpr unsigned stretch_for(unsigned k) { return 2 * k - 1; }

// Nested random vertex levels. Every vertex survives to level j iff its
// per-level coins hit at levels 1..j; level k is empty by definition, so
// max_level(v) <= k-1. Coins come from a keyed PRF of (seed, level, id),
// which makes a hierarchy replayable from its parameters alone.
class SamplingHierarchy {
public:
    SamplingHierarchy(VertexId n, unsigned k, std::uint64_t seed);

    // Test/replay constructor: explicit per-vertex levels, no coins.
    // max_level.size() must be n+1; index 0 is ignored.
    static SamplingHierarchy with_levels(unsigned k, std::vector<unsigned> max_level);

    VertexId vertex_count() const { return n_; }
    unsigned levels() const { return k_; }
    std::uint64_t seed() const { return seed_; }

    // n^{-1/k}, the per-level survival probability.
    double sampling_probability() const { return probability_; }

    unsigned max_level(VertexId v) const { return max_level_[v]; }

    // A cluster centered at `center` on `level` is sampled exactly when the
    // center survives past that level.
    bool is_sampled_cluster(VertexId center, unsigned level) const {
        return max_level_[center] > level;
    }

private:
    SamplingHierarchy() = default;

    VertexId n_ = 0;
    unsigned k_ = 0;
    std::uint64_t seed_ = 0;
    double probability_ = 0.0;
    std::vector<unsigned> max_level_;
};

// Per-level cluster membership. centers[i][v] is the center of v's level-i
// cluster, kNoVertex if v is not clustered at that level. The set of levels
// where v is clustered is always the contiguous range [0, level_of(v)].
class MultiLevelClustering {
public:
    explicit MultiLevelClustering(const SamplingHierarchy& h);

    VertexId vertex_count() const { return n_; }
    unsigned levels() const { return static_cast<unsigned>(centers_.size()); }

    VertexId center(unsigned level, VertexId v) const { return centers_[level][v]; }
    unsigned level_of(VertexId v) const { return level_[v]; }

    // Move v up to new_level, joining the clusters centered at x on every
    // level in (level_of(v), new_level]. Caller guarantees new_level does not
    // exceed x's own survival level.
    void raise(VertexId v, VertexId x, unsigned new_level);

    // Invariant sweeps. Empty string when clean, else a description of the
    // first violation found.
    std::string check_contiguity() const;
    std::string check_centers(const SamplingHierarchy& h) const;
    std::string check_sampled_subclusters(const SamplingHierarchy& h) const;

private:
    VertexId n_ = 0;
    std::vector<std::vector<VertexId>> centers_;
    std::vector<unsigned> level_;
};

} // namespace streamspan
