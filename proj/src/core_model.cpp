#include "streamspan/core_model.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "streamspan/prng.hpp"

namespace streamspan {

SamplingHierarchy::SamplingHierarchy(VertexId n, unsigned k, std::uint64_t seed)
    : n_(n), k_(k), seed_(seed) {
    if (n < 1) throw std::invalid_argument("hierarchy needs at least one vertex");
    if (k < 1) throw std::invalid_argument("hierarchy needs at least one level");
    probability_ = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(k));
    max_level_.assign(n + 1, 0);
    for (VertexId v = 1; v <= n; ++v) {
        unsigned lvl = 0;
        while (lvl + 1 <= k - 1 && prf_coin(seed, lvl + 1, v, probability_)) ++lvl;
        max_level_[v] = lvl;
    }
}

SamplingHierarchy SamplingHierarchy::with_levels(unsigned k, std::vector<unsigned> max_level) {
    if (k < 1) throw std::invalid_argument("hierarchy needs at least one level");
    if (max_level.size() < 2) throw std::invalid_argument("hierarchy needs at least one vertex");
    SamplingHierarchy h;
    h.n_ = static_cast<VertexId>(max_level.size() - 1);
    h.k_ = k;
    h.seed_ = 0;
    h.probability_ = std::pow(static_cast<double>(h.n_), -1.0 / static_cast<double>(k));
    max_level[0] = 0;
    for (VertexId v = 1; v <= h.n_; ++v) {
        if (max_level[v] > k - 1)
            throw std::invalid_argument("vertex level exceeds k-1");
    }
    h.max_level_ = std::move(max_level);
    return h;
}

MultiLevelClustering::MultiLevelClustering(const SamplingHierarchy& h)
    : n_(h.vertex_count()) {
    centers_.assign(h.levels(), std::vector<VertexId>(n_ + 1, kNoVertex));
    level_.assign(n_ + 1, 0);
    for (VertexId v = 1; v <= n_; ++v) {
        const unsigned top = h.max_level(v);
        for (unsigned j = 0; j <= top; ++j) centers_[j][v] = v;
        level_[v] = top;
    }
}

void MultiLevelClustering::raise(VertexId v, VertexId x, unsigned new_level) {
    assert(new_level > level_[v]);
    assert(new_level < levels());
    for (unsigned j = level_[v] + 1; j <= new_level; ++j) centers_[j][v] = x;
    level_[v] = new_level;
}

std::string MultiLevelClustering::check_contiguity() const {
    for (VertexId v = 1; v <= n_; ++v) {
        for (unsigned j = 0; j < levels(); ++j) {
            const bool clustered = centers_[j][v] != kNoVertex;
            const bool expected = j <= level_[v];
            if (clustered != expected)
                return "vertex " + std::to_string(v) + " clustering not contiguous at level " +
                       std::to_string(j);
        }
    }
    return {};
}

std::string MultiLevelClustering::check_centers(const SamplingHierarchy& h) const {
    for (unsigned j = 0; j < levels(); ++j) {
        for (VertexId v = 1; v <= n_; ++v) {
            const VertexId x = centers_[j][v];
            if (x == kNoVertex) continue;
            if (h.max_level(x) < j)
                return "center " + std::to_string(x) + " does not survive to level " +
                       std::to_string(j);
            if (centers_[j][x] != x)
                return "center " + std::to_string(x) + " is not its own center at level " +
                       std::to_string(j);
        }
    }
    return {};
}

std::string MultiLevelClustering::check_sampled_subclusters(const SamplingHierarchy& h) const {
    for (unsigned j = 0; j + 1 < levels(); ++j) {
        for (VertexId v = 1; v <= n_; ++v) {
            const VertexId x = centers_[j][v];
            if (x == kNoVertex || !h.is_sampled_cluster(x, j)) continue;
            if (centers_[j + 1][v] != x)
                return "vertex " + std::to_string(v) + " leaves sampled cluster " +
                       std::to_string(x) + " between levels " + std::to_string(j) + " and " +
                       std::to_string(j + 1);
        }
    }
    return {};
}

} // namespace streamspan
