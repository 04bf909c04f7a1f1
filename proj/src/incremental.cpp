#include "streamspan/incremental.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "streamspan/errors.hpp"

namespace streamspan {

namespace {

// Check-mode failures throw so they fire in every build type.
[[noreturn]] void check_failed(const std::string& msg) {
    throw std::logic_error("invariant violated: " + msg);
}

} // namespace

SpannerState::SpannerState(SamplingHierarchy h, CheckMode check)
    : hierarchy_(std::move(h)), clustering_(hierarchy_), check_(check) {
    const VertexId n = hierarchy_.vertex_count();
    pending_.resize(n + 1);
    retained_.resize(n + 1);
    scratch_.assign(n + 1, 0);
    level0_adds_.assign(n + 1, 0);
}

void SpannerState::process_edge(const WeightedEdge& e) {
    const VertexId n = hierarchy_.vertex_count();
    if (e.u < 1 || e.u > n || e.v < 1 || e.v > n)
        throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop");

    ++counters_.edges_processed;

    VertexId u = e.u;
    VertexId v = e.v;
    if (clustering_.level_of(u) > clustering_.level_of(v)) std::swap(u, v);

    const unsigned i = clustering_.level_of(u);
    const VertexId x = clustering_.center(i, v);
    const unsigned h = hierarchy_.max_level(x);

    if (check_ == CheckMode::on) {
        if (clustering_.level_of(v) < i) check_failed("orientation picked the higher endpoint");
        if (x == kNoVertex) check_failed("far endpoint unclustered at the residence level");
        if (h > i && clustering_.center(i, u) == x)
            check_failed("rise targets the cluster already housing the vertex");
    }

    if (h > i) {
        clustering_.raise(u, x, h);
        ++counters_.rises;
        flush_to_committed(u);
        committed_.push_back({u, v, e.w, true});
        ++hook_edges_;
        pending_[u].clear();
        retained_[u].clear();
    } else {
        pending_[u].push_back({v, e.w});
        ++counters_.buffered;
        if (pending_[u].size() >= retained_[u].size()) prune(u, i);
    }

    if (check_ == CheckMode::on) {
        if (pending_[u].size() > retained_[u].size())
            check_failed("buffer left larger than the retained list");
        if (scratch_set_ != 0) check_failed("scratch marks leaked out of prune");
    }
}

void SpannerState::prune(VertexId u, unsigned level) {
    auto& pend = pending_[u];
    auto& ret = retained_[u];

    ++counters_.prune_calls;
    counters_.prune_scans += pend.size() + ret.size();

    if (check_ == CheckMode::on && scratch_set_ != 0)
        check_failed("scratch marks present at prune entry");

    for (const auto& b : ret) {
        const VertexId c = clustering_.center(level, b.other);
        if (!scratch_[c]) {
            scratch_[c] = 1;
            ++scratch_set_;
        }
    }

    const VertexId own = clustering_.center(level, u);
    for (const auto& b : pend) {
        const VertexId c = clustering_.center(level, b.other);
        if (c != own && !scratch_[c]) {
            scratch_[c] = 1;
            ++scratch_set_;
            ret.push_back(b);
            ++counters_.promotions;
            if (level == 0) ++level0_adds_[u];
        } else {
            ++counters_.discards;
            if (check_ == CheckMode::on && c != own) {
                // a kept edge into the same cluster must already exist
                const bool witness =
                    std::any_of(ret.begin(), ret.end(), [&](const BufferedEdge& r) {
                        return clustering_.center(level, r.other) == c;
                    });
                if (!witness) check_failed("discarded edge lacks a kept same-cluster witness");
            }
        }
    }
    pend.clear();

    for (const auto& b : ret) {
        const VertexId c = clustering_.center(level, b.other);
        if (scratch_[c]) {
            scratch_[c] = 0;
            --scratch_set_;
        }
    }

    if (check_ == CheckMode::on && scratch_set_ != 0)
        check_failed("scratch marks left set after prune");
}

void SpannerState::flush_to_committed(VertexId u) {
    for (const auto& b : pending_[u]) committed_.push_back({u, b.other, b.w, false});
    for (const auto& b : retained_[u]) committed_.push_back({u, b.other, b.w, false});
}

std::vector<WeightedEdge> SpannerState::spanner_edges() const {
    std::unordered_map<std::uint64_t, Weight> best;
    best.reserve(committed_.size());
    auto key = [](VertexId a, VertexId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    auto offer = [&](VertexId a, VertexId b, Weight w) {
        auto [it, inserted] = best.try_emplace(key(a, b), w);
        if (!inserted && w < it->second) it->second = w;
    };

    for (const auto& c : committed_) offer(c.u, c.v, c.w);
    for (VertexId u = 1; u <= hierarchy_.vertex_count(); ++u) {
        for (const auto& b : pending_[u]) offer(u, b.other, b.w);
        for (const auto& b : retained_[u]) offer(u, b.other, b.w);
    }

    std::vector<WeightedEdge> out;
    out.reserve(best.size());
    for (const auto& [k, w] : best)
        out.push_back({static_cast<VertexId>(k >> 32), static_cast<VertexId>(k & 0xFFFFFFFFu), w});
    std::sort(out.begin(), out.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.u != b.u) return a.u < b.u;
        if (a.v != b.v) return a.v < b.v;
        return a.w < b.w;
    });
    return out;
}

std::string SpannerState::check_buffer_balance() const {
    for (VertexId u = 1; u <= hierarchy_.vertex_count(); ++u) {
        if (pending_[u].size() > retained_[u].size())
            return "vertex " + std::to_string(u) + " buffer exceeds retained list (" +
                   std::to_string(pending_[u].size()) + " > " +
                   std::to_string(retained_[u].size()) + ")";
    }
    return {};
}

SpannerState build_spanner(SamplingHierarchy h, const EdgeStream& stream, CheckMode check) {
    SpannerState state(std::move(h), check);
    for (const auto& e : stream.edges) state.process_edge(e);
    return state;
}

SpannerState build_from_sorted_weighted_stream(SamplingHierarchy h, const EdgeStream& stream,
                                               CheckMode check) {
    SpannerState state(std::move(h), check);
    Weight prev = 0.0;
    std::uint64_t pos = 0;
    for (const auto& e : stream.edges) {
        ++pos;
        if (pos > 1 && e.w < prev)
            throw WeightOrderError("weight " + std::to_string(e.w) + " after " +
                                       std::to_string(prev), pos);
        prev = e.w;
        state.process_edge(e);
    }
    return state;
}

} // namespace streamspan
