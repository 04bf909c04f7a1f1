#include "streamspan/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "streamspan/errors.hpp"

namespace streamspan::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelSlack = 1e-9; // floating-point guard, not a semantic tolerance

std::string edge_str(VertexId u, VertexId v) {
    return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

} // namespace

AdjacencyGraph::AdjacencyGraph(VertexId n, const std::vector<WeightedEdge>& edges) : n_(n) {
    offsets_.assign(static_cast<std::size_t>(n) + 2, 0);
    for (const auto& e : edges) {
        if (e.u < 1 || e.u > n || e.v < 1 || e.v > n)
            throw std::invalid_argument("edge endpoint out of range");
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
        if (e.w != 1.0) unit_ = false;
    }
    for (std::size_t v = 1; v < offsets_.size(); ++v) offsets_[v] += offsets_[v - 1];
    arcs_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges) {
        arcs_[cursor[e.u]++] = {e.v, e.w};
        arcs_[cursor[e.v]++] = {e.u, e.w};
    }
}

std::vector<double> exact_distances(const AdjacencyGraph& g, VertexId source) {
    const std::size_t n = g.vertex_count();
    std::vector<double> dist(n + 1, kUnreachable);
    dist[source] = 0.0;

    if (g.unit_weights()) {
        std::queue<VertexId> q;
        q.push(source);
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop();
            for (const auto* a = g.begin(v); a != g.end(v); ++a) {
                if (dist[a->to] == kUnreachable) {
                    dist[a->to] = dist[v] + 1.0;
                    q.push(a->to);
                }
            }
        }
        return dist;
    }

    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const auto* a = g.begin(v); a != g.end(v); ++a) {
            const double nd = d + a->w;
            if (nd < dist[a->to]) {
                dist[a->to] = nd;
                heap.push({nd, a->to});
            }
        }
    }
    return dist;
}

StretchReport check_stretch(VertexId n, const std::vector<WeightedEdge>& graph,
                            const std::vector<WeightedEdge>& spanner, double stretch,
                            const VerifyLimits& limits) {
    if (n > limits.max_vertices)
        throw GuardLimitError("exact stretch check refused for n=" + std::to_string(n) +
                              " (limit " + std::to_string(limits.max_vertices) + ")");

    AdjacencyGraph sg(n, spanner);

    // One shortest-path run per distinct source endpoint.
    std::vector<WeightedEdge> work;
    work.reserve(graph.size());
    for (const auto& e : graph)
        work.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
    std::sort(work.begin(), work.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) { return a.u < b.u; });

    StretchReport report;
    std::vector<double> dist;
    VertexId cur_source = kNoVertex;
    for (const auto& e : work) {
        if (e.u != cur_source) {
            cur_source = e.u;
            dist = exact_distances(sg, cur_source);
        }
        ++report.edges_checked;
        const double d = dist[e.v];
        const double bound = stretch * e.w;
        const double ratio = bound > 0.0 ? d / bound : (d <= 1e-12 ? 0.0 : kUnreachable);
        if (ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.worst = e;
        }
        if (d > bound * (1.0 + kRelSlack) + 1e-12 && report.ok) {
            report.ok = false;
            report.detail = d == kUnreachable
                                ? "spanner disconnects edge " + edge_str(e.u, e.v)
                                : "edge " + edge_str(e.u, e.v) + " stretched to " +
                                      std::to_string(d) + " against bound " +
                                      std::to_string(bound);
        }
    }
    return report;
}

std::string check_cluster_radius(const SpannerState& state) {
    const auto& clustering = state.clustering();
    const VertexId n = clustering.vertex_count();

    std::vector<WeightedEdge> hooks;
    for (const auto& e : state.committed())
        if (e.hook) hooks.push_back({e.u, e.v, 1.0});
    AdjacencyGraph hg(n, hooks);

    constexpr std::uint32_t kNoHop = std::numeric_limits<std::uint32_t>::max();
    std::unordered_map<VertexId, std::vector<std::uint32_t>> hop_cache;
    auto hops_from = [&](VertexId c) -> const std::vector<std::uint32_t>& {
        auto it = hop_cache.find(c);
        if (it != hop_cache.end()) return it->second;
        std::vector<std::uint32_t> hop(static_cast<std::size_t>(n) + 1, kNoHop);
        hop[c] = 0;
        std::queue<VertexId> q;
        q.push(c);
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop();
            for (const auto* a = hg.begin(v); a != hg.end(v); ++a) {
                if (hop[a->to] == kNoHop) {
                    hop[a->to] = hop[v] + 1;
                    q.push(a->to);
                }
            }
        }
        return hop_cache.emplace(c, std::move(hop)).first->second;
    };

    for (VertexId v = 1; v <= n; ++v) {
        for (unsigned lvl = 1; lvl <= clustering.level_of(v); ++lvl) {
            const VertexId c = clustering.center(lvl, v);
            const auto& hop = hops_from(c);
            if (hop[v] > lvl)
                return "vertex " + std::to_string(v) + " sits " +
                       (hop[v] == kNoHop ? std::string("unreachably far")
                                         : std::to_string(hop[v]) + " hook edges") +
                       " from its level-" + std::to_string(lvl) + " center " + std::to_string(c);
        }
    }
    return {};
}

std::string check_invariants(const SpannerState& state) {
    std::string err = state.clustering().check_contiguity();
    if (!err.empty()) return err;
    err = state.clustering().check_centers(state.hierarchy());
    if (!err.empty()) return err;
    err = state.clustering().check_sampled_subclusters(state.hierarchy());
    if (!err.empty()) return err;
    return state.check_buffer_balance();
}

std::string check_work_counters(const WorkCounters& c) {
    if (c.buffered > c.edges_processed)
        return "buffered " + std::to_string(c.buffered) + " edges out of " +
               std::to_string(c.edges_processed) + " processed";
    if (c.prune_scans > 2 * c.buffered)
        return "prune scanned " + std::to_string(c.prune_scans) + " elements, over twice the " +
               std::to_string(c.buffered) + " buffered edges";
    return {};
}

SizeWorkReport aggregate_size_work(const std::vector<SizeWorkSample>& samples, VertexId n,
                                   unsigned k) {
    if (samples.size() < 10)
        throw std::invalid_argument("size/work aggregation needs at least ten runs");

    SizeWorkReport report;
    const double nd = static_cast<double>(n);
    report.size_bound = 4.0 * (k * std::pow(nd, 1.0 + 1.0 / k) + k * nd);
    report.hook_bound = static_cast<std::uint64_t>(n) * (k - 1);

    double sum_size = 0.0, sum_scans = 0.0, sum_m = 0.0;
    report.min_scans_per_edge = kInf;
    for (const auto& s : samples) {
        sum_size += static_cast<double>(s.spanner_edges);
        sum_scans += static_cast<double>(s.prune_scans);
        sum_m += static_cast<double>(s.stream_edges);
        report.max_hooks = std::max(report.max_hooks, s.hook_edges);
        if (s.stream_edges > 0) {
            const double per = static_cast<double>(s.prune_scans) /
                               static_cast<double>(s.stream_edges);
            report.min_scans_per_edge = std::min(report.min_scans_per_edge, per);
            report.max_scans_per_edge = std::max(report.max_scans_per_edge, per);
        }
    }
    const double count = static_cast<double>(samples.size());
    report.mean_size = sum_size / count;
    report.mean_scans = sum_scans / count;
    report.scan_bound = 10.0 * (sum_m / count + static_cast<double>(k) * nd);

    if (report.mean_size > report.size_bound) {
        report.ok = false;
        report.detail = "mean spanner size " + std::to_string(report.mean_size) +
                        " exceeds bound " + std::to_string(report.size_bound);
    } else if (report.max_hooks > report.hook_bound) {
        report.ok = false;
        report.detail = "a run used " + std::to_string(report.max_hooks) +
                        " hook edges, over the bound " + std::to_string(report.hook_bound);
    } else if (report.mean_scans > report.scan_bound) {
        report.ok = false;
        report.detail = "mean prune scans " + std::to_string(report.mean_scans) +
                        " exceed bound " + std::to_string(report.scan_bound);
    }
    return report;
}

std::string check_pass_budget(const streamsort::RunResult& r) {
    const std::uint64_t budget = static_cast<std::uint64_t>(streamsort::kPassBound) * r.k;
    if (r.accounting.total_passes() > budget)
        return "run used " + std::to_string(r.accounting.total_passes()) + " passes, over " +
               std::to_string(budget);
    if (r.accounting.max_state_records > streamsort::kDefaultStateBudget)
        return "a transducer held " + std::to_string(r.accounting.max_state_records) +
               " records of state, over " + std::to_string(streamsort::kDefaultStateBudget);
    return {};
}

namespace {

// Minimax reachability: cost of the cheapest-bottleneck path from `source`
// using at most `max_hops` edges. Two-array rounds keep the hop bound exact.
std::vector<double> minimax_within_hops(VertexId n, const std::vector<WeightedEdge>& edges,
                                        VertexId source, unsigned max_hops) {
    std::vector<double> prev(static_cast<std::size_t>(n) + 1, kInf);
    prev[source] = 0.0;
    std::vector<double> next = prev;
    for (unsigned h = 0; h < max_hops; ++h) {
        bool improved = false;
        for (const auto& e : edges) {
            const double via_u = std::max(prev[e.u], e.w);
            if (via_u < next[e.v]) {
                next[e.v] = via_u;
                improved = true;
            }
            const double via_v = std::max(prev[e.v], e.w);
            if (via_v < next[e.u]) {
                next[e.u] = via_v;
                improved = true;
            }
        }
        prev = next;
        if (!improved) break;
    }
    return prev;
}

} // namespace

std::string check_center_paths(const streamsort::RunResult& r) {
    if (r.snapshots.empty()) return "no snapshots captured";

    for (const auto& snap : r.snapshots) {
        if (snap.iteration > r.k) continue;
        const std::vector<WeightedEdge> prefix(r.spanner.begin(),
                                               r.spanner.begin() + snap.spanner_prefix);

        std::unordered_map<VertexId, VertexId> center_of;
        std::unordered_map<VertexId, double> min_live;
        for (const auto& rec : snap.live) {
            if (rec.kind == streamsort::RecordKind::vertex) {
                center_of[rec.id] = rec.own_center;
            } else {
                auto [it, fresh] = min_live.try_emplace(rec.id, rec.weight);
                if (!fresh) it->second = std::min(it->second, rec.weight);
            }
        }

        std::unordered_map<VertexId, std::vector<double>> dp_cache;
        for (const auto& [v, c] : center_of) {
            auto it = dp_cache.find(c);
            if (it == dp_cache.end())
                it = dp_cache.emplace(c, minimax_within_hops(r.n, prefix, c, snap.iteration - 1))
                         .first;
            const double reach = it->second[v];
            if (reach == kInf)
                return "iteration " + std::to_string(snap.iteration) + ": vertex " +
                       std::to_string(v) + " cannot reach center " + std::to_string(c) +
                       " within " + std::to_string(snap.iteration - 1) + " spanner hops";
            const auto lv = min_live.find(v);
            if (lv != min_live.end() && reach > lv->second * (1.0 + kRelSlack))
                return "iteration " + std::to_string(snap.iteration) + ": center path of " +
                       std::to_string(v) + " tops at " + std::to_string(reach) +
                       ", above its lightest live edge " + std::to_string(lv->second);
        }
    }
    return {};
}

std::string check_deletion_witnesses(const streamsort::RunResult& r) {
    if (r.snapshots.size() < 2) return "no snapshots captured";

    for (std::size_t j = 0; j + 1 < r.snapshots.size(); ++j) {
        const auto& snap = r.snapshots[j];
        if (snap.deleted.empty()) continue;
        const unsigned i = snap.iteration;
        const std::size_t end_prefix = r.snapshots[j + 1].spanner_prefix;
        const std::vector<WeightedEdge> prefix(r.spanner.begin(), r.spanner.begin() + end_prefix);
        AdjacencyGraph sg(r.n, prefix);

        constexpr std::uint32_t kNoHop = std::numeric_limits<std::uint32_t>::max();
        for (const auto& d : snap.deleted) {
            const unsigned max_hops = d.same_cluster_purge ? 2 * i : 2 * i - 1;
            const double limit = d.w * (1.0 + kRelSlack);
            std::vector<std::uint32_t> hop(static_cast<std::size_t>(r.n) + 1, kNoHop);
            hop[d.u] = 0;
            std::queue<VertexId> q;
            q.push(d.u);
            while (!q.empty() && hop[d.v] == kNoHop) {
                const VertexId v = q.front();
                q.pop();
                if (hop[v] >= max_hops) continue;
                for (const auto* a = sg.begin(v); a != sg.end(v); ++a) {
                    if (a->w > limit || hop[a->to] != kNoHop) continue;
                    hop[a->to] = hop[v] + 1;
                    q.push(a->to);
                }
            }
            if (hop[d.v] > max_hops)
                return "iteration " + std::to_string(i) + ": deleted edge " +
                       edge_str(d.u, d.v) + (d.same_cluster_purge ? " (purged)" : "") +
                       " lacks a replacement path within " + std::to_string(max_hops) +
                       " hops of weight at most " + std::to_string(d.w);
        }
    }
    return {};
}

} // namespace streamspan::verify
