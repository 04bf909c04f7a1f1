#include "streamspan/streamsort_spanner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "streamspan/errors.hpp"
#include "streamspan/prng.hpp"

namespace streamspan::streamsort {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const StreamRecord& r) {
    return "(" + std::to_string(r.id) + "," + std::to_string(r.other) + ")";
}

// Pass 1: one coin per contiguous cluster group; the coin lands on every
// vertex of the cluster and every edge occurrence the cluster owns.
// Iteration state for the next steps is reset here.
class SampleClustersPass final : public Transducer {
public:
    SampleClustersPass(std::uint64_t seed, unsigned iteration, bool enabled, double probability)
        : seed_(seed), iteration_(iteration), enabled_(enabled), probability_(probability) {}

    void on_record(const StreamRecord& rec, RecordSink& out) override {
        StreamRecord r = rec;
        if (r.kind == RecordKind::edge && r.spanner_mark != 0)
            throw StreamCorruptionError("live edge " + describe(r) + " carries a spanner mark");
        if (!have_group_ || r.own_center != group_) {
            group_ = r.own_center;
            have_group_ = true;
            coin_ = enabled_ && prf_coin(seed_, iteration_, group_, probability_);
        }
        r.sampled = coin_;
        if (r.kind == RecordKind::vertex) {
            r.weight = kInf;
            r.other = kNoVertex;
        }
        out.append(r);
    }

    std::size_t state_size() const override { return 3; } // group id, coin, group-open flag
    std::string_view name() const override { return "sample-clusters"; }

private:
    std::uint64_t seed_;
    unsigned iteration_;
    bool enabled_;
    double probability_;
    VertexId group_ = kNoVertex;
    bool have_group_ = false;
    bool coin_ = false;
};

// Pass 2: occurrences arrive as adjacent mirrored pairs; OR the sampled
// flag so both sides of an edge know about a sampled endpoint cluster.
class PropagateSampledPass final : public Transducer {
public:
    void on_record(const StreamRecord& rec, RecordSink& out) override {
        if (rec.kind == RecordKind::vertex) {
            if (have_ || seen_edges_)
                throw StreamCorruptionError("vertex record out of place in pairing pass");
            out.append(rec);
            return;
        }
        seen_edges_ = true;
        if (!have_) {
            pending_ = rec;
            have_ = true;
            return;
        }
        if (pending_.id != rec.other || pending_.other != rec.id ||
            pending_.weight != rec.weight)
            throw StreamCorruptionError("unpaired occurrence " + describe(pending_) +
                                        " against " + describe(rec));
        have_ = false;
        const bool sampled = pending_.sampled || rec.sampled;
        StreamRecord first = pending_, second = rec;
        first.sampled = sampled;
        second.sampled = sampled;
        out.append(first);
        out.append(second);
    }

    void finish(RecordSink&) override {
        if (have_)
            throw StreamCorruptionError("trailing unpaired occurrence " + describe(pending_));
    }

    std::size_t state_size() const override { return (have_ ? 1 : 0) + 1; }
    std::string_view name() const override { return "propagate-sampled"; }

private:
    StreamRecord pending_;
    bool have_ = false;
    bool seen_edges_ = false;
};

// Pass 3: a vertex record trails its edge occurrences; fold the running
// minimum over sampled edges into it. Ties break on (weight, far center,
// far endpoint). Unsampled vertices adopt the winning far center as their
// next cluster; with no sampled edge they head for deletion.
class AssignNearestPass final : public Transducer {
public:
    void on_record(const StreamRecord& rec, RecordSink& out) override {
        if (have_group_ && group_ != rec.id)
            throw StreamCorruptionError("owner vertex record missing before " + describe(rec));
        if (rec.kind == RecordKind::edge) {
            group_ = rec.id;
            have_group_ = true;
            if (rec.sampled) {
                const bool better =
                    !have_best_ || rec.weight < best_.weight ||
                    (rec.weight == best_.weight &&
                     (rec.other_center < best_.other_center ||
                      (rec.other_center == best_.other_center && rec.other < best_.other)));
                if (better) {
                    best_ = rec;
                    have_best_ = true;
                }
            }
            out.append(rec);
            return;
        }
        StreamRecord v = rec;
        if (!v.sampled) {
            if (have_best_) {
                v.weight = best_.weight;
                v.own_center = best_.other_center;
                v.other = best_.other;
            } else {
                v.weight = kInf;
                v.own_center = kNoVertex;
                v.other = kNoVertex;
            }
        }
        out.append(v);
        have_group_ = false;
        have_best_ = false;
    }

    void finish(RecordSink&) override {
        if (have_group_)
            throw StreamCorruptionError("stream ended inside vertex group " +
                                        std::to_string(group_));
    }

    std::size_t state_size() const override { return (have_best_ ? 1 : 0) + 2; }
    std::string_view name() const override { return "assign-nearest-sampled"; }

private:
    StreamRecord best_;
    bool have_best_ = false;
    VertexId group_ = kNoVertex;
    bool have_group_ = false;
};

// Pass 4: edges grouped by (owner, far cluster), weights ascending, owner
// vertex record first. The owner's hook edge and the cheapest edge of every
// cluster group cheaper than the hook get +1; edges dominated inside a
// selected group get -1; everything else stays undecided. The owner's new
// center is stamped onto each occurrence on the way through.
class MarkSpannerPass final : public Transducer {
public:
    explicit MarkSpannerPass(SelectionStats& stats) : stats_(&stats) {}

    void on_record(const StreamRecord& rec, RecordSink& out) override {
        if (rec.kind == RecordKind::vertex) {
            vertex_ = rec;
            have_vertex_ = true;
            group_open_ = false;
            group_selected_ = false;
            if (!rec.sampled) ++stats_->unsampled_vertices;
            out.append(rec);
            return;
        }
        if (!have_vertex_ || vertex_.id != rec.id)
            throw StreamCorruptionError("edge " + describe(rec) + " without owner vertex record");

        StreamRecord e = rec;
        const bool first_of_group = !group_open_ || e.other_center != group_rc_;
        if (first_of_group) {
            group_open_ = true;
            group_rc_ = e.other_center;
            group_selected_ = false;
        }
        if (!vertex_.sampled) {
            const bool chosen = vertex_.other != kNoVertex && e.other == vertex_.other;
            if (chosen) {
                e.spanner_mark = 1;
                ++stats_->spanner_marks;
            } else if (first_of_group && e.weight < vertex_.weight) {
                e.spanner_mark = 1;
                ++stats_->spanner_marks;
                group_selected_ = true;
            } else if (!first_of_group && group_selected_) {
                e.spanner_mark = -1;
            }
        }
        e.own_center = vertex_.own_center;
        out.append(e);
    }

    std::size_t state_size() const override { return (have_vertex_ ? 1 : 0) + 2; }
    std::string_view name() const override { return "select-spanner-edges"; }

private:
    SelectionStats* stats_;
    StreamRecord vertex_;
    bool have_vertex_ = false;
    VertexId group_rc_ = kNoVertex;
    bool group_open_ = false;
    bool group_selected_ = false;
};

// Pass 5: settle each mirrored pair. A +1 on either side sends one copy to
// the spanner sink; otherwise a -1 on either side deletes the edge; pairs
// still undecided swap refreshed centers and are purged if both endpoints
// now share a cluster. Vertex records that are neither sampled nor hooked
// are dropped.
class ResolvePass final : public Transducer {
public:
    ResolvePass(std::vector<WeightedEdge>& sink, RebuildStats& stats,
                std::vector<DeletedEdge>* deleted_log)
        : sink_(&sink), stats_(&stats), deleted_log_(deleted_log) {}

    void on_record(const StreamRecord& rec, RecordSink& out) override {
        if (rec.kind == RecordKind::vertex) {
            if (have_ || seen_edges_)
                throw StreamCorruptionError("vertex record out of place in pairing pass");
            if (!rec.sampled && std::isinf(rec.weight)) {
                ++stats_->dead_vertices;
                return;
            }
            ++stats_->live_vertices;
            out.append(rec);
            return;
        }
        seen_edges_ = true;
        if (!have_) {
            pending_ = rec;
            have_ = true;
            return;
        }
        if (pending_.id != rec.other || pending_.other != rec.id ||
            pending_.weight != rec.weight)
            throw StreamCorruptionError("unpaired occurrence " + describe(pending_) +
                                        " against " + describe(rec));
        have_ = false;

        StreamRecord a = pending_, b = rec;
        if (a.spanner_mark == 1 || b.spanner_mark == 1) {
            sink_->push_back(
                {std::min(a.id, a.other), std::max(a.id, a.other), a.weight});
            ++stats_->emitted;
            return;
        }
        if (a.spanner_mark == -1 || b.spanner_mark == -1) {
            ++stats_->deleted_edges;
            if (deleted_log_) deleted_log_->push_back({a.id, a.other, a.weight, false});
            return;
        }
        a.other_center = b.own_center;
        b.other_center = a.own_center;
        if (a.own_center == kNoVertex || b.own_center == kNoVertex)
            throw StreamCorruptionError("undecided edge " + describe(a) +
                                        " owned by a deleted vertex");
        if (a.own_center == a.other_center) {
            ++stats_->deleted_edges;
            if (deleted_log_) deleted_log_->push_back({a.id, a.other, a.weight, true});
            return;
        }
        out.append(a);
        out.append(b);
        stats_->live_edge_occurrences += 2;
    }

    void finish(RecordSink&) override {
        if (have_)
            throw StreamCorruptionError("trailing unpaired occurrence " + describe(pending_));
    }

    std::size_t state_size() const override { return (have_ ? 1 : 0) + 1; }
    std::string_view name() const override { return "resolve-and-rebuild"; }

private:
    std::vector<WeightedEdge>* sink_;
    RebuildStats* stats_;
    std::vector<DeletedEdge>* deleted_log_;
    StreamRecord pending_;
    bool have_ = false;
    bool seen_edges_ = false;
};

} // namespace

RecordSequence preprocess(const EdgeStream& input, Runtime& rt) {
    if (input.n < 1) throw std::invalid_argument("stream needs at least one vertex");
    RecordSink out = rt.make_sink();
    for (VertexId v = 1; v <= input.n; ++v) out.append(make_vertex_record(v));
    for (const auto& e : input.edges) {
        if (e.u < 1 || e.u > input.n || e.v < 1 || e.v > input.n)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("self-loop");
        if (!(e.w >= 0.0) || std::isinf(e.w))
            throw std::invalid_argument("edge weight must be finite and nonnegative");
        out.append(make_edge_record(e.u, e.v, e.w));
        out.append(make_edge_record(e.v, e.u, e.w));
    }
    rt.note_stream_pass("preprocess", input.edges.size(), out.written(), 1);
    return out.finish();
}

RecordSequence sample_clusters(Runtime& rt, const RecordSequence& s, unsigned k,
                               unsigned iteration, std::uint64_t seed, double probability) {
    RecordSequence sorted = rt.sort_pass(
        s,
        GroupLess{{ClusterKey::center, ClusterKey::label, VertexPlacement::before_edges, false}},
        "sort-by-cluster");
    SampleClustersPass pass(seed, iteration, iteration < k, probability);
    return rt.stream_pass(sorted, pass);
}

RecordSequence propagate_sampled_flags(Runtime& rt, const RecordSequence& s) {
    RecordSequence sorted = rt.sort_pass(s, order0_less, "sort-pairs");
    PropagateSampledPass pass;
    return rt.stream_pass(sorted, pass);
}

RecordSequence assign_nearest_sampled(Runtime& rt, const RecordSequence& s) {
    RecordSequence sorted = rt.sort_pass(
        s, GroupLess{{ClusterKey::label, ClusterKey::label, VertexPlacement::after_edges, true}},
        "sort-by-owner-vertex-last");
    AssignNearestPass pass;
    return rt.stream_pass(sorted, pass);
}

RecordSequence select_spanner_edges(Runtime& rt, const RecordSequence& s, SelectionStats& stats) {
    RecordSequence sorted = rt.sort_pass(
        s, GroupLess{{ClusterKey::label, ClusterKey::center, VertexPlacement::before_edges, true}},
        "sort-by-owner-and-cluster");
    MarkSpannerPass pass(stats);
    return rt.stream_pass(sorted, pass);
}

RecordSequence resolve_and_rebuild(Runtime& rt, const RecordSequence& s,
                                   std::vector<WeightedEdge>& spanner_sink, RebuildStats& stats,
                                   std::vector<DeletedEdge>* deleted_log) {
    RecordSequence sorted = rt.sort_pass(s, order0_less, "sort-pairs");
    ResolvePass pass(spanner_sink, stats, deleted_log);
    return rt.stream_pass(sorted, pass);
}

RunResult run(unsigned k, std::uint64_t seed, const EdgeStream& input, const RunOptions& opts) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");

    Runtime rt(opts.storage, opts.tmpdir);
    const double probability =
        std::pow(static_cast<double>(input.n), -1.0 / static_cast<double>(k));

    RunResult result;
    result.n = input.n;
    result.k = k;

    auto audit = [&](const RecordSequence& seq) {
        if (!opts.check_passes) return;
        const std::string err = check_pairing(seq);
        if (!err.empty()) throw StreamCorruptionError(err);
    };

    RecordSequence s = preprocess(input, rt);
    audit(s);

    for (unsigned i = 1; i <= k; ++i) {
        std::vector<DeletedEdge>* deleted_log = nullptr;
        if (opts.capture_snapshots) {
            result.snapshots.push_back({i, s.materialize(), result.spanner.size(), {}});
            deleted_log = &result.snapshots.back().deleted;
        }

        IterationStats stats;
        stats.iteration = i;
        s = sample_clusters(rt, s, k, i, seed, probability);
        audit(s);
        s = propagate_sampled_flags(rt, s);
        audit(s);
        s = assign_nearest_sampled(rt, s);
        audit(s);
        s = select_spanner_edges(rt, s, stats.selection);
        audit(s);
        s = resolve_and_rebuild(rt, s, result.spanner, stats.rebuild, deleted_log);
        audit(s);
        result.iterations.push_back(stats);
    }

    if (s.size() != 0)
        throw StreamCorruptionError("working stream not empty after final iteration");
    if (opts.capture_snapshots)
        result.snapshots.push_back({k + 1, {}, result.spanner.size(), {}});

    result.accounting = rt.accounting();
    return result;
}

std::string check_pairing(const RecordSequence& s) {
    std::vector<StreamRecord> edges;
    auto cur = s.cursor();
    StreamRecord r;
    while (cur.next(r)) {
        if (r.kind == RecordKind::edge) edges.push_back(r);
    }
    std::stable_sort(edges.begin(), edges.end(), order0_less);
    if (edges.size() % 2 != 0) return "odd number of edge occurrences";
    for (std::size_t i = 0; i < edges.size(); i += 2) {
        const StreamRecord& a = edges[i];
        const StreamRecord& b = edges[i + 1];
        if (a.id != b.other || a.other != b.id || a.weight != b.weight)
            return "occurrence " + describe(a) + " is not mirrored by " + describe(b);
    }
    return {};
}

} // namespace streamspan::streamsort
