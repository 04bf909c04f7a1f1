#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "streamspan/errors.hpp"
#include "streamspan/graph_io.hpp"
#include "streamspan/prng.hpp"
#include "streamspan/streamsort_spanner.hpp"
#include "streamspan/verifier.hpp"
#include "test_support.hpp"

using namespace streamspan;
using namespace streamspan::streamsort;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StreamRecord edge_rec(VertexId id, VertexId other, VertexId own, VertexId oc, double w,
                      std::int8_t mark = 0, bool sampled = false) {
    StreamRecord r;
    r.kind = RecordKind::edge;
    r.id = id;
    r.other = other;
    r.own_center = own;
    r.other_center = oc;
    r.weight = w;
    r.spanner_mark = mark;
    r.sampled = sampled;
    return r;
}

StreamRecord vertex_rec(VertexId id, VertexId own, double w = kInf, VertexId other = kNoVertex,
                        bool sampled = false) {
    StreamRecord r;
    r.kind = RecordKind::vertex;
    r.id = id;
    r.other = other;
    r.own_center = own;
    r.other_center = kNoVertex;
    r.weight = w;
    r.spanner_mark = 0;
    r.sampled = sampled;
    return r;
}

RecordSequence seq_of(Runtime& rt, const std::vector<StreamRecord>& records) {
    RecordSink sink = rt.make_sink();
    for (const auto& r : records) sink.append(r);
    return sink.finish();
}

const StreamRecord* find_vertex(const std::vector<StreamRecord>& recs, VertexId id) {
    for (const auto& r : recs)
        if (r.kind == RecordKind::vertex && r.id == id) return &r;
    return nullptr;
}

const StreamRecord* find_edge(const std::vector<StreamRecord>& recs, VertexId id,
                              VertexId other) {
    for (const auto& r : recs)
        if (r.kind == RecordKind::edge && r.id == id && r.other == other) return &r;
    return nullptr;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::size_t counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("streamspan-spanner-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::size_t entries() const {
        std::size_t n = 0;
        for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(path)) ++n;
        return n;
    }
};

} // namespace

TEST_SUITE("preprocess") {
    TEST_CASE("frozen expansion of a two-vertex graph") {
        Runtime rt;
        RecordSequence s = preprocess(testsup::make_stream(2, {{1, 2, 2.5}}, true), rt);
        const auto recs = s.materialize();
        REQUIRE(recs.size() == 4);

        CHECK(recs[0] == make_vertex_record(1));
        CHECK(recs[1] == make_vertex_record(2));
        CHECK(recs[2] == make_edge_record(1, 2, 2.5));
        CHECK(recs[3] == make_edge_record(2, 1, 2.5));

        // vertex records start self-clustered with no hook
        CHECK(recs[0].own_center == 1);
        CHECK(std::isinf(recs[0].weight));
        CHECK(recs[0].other == kNoVertex);

        const PassAccounting& acct = rt.accounting();
        CHECK(acct.stream_passes == 1);
        CHECK(acct.sort_passes == 0);
        REQUIRE(acct.passes.size() == 1);
        CHECK(acct.passes[0].name == "preprocess");
        CHECK(acct.passes[0].records_in == 1);
        CHECK(acct.passes[0].records_out == 4);
        CHECK(acct.passes[0].max_state == 1);
    }

    TEST_CASE("input validation") {
        Runtime rt;
        CHECK_THROWS_AS(preprocess(testsup::make_stream(0, {}), rt), std::invalid_argument);
        CHECK_THROWS_AS(preprocess(testsup::make_stream(2, {{1, 3, 1.0}}), rt),
                        std::invalid_argument);
        CHECK_THROWS_AS(preprocess(testsup::make_stream(2, {{0, 1, 1.0}}), rt),
                        std::invalid_argument);
        CHECK_THROWS_AS(preprocess(testsup::make_stream(2, {{1, 1, 1.0}}), rt),
                        std::invalid_argument);
        CHECK_THROWS_AS(preprocess(testsup::make_stream(2, {{1, 2, -1.0}}), rt),
                        std::invalid_argument);
        CHECK_THROWS_AS(preprocess(testsup::make_stream(2, {{1, 2, kInf}}), rt),
                        std::invalid_argument);
    }
}

TEST_SUITE("sampling step") {
    TEST_CASE("degenerate probabilities") {
        Runtime rt;
        RecordSequence s = preprocess(testsup::make_stream(4, {{1, 2, 1.0}, {3, 4, 2.0}}), rt);

        RecordSequence all = sample_clusters(rt, s, 3, 1, 42, 1.0);
        for (const auto& r : all.materialize()) CHECK(r.sampled);

        RecordSequence none = sample_clusters(rt, s, 3, 1, 42, 0.0);
        for (const auto& r : none.materialize()) CHECK_FALSE(r.sampled);
    }

    TEST_CASE("final iteration never samples and resets vertex state") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(1, 1, 5.0, 9, true), // stale hook state from the previous iteration
            vertex_rec(2, 1, 3.0, 7, true),
        };
        RecordSequence out = sample_clusters(rt, seq_of(rt, in), 2, 2, 42, 1.0);
        for (const auto& r : out.materialize()) {
            CHECK_FALSE(r.sampled);
            CHECK(std::isinf(r.weight));
            CHECK(r.other == kNoVertex);
        }
    }

    TEST_CASE("one coin per cluster, matching the shared coin primitive") {
        Runtime rt;
        std::vector<StreamRecord> in;
        for (VertexId c = 1; c <= 40; ++c) {
            in.push_back(vertex_rec(100 + 2 * c, c));
            in.push_back(vertex_rec(100 + 2 * c + 1, c));
            in.push_back(edge_rec(100 + 2 * c, 1, c, 99, 1.0));
        }
        const std::uint64_t seed = 777;
        const unsigned iteration = 2;
        const double p = 0.5;
        RecordSequence out = sample_clusters(rt, seq_of(rt, in), 5, iteration, seed, p);

        std::size_t sampled_clusters = 0;
        for (const auto& r : out.materialize()) {
            const bool expected = prf_coin(seed, iteration, r.own_center, p);
            CHECK(r.sampled == expected);
            if (r.kind == RecordKind::vertex && r.id % 2 == 0 && expected) ++sampled_clusters;
        }
        CHECK(sampled_clusters > 5);
        CHECK(sampled_clusters < 35);
    }

    TEST_CASE("a live edge with a leftover mark is corruption") {
        Runtime rt;
        std::vector<StreamRecord> in = {vertex_rec(1, 1), vertex_rec(2, 2),
                                        edge_rec(1, 2, 1, 2, 1.0, 1), edge_rec(2, 1, 2, 1, 1.0)};
        CHECK_THROWS_AS(sample_clusters(rt, seq_of(rt, in), 2, 1, 1, 0.5),
                        StreamCorruptionError);
    }
}

TEST_SUITE("propagate step") {
    TEST_CASE("sampled flag is ORed across each pair") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(1, 1, kInf, 0, true),
            vertex_rec(2, 2),
            edge_rec(1, 2, 1, 2, 1.5, 0, true),
            edge_rec(2, 1, 2, 1, 1.5, 0, false),
            edge_rec(3, 4, 3, 4, 2.5, 0, false),
            edge_rec(4, 3, 4, 3, 2.5, 0, false),
        };
        RecordSequence out = propagate_sampled_flags(rt, seq_of(rt, in));
        const auto recs = out.materialize();
        REQUIRE(recs.size() == 6);
        CHECK(find_edge(recs, 1, 2)->sampled);
        CHECK(find_edge(recs, 2, 1)->sampled);
        CHECK_FALSE(find_edge(recs, 3, 4)->sampled);
        CHECK_FALSE(find_edge(recs, 4, 3)->sampled);
        CHECK(find_vertex(recs, 1)->sampled);
        CHECK_FALSE(find_vertex(recs, 2)->sampled);
    }

    TEST_CASE("unpaired occurrences are corruption") {
        Runtime rt;
        CHECK_THROWS_AS(propagate_sampled_flags(rt, seq_of(rt, {edge_rec(1, 2, 1, 2, 1.0)})),
                        StreamCorruptionError);
        // weights differ, so the mirror check fails
        std::vector<StreamRecord> mismatched = {edge_rec(1, 2, 1, 2, 1.0),
                                                edge_rec(2, 1, 2, 1, 2.0)};
        CHECK_THROWS_AS(propagate_sampled_flags(rt, seq_of(rt, mismatched)),
                        StreamCorruptionError);
    }
}

TEST_SUITE("assignment step") {
    TEST_CASE("running minimum over sampled edges with full tie-break") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(3, 3),
            edge_rec(3, 9, 3, 7, 3.0, 0, true),
            edge_rec(3, 8, 3, 4, 3.0, 0, true),  // same weight, smaller far center: wins
            edge_rec(3, 5, 3, 2, 10.0, 0, true),
            edge_rec(3, 6, 3, 11, 1.0, 0, false), // cheapest but unsampled: ignored
        };
        RecordSequence out = assign_nearest_sampled(rt, seq_of(rt, in));
        const auto recs = out.materialize();
        const StreamRecord* v = find_vertex(recs, 3);
        REQUIRE(v != nullptr);
        CHECK(v->weight == 3.0);
        CHECK(v->own_center == 4);
        CHECK(v->other == 8);
        // edges pass through untouched
        CHECK(*find_edge(recs, 3, 9) == in[1]);
        CHECK(*find_edge(recs, 3, 6) == in[4]);
    }

    TEST_CASE("sampled vertices keep their cluster") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(10, 10, kInf, 0, true),
            edge_rec(10, 2, 10, 2, 0.5, 0, true),
        };
        RecordSequence out = assign_nearest_sampled(rt, seq_of(rt, in));
        const StreamRecord* v = find_vertex(out.materialize(), 10);
        REQUIRE(v != nullptr);
        CHECK(v->sampled);
        CHECK(std::isinf(v->weight));
        CHECK(v->own_center == 10);
        CHECK(v->other == kNoVertex);
    }

    TEST_CASE("no sampled neighbor cluster marks the vertex for deletion") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(20, 20),
            edge_rec(20, 3, 20, 3, 2.0, 0, false),
        };
        RecordSequence out = assign_nearest_sampled(rt, seq_of(rt, in));
        const StreamRecord* v = find_vertex(out.materialize(), 20);
        REQUIRE(v != nullptr);
        CHECK(std::isinf(v->weight));
        CHECK(v->own_center == kNoVertex);
        CHECK(v->other == kNoVertex);
    }

    TEST_CASE("edges without an owner vertex record are corruption") {
        Runtime rt;
        CHECK_THROWS_AS(assign_nearest_sampled(rt, seq_of(rt, {edge_rec(3, 9, 3, 7, 1.0)})),
                        StreamCorruptionError);
        std::vector<StreamRecord> wrong_owner = {edge_rec(3, 9, 3, 7, 1.0), vertex_rec(4, 4)};
        CHECK_THROWS_AS(assign_nearest_sampled(rt, seq_of(rt, wrong_owner)),
                        StreamCorruptionError);
    }
}

TEST_SUITE("selection step") {
    TEST_CASE("hand-traced marks for one hooked vertex") {
        Runtime rt;
        // owner 3 hooked: nearest sampled weight 2.0 through endpoint 5, new center 4
        std::vector<StreamRecord> in = {
            vertex_rec(3, 4, 2.0, 5, false),
            edge_rec(3, 6, 3, 2, 1.0),  // first of cluster 2, cheaper than hook
            edge_rec(3, 7, 3, 2, 1.5),  // dominated inside selected cluster 2
            edge_rec(3, 5, 3, 7, 2.0),  // the hook edge itself
            edge_rec(3, 9, 3, 7, 2.0),  // same cluster as hook, undecided
            edge_rec(3, 8, 3, 11, 3.0), // first of cluster 11 but too heavy
        };
        SelectionStats stats;
        RecordSequence out = select_spanner_edges(rt, seq_of(rt, in), stats);
        const auto recs = out.materialize();

        CHECK(find_edge(recs, 3, 6)->spanner_mark == 1);
        CHECK(find_edge(recs, 3, 7)->spanner_mark == -1);
        CHECK(find_edge(recs, 3, 5)->spanner_mark == 1);
        CHECK(find_edge(recs, 3, 9)->spanner_mark == 0);
        CHECK(find_edge(recs, 3, 8)->spanner_mark == 0);
        for (VertexId other : {6, 7, 5, 9, 8})
            CHECK(find_edge(recs, 3, other)->own_center == 4);

        CHECK(stats.unsampled_vertices == 1);
        CHECK(stats.spanner_marks == 2);
    }

    TEST_CASE("sampled owners mark nothing") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(10, 10, kInf, 0, true),
            edge_rec(10, 11, 10, 2, 0.5),
            edge_rec(10, 12, 10, 2, 0.7),
        };
        SelectionStats stats;
        RecordSequence out = select_spanner_edges(rt, seq_of(rt, in), stats);
        const auto recs = out.materialize();
        CHECK(find_edge(recs, 10, 11)->spanner_mark == 0);
        CHECK(find_edge(recs, 10, 12)->spanner_mark == 0);
        CHECK(find_edge(recs, 10, 11)->own_center == 10);
        CHECK(stats.unsampled_vertices == 0);
        CHECK(stats.spanner_marks == 0);
    }

    TEST_CASE("an edge without its owner vertex is corruption") {
        Runtime rt;
        SelectionStats stats;
        std::vector<StreamRecord> in = {edge_rec(2, 9, 2, 7, 1.0), vertex_rec(3, 3)};
        CHECK_THROWS_AS(select_spanner_edges(rt, seq_of(rt, in), stats), StreamCorruptionError);
    }
}

TEST_SUITE("resolution step") {
    TEST_CASE("hand-traced pair settlement") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            vertex_rec(1, 1, kInf, 0, true),   // sampled center
            vertex_rec(2, 1, 2.0, 1, false),   // hooked into cluster 1
            vertex_rec(3, 0, kInf, 0, false),  // dead
            vertex_rec(4, 1, 1.0, 1, false),   // hooked into cluster 1
            vertex_rec(5, 9, 3.0, 9, false),   // hooked into cluster 9
            // (1,2): kept by a +1 on one side
            edge_rec(1, 2, 1, 1, 2.0, 1),
            edge_rec(2, 1, 1, 1, 2.0, 0),
            // (1,3): mixed marks, the +1 must win
            edge_rec(1, 3, 1, 0, 4.0, -1),
            edge_rec(3, 1, 0, 1, 4.0, 1),
            // (1,4): undecided, both endpoints landed in cluster 1
            edge_rec(1, 4, 1, 0, 1.0, 0),
            edge_rec(4, 1, 1, 0, 1.0, 0),
            // (2,3): dropped by a -1
            edge_rec(2, 3, 1, 0, 5.0, -1),
            edge_rec(3, 2, 0, 1, 5.0, 0),
            // (4,5): undecided, distinct clusters, stays live
            edge_rec(4, 5, 1, 0, 3.0, 0),
            edge_rec(5, 4, 9, 0, 3.0, 0),
        };
        std::vector<WeightedEdge> sink;
        RebuildStats stats;
        std::vector<DeletedEdge> deleted;
        RecordSequence out = resolve_and_rebuild(rt, seq_of(rt, in), sink, stats, &deleted);

        REQUIRE(sink.size() == 2);
        CHECK(sink[0].u == 1);
        CHECK(sink[0].v == 2);
        CHECK(sink[0].w == 2.0);
        CHECK(sink[1].u == 1);
        CHECK(sink[1].v == 3);
        CHECK(sink[1].w == 4.0);

        REQUIRE(deleted.size() == 2);
        CHECK(deleted[0].u == 1);
        CHECK(deleted[0].v == 4);
        CHECK(deleted[0].same_cluster_purge);
        CHECK(deleted[1].u == 2);
        CHECK(deleted[1].v == 3);
        CHECK_FALSE(deleted[1].same_cluster_purge);

        CHECK(stats.emitted == 2);
        CHECK(stats.deleted_edges == 2);
        CHECK(stats.dead_vertices == 1);
        CHECK(stats.live_vertices == 4);
        CHECK(stats.live_edge_occurrences == 2);

        const auto recs = out.materialize();
        REQUIRE(recs.size() == 6);
        CHECK(find_vertex(recs, 1) != nullptr);
        CHECK(find_vertex(recs, 3) == nullptr);
        // surviving pair carries exchanged centers
        const StreamRecord* a = find_edge(recs, 4, 5);
        const StreamRecord* b = find_edge(recs, 5, 4);
        REQUIRE(a != nullptr);
        REQUIRE(b != nullptr);
        CHECK(a->other_center == 9);
        CHECK(b->other_center == 1);
    }

    TEST_CASE("an undecided edge owned by a dead vertex is corruption") {
        Runtime rt;
        std::vector<StreamRecord> in = {
            edge_rec(1, 2, 0, 0, 1.0, 0),
            edge_rec(2, 1, 5, 0, 1.0, 0),
        };
        std::vector<WeightedEdge> sink;
        RebuildStats stats;
        CHECK_THROWS_AS(resolve_and_rebuild(rt, seq_of(rt, in), sink, stats),
                        StreamCorruptionError);
    }

    TEST_CASE("trailing unpaired occurrence is corruption") {
        Runtime rt;
        std::vector<WeightedEdge> sink;
        RebuildStats stats;
        CHECK_THROWS_AS(
            resolve_and_rebuild(rt, seq_of(rt, {edge_rec(1, 2, 1, 2, 1.0)}), sink, stats),
            StreamCorruptionError);
    }
}

TEST_SUITE("full runs") {
    TEST_CASE("one level emits every distinct edge") {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            EdgeStream g = gen_gnp(50, 0.2, seed, WeightRange{1.0, 10.0});
            RunResult r = run(1, seed, g);
            CHECK(testsup::canonical_sorted(r.spanner) == testsup::canonical_sorted(g.edges));
        }
    }

    TEST_CASE("pass accounting is exactly ten per iteration plus ingest") {
        for (unsigned k : {1u, 2u, 3u, 4u}) {
            EdgeStream g = gen_gnp(40, 0.2, 11 + k);
            RunResult r = run(k, 5, g);
            CHECK(r.accounting.stream_passes == 5 * k + 1);
            CHECK(r.accounting.sort_passes == 5 * k);
            CHECK(r.accounting.total_passes() == 10 * k + 1);
            CHECK(r.accounting.total_passes() <= std::uint64_t(kPassBound) * k);
            CHECK(r.accounting.max_state_records <= kDefaultStateBudget);
        }
    }

    TEST_CASE("stretch holds on random weighted graphs") {
        for (unsigned k : {2u, 3u}) {
            for (std::uint64_t seed : {10ull, 11ull, 12ull, 13ull}) {
                EdgeStream g = gen_gnp(60, 0.25, seed, WeightRange{1.0, 100.0});
                RunResult r = run(k, seed * 31 + 1, g);
                auto report = verify::check_stretch(g.n, g.edges, r.spanner, 2 * k - 1);
                INFO(report.detail);
                CHECK(report.ok);
                // no edge may be emitted twice
                auto canon = testsup::edge_pairs(r.spanner);
                CHECK(canon.size() == r.spanner.size());
            }
        }
    }

    TEST_CASE("stretch cross-checked against the independent oracle") {
        EdgeStream g = gen_gnp(40, 0.25, 77, WeightRange{1.0, 50.0});
        RunResult r = run(2, 99, g);
        CHECK(testsup::oracle_stretch_ok(g.n, g.edges, r.spanner, 3));
    }

    TEST_CASE("deterministic for a fixed seed") {
        EdgeStream g = gen_gnp(45, 0.2, 5, WeightRange{1.0, 9.0});
        RunResult a = run(3, 1234, g);
        RunResult b = run(3, 1234, g);
        CHECK(a.spanner == b.spanner);
        RunResult c = run(3, 1235, g);
        // a different seed changes the sampling but never the pass structure
        CHECK(c.accounting.total_passes() == a.accounting.total_passes());
    }

    TEST_CASE("file-backed streams match memory and clean up") {
        TempDir dir;
        EdgeStream g = gen_gnp(40, 0.25, 21, WeightRange{1.0, 20.0});
        RunResult mem = run(2, 7, g);
        {
            RunOptions opts;
            opts.storage = Storage::file;
            opts.tmpdir = dir.path;
            RunResult file = run(2, 7, g, opts);
            CHECK(file.spanner == mem.spanner);
            CHECK(file.accounting.total_passes() == mem.accounting.total_passes());
        }
        CHECK(dir.entries() == 0);
    }

    TEST_CASE("snapshots expose the per-iteration state") {
        EdgeStream g = gen_gnp(40, 0.25, 31, WeightRange{1.0, 20.0});
        RunOptions opts;
        opts.capture_snapshots = true;
        opts.check_passes = true;
        const unsigned k = 3;
        RunResult r = run(k, 17, g, opts);

        REQUIRE(r.snapshots.size() == k + 1);
        CHECK(r.snapshots[0].iteration == 1);
        CHECK(r.snapshots[0].live.size() == g.n + 2 * g.edges.size());
        CHECK(r.snapshots[0].spanner_prefix == 0);
        CHECK(r.snapshots.back().iteration == k + 1);
        CHECK(r.snapshots.back().live.empty());
        CHECK(r.snapshots.back().spanner_prefix == r.spanner.size());

        // every input edge is either emitted or logged as deleted, exactly once
        std::size_t deleted = 0;
        for (const auto& snap : r.snapshots) deleted += snap.deleted.size();
        CHECK(deleted + r.spanner.size() == g.edges.size());

        CHECK(verify::check_center_paths(r).empty());
        CHECK(verify::check_deletion_witnesses(r).empty());
        CHECK(verify::check_pass_budget(r).empty());
    }

    TEST_CASE("duplicate input edges are rejected as corruption") {
        EdgeStream g = testsup::make_stream(3, {{1, 2, 1.0}, {1, 2, 1.0}, {2, 3, 2.0}});
        CHECK_THROWS_AS(run(2, 1, g), StreamCorruptionError);
    }

    TEST_CASE("degenerate inputs") {
        CHECK_THROWS_AS(run(0, 1, testsup::make_stream(2, {{1, 2, 1.0}})),
                        std::invalid_argument);

        RunResult single = run(2, 3, testsup::make_stream(1, {}));
        CHECK(single.spanner.empty());
        CHECK(single.accounting.total_passes() == 21);

        RunResult empty_edges = run(3, 3, testsup::make_stream(5, {}));
        CHECK(empty_edges.spanner.empty());
    }

    TEST_CASE("deep levels on a small graph still drain the stream") {
        EdgeStream g = gen_gnp(12, 0.5, 8, WeightRange{1.0, 4.0});
        RunResult r = run(5, 13, g);
        auto report = verify::check_stretch(g.n, g.edges, r.spanner, 9);
        CHECK(report.ok);
        CHECK(r.accounting.total_passes() == 51);
    }
}
