#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "streamspan/errors.hpp"
#include "streamspan/graph_io.hpp"
#include "streamspan/incremental.hpp"
#include "streamspan/streamsort_spanner.hpp"
#include "streamspan/verifier.hpp"

namespace ss = streamspan;

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// key=value lines; written to `path` when given, else to `fallback`.
class Report {
public:
    void add(std::string key, std::string value) {
        lines_.push_back(std::move(key) + "=" + std::move(value));
    }
    void add(std::string key, std::uint64_t value) { add(std::move(key), std::to_string(value)); }
    void add(std::string key, double value) { add(std::move(key), fmt(value)); }

    void emit(const std::string& path, std::ostream& fallback) const {
        if (path.empty()) {
            for (const auto& l : lines_) fallback << l << '\n';
            return;
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open report file " + path);
        for (const auto& l : lines_) out << l << '\n';
    }

private:
    std::vector<std::string> lines_;
};

std::uint32_t parse_u32(const std::string& s, const char* what) {
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument(std::string(what) + ": not a valid count: " + s);
    return v;
}

double parse_f64(const std::string& s, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument(std::string(what) + ": not a valid number: " + s);
    return v;
}

ss::WeightRange parse_weight_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw std::invalid_argument("--weights expects LO:HI");
    return {parse_f64(s.substr(0, colon), "--weights"), parse_f64(s.substr(colon + 1), "--weights")};
}

struct GenArgs {
    std::vector<std::string> gnp;
    std::vector<std::string> grid;
    std::uint32_t complete_n = 0;
    std::uint64_t seed = 1;
    std::string weights;
    std::string out = "-";
};

int run_gen(const GenArgs& a, bool has_gnp, bool has_complete, bool has_grid) {
    std::optional<ss::WeightRange> weights;
    if (!a.weights.empty()) weights = parse_weight_range(a.weights);

    ss::EdgeStream stream;
    if (has_gnp) {
        stream = ss::gen_gnp(parse_u32(a.gnp[0], "--gnp"), parse_f64(a.gnp[1], "--gnp"), a.seed,
                             weights);
    } else if (has_complete) {
        stream = ss::gen_complete(a.complete_n, a.seed, weights);
    } else if (has_grid) {
        stream = ss::gen_grid(parse_u32(a.grid[0], "--grid"), parse_u32(a.grid[1], "--grid"),
                              a.seed, weights);
    }
    ss::write_edge_stream_file(stream, a.out);
    return 0;
}

struct BuildArgs {
    std::string model = "single-pass";
    unsigned k = 2;
    std::uint64_t seed = 1;
    std::string in = "-";
    std::string out = "-";
    std::string report_path;
    std::string tmpdir;
    bool check = false;
    bool presort = false;
    bool stream_files = false;
};

int run_build(const BuildArgs& a) {
    const ss::EdgeStream input = ss::read_edge_stream_file(a.in);

    Report rep;
    rep.add("model", a.model);
    rep.add("n", static_cast<std::uint64_t>(input.n));
    rep.add("m", static_cast<std::uint64_t>(input.edges.size()));
    rep.add("weighted", static_cast<std::uint64_t>(input.weighted ? 1 : 0));
    rep.add("self_loops_dropped", input.self_loops_dropped);
    rep.add("k", static_cast<std::uint64_t>(a.k));
    rep.add("stretch", static_cast<std::uint64_t>(ss::stretch_for(a.k)));
    rep.add("seed", a.seed);

    std::vector<ss::WeightedEdge> spanner;
    std::string violation;

    if (a.model == "streamsort") {
        ss::streamsort::RunOptions opts;
        opts.storage =
            a.stream_files ? ss::streamsort::Storage::file : ss::streamsort::Storage::memory;
        opts.tmpdir = a.tmpdir;
        opts.capture_snapshots = a.check;
        opts.check_passes = a.check;
        const auto result = ss::streamsort::run(a.k, a.seed, input, opts);
        spanner = result.spanner;

        std::uint64_t deleted = 0, dead = 0;
        for (const auto& it : result.iterations) {
            deleted += it.rebuild.deleted_edges;
            dead += it.rebuild.dead_vertices;
        }
        rep.add("stream_passes", result.accounting.stream_passes);
        rep.add("sort_passes", result.accounting.sort_passes);
        rep.add("total_passes", result.accounting.total_passes());
        rep.add("pass_bound", static_cast<std::uint64_t>(ss::streamsort::kPassBound) * a.k);
        rep.add("max_state_records",
                static_cast<std::uint64_t>(result.accounting.max_state_records));
        rep.add("state_budget", static_cast<std::uint64_t>(ss::streamsort::kDefaultStateBudget));
        rep.add("deleted_edges", deleted);
        rep.add("dead_vertices", dead);

        if (a.check) {
            violation = ss::verify::check_pass_budget(result);
            if (violation.empty()) violation = ss::verify::check_center_paths(result);
            if (violation.empty()) violation = ss::verify::check_deletion_witnesses(result);
        }
    } else if (a.model == "single-pass" || a.model == "sorted-weighted") {
        ss::SamplingHierarchy h(input.n, a.k, a.seed);
        const ss::CheckMode mode = a.check ? ss::CheckMode::on : ss::CheckMode::off;
        ss::SpannerState state = [&] {
            if (a.model == "single-pass") return ss::build_spanner(std::move(h), input, mode);
            ss::EdgeStream feed = a.presort ? ss::sort_by_weight(input) : input;
            return ss::build_from_sorted_weighted_stream(std::move(h), feed, mode);
        }();
        spanner = state.spanner_edges();

        const auto& c = state.counters();
        rep.add("hook_edges", state.hook_edge_count());
        rep.add("buffered", c.buffered);
        rep.add("prune_calls", c.prune_calls);
        rep.add("prune_scans", c.prune_scans);
        rep.add("promotions", c.promotions);
        rep.add("discards", c.discards);
        rep.add("rises", c.rises);

        if (a.check) {
            violation = ss::verify::check_invariants(state);
            if (violation.empty()) violation = ss::verify::check_cluster_radius(state);
            if (violation.empty()) violation = ss::verify::check_work_counters(c);
        }
    } else {
        throw std::invalid_argument("unknown model " + a.model);
    }

    rep.add("spanner_edges", static_cast<std::uint64_t>(spanner.size()));
    if (a.check) rep.add("check", violation.empty() ? "ok" : violation);

    ss::EdgeStream out;
    out.n = input.n;
    out.weighted = input.weighted;
    out.edges = std::move(spanner);
    ss::write_edge_stream_file(out, a.out);

    rep.emit(a.report_path, std::cerr);
    if (!violation.empty()) {
        std::cerr << "check failed: " << violation << '\n';
        return 1;
    }
    return 0;
}

struct VerifyArgs {
    std::string graph;
    std::string spanner;
    double stretch = 0.0;
    unsigned k = 0;
    std::uint32_t max_n = 3000;
    std::string batch;
    std::string report_path;
};

bool verify_one(const std::string& graph_path, const std::string& spanner_path, double stretch,
                std::uint32_t max_n, Report& rep) {
    const ss::EdgeStream g = ss::read_edge_stream_file(graph_path);
    const ss::EdgeStream s = ss::read_edge_stream_file(spanner_path);

    rep.add("graph", graph_path);
    rep.add("spanner", spanner_path);
    rep.add("stretch", stretch);
    if (s.n != g.n) {
        rep.add("ok", static_cast<std::uint64_t>(0));
        rep.add("detail", "vertex counts differ: " + std::to_string(g.n) + " vs " +
                              std::to_string(s.n));
        return false;
    }

    ss::verify::VerifyLimits limits;
    limits.max_vertices = max_n;
    const auto result = ss::verify::check_stretch(g.n, g.edges, s.edges, stretch, limits);
    rep.add("edges_checked", static_cast<std::uint64_t>(result.edges_checked));
    rep.add("spanner_edges", static_cast<std::uint64_t>(s.edges.size()));
    rep.add("max_ratio", result.max_ratio);
    rep.add("ok", static_cast<std::uint64_t>(result.ok ? 1 : 0));
    if (!result.ok) rep.add("detail", result.detail);
    return result.ok;
}

int run_verify(const VerifyArgs& a) {
    Report rep;
    bool all_ok = true;

    if (!a.batch.empty()) {
        std::ifstream in(a.batch);
        if (!in) throw std::runtime_error("cannot open batch manifest " + a.batch);
        std::string line;
        std::uint64_t lineno = 0, cases = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream fields(line);
            std::string graph, spanner;
            double stretch = 0.0;
            if (!(fields >> graph >> spanner >> stretch))
                throw ss::ParseError("batch line needs: graph spanner stretch", lineno);
            rep.add("case", ++cases);
            all_ok = verify_one(graph, spanner, stretch, a.max_n, rep) && all_ok;
        }
    } else {
        if (a.graph.empty() || a.spanner.empty())
            throw std::invalid_argument("verify needs --graph and --spanner (or --batch)");
        double stretch = a.stretch;
        if (a.k > 0) stretch = static_cast<double>(ss::stretch_for(a.k));
        if (stretch <= 0.0)
            throw std::invalid_argument("verify needs --stretch or -k");
        all_ok = verify_one(a.graph, a.spanner, stretch, a.max_n, rep);
    }

    rep.emit(a.report_path, std::cout);
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized multiplicative spanners over streamed graphs"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a graph stream");
    auto* shape = gen_cmd->add_option_group("shape", "exactly one graph family");
    auto* opt_gnp = shape->add_option("--gnp", gen.gnp, "Erdos-Renyi G(N, P)")
                        ->expected(2)
                        ->type_name("N P");
    auto* opt_complete =
        shape->add_option("--complete", gen.complete_n, "complete graph on N vertices")
            ->type_name("N");
    auto* opt_grid =
        shape->add_option("--grid", gen.grid, "R x C lattice")->expected(2)->type_name("R C");
    shape->require_option(1);
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--weights", gen.weights, "uniform weights in LO:HI")->type_name("LO:HI");
    gen_cmd->add_option("-o,--output", gen.out, "output path, - for stdout");

    BuildArgs build;
    CLI::App* build_cmd = app.add_subcommand("build", "build a spanner from a stream");
    build_cmd
        ->add_option("--model", build.model,
                     "single-pass | sorted-weighted | streamsort (default single-pass)")
        ->check(CLI::IsMember({"single-pass", "sorted-weighted", "streamsort"}));
    build_cmd->add_option("-k,--levels", build.k, "clustering levels; stretch is 2k-1")
        ->required()
        ->check(CLI::Range(1u, 64u));
    build_cmd->add_option("--seed", build.seed, "sampling seed");
    build_cmd->add_option("-i,--input", build.in, "input stream, - for stdin");
    build_cmd->add_option("-o,--output", build.out, "spanner output, - for stdout");
    build_cmd->add_option("--report", build.report_path, "write key=value report here");
    build_cmd->add_flag("--check-invariants", build.check,
                        "run internal invariant checks; nonzero exit on violation");
    build_cmd->add_flag("--presort", build.presort,
                        "sorted-weighted only: sort the input by weight first");
    build_cmd->add_flag("--stream-files", build.stream_files,
                        "streamsort only: keep working streams in files");
    build_cmd->add_option("--tmpdir", build.tmpdir,
                          "directory for --stream-files (default STREAMSPAN_TMPDIR or system)");

    VerifyArgs verify;
    CLI::App* verify_cmd = app.add_subcommand("verify", "check a spanner against its graph");
    verify_cmd->add_option("--graph", verify.graph, "graph stream file");
    verify_cmd->add_option("--spanner", verify.spanner, "spanner stream file");
    verify_cmd->add_option("-t,--stretch", verify.stretch, "stretch bound to enforce");
    verify_cmd->add_option("-k,--levels", verify.k, "enforce stretch 2k-1");
    verify_cmd->add_option("--max-n", verify.max_n, "guard for the exact-distance check");
    verify_cmd->add_option("--batch", verify.batch,
                           "manifest of lines: graph spanner stretch");
    verify_cmd->add_option("--report", verify.report_path, "write key=value report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(gen_cmd))
            return run_gen(gen, opt_gnp->count() > 0, opt_complete->count() > 0,
                           opt_grid->count() > 0);
        if (app.got_subcommand(build_cmd)) return run_build(build);
        return run_verify(verify);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
}
