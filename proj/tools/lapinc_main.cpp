#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <lapinc/bench.hpp>
#include <lapinc/dynamic_state.hpp>
#include <lapinc/generators.hpp>
#include <lapinc/graph.hpp>
#include <lapinc/laplacian.hpp>
#include <lapinc/matrix_io.hpp>
#include <lapinc/solve.hpp>

namespace {

using namespace lapinc;

Graph<double> readGraphFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parseEdgeList(in);
}

void writeMatrixFile(const std::string& path, const DenseMatrix<double>& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    writeSymMatrix(out, m);
}

struct SolveOptions {
    std::string input;
    std::string output;
    std::string method = "dense";
    Index baseSize = 64;
    bool check = false;
    bool perComponent = false;
    std::string partitionReport;
};

int runSolve(const SolveOptions& opt) {
    const auto g = readGraphFile(opt.input);
    if (!opt.perComponent && connectedComponents(g).count() > 1)
        throw std::domain_error("graph is disconnected; pass --per-component to solve each part");

    DynamicState<double> state = [&] {
        if (opt.method == "dense") return DynamicState<double>(g);
        SolveConfig cfg;
        cfg.baseSize = opt.baseSize;
        return solve(g, cfg);
    }();

    if (!opt.partitionReport.empty()) {
        const auto labeling = connectedComponents(g);
        std::vector<NodeId> largest;
        for (NodeId v = 0; v < g.numNodes(); ++v)
            if (labeling.component[static_cast<std::size_t>(v)] == labeling.gcc)
                largest.push_back(v);
        std::string json;
        try {
            json = partitionReportJson(richClubSplit(inducedSubgraph(g, largest)));
        } catch (const HeuristicFailure& e) {
            nlohmann::json failed;
            failed["heuristic_failed"] = true;
            failed["reason"] = e.what();
            json = failed.dump(2);
        }
        std::ofstream report(opt.partitionReport);
        if (!report) throw std::runtime_error("cannot open " + opt.partitionReport);
        report << json << '\n';
    }

    writeMatrixFile(opt.output, state.fullPinv());
    std::cout << "solved " << g.numNodes() << " nodes, " << g.numEdges() << " edges ("
              << state.componentCount() << " component"
              << (state.componentCount() == 1 ? "" : "s") << ", method " << opt.method << ")\n";

    if (opt.check) {
        const double residual = moorePenroseResiduals(laplacian(g), state.fullPinv()).max();
        std::cout << "max moore-penrose residual = " << residual << '\n';
        if (!(residual <= tol::kMoorePenrose)) {
            std::cerr << "verification failed: residual above " << tol::kMoorePenrose << '\n';
            return 2;
        }
    }
    return 0;
}

struct EvolveOptions {
    std::string events;
    std::string initial;
    Index snapshotEvery = 0;
    std::string snapshotPrefix = "snapshot";
    bool verifyFinal = false;
    std::string out;
};

int runEvolve(const EvolveOptions& opt) {
    std::ifstream in(opt.events);
    if (!in) throw std::runtime_error("cannot open " + opt.events);
    std::vector<Index> sourceLines;
    const auto events = parseEventLog(in, &sourceLines);

    DynamicState<double> state;
    if (!opt.initial.empty()) state = DynamicState<double>(readGraphFile(opt.initial));

    Index componentsBefore = state.componentCount();
    for (std::size_t k = 0; k < events.size(); ++k) {
        try {
            state.apply(events[k]);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "event at line " << sourceLines[k] << " failed: " << e.what();
            throw std::runtime_error(msg.str());
        }
        // a fresh node is trivially its own component; only deletions split
        const bool deletion =
            events[k].kind == EventKind::deleteEdge || events[k].kind == EventKind::deleteNode;
        if (deletion && state.componentCount() > componentsBefore)
            std::cout << "line " << sourceLines[k] << ": component split ("
                      << state.componentCount() << " components, one matrix each)\n";
        componentsBefore = state.componentCount();
        if (opt.snapshotEvery > 0 && (k + 1) % static_cast<std::size_t>(opt.snapshotEvery) == 0)
            writeMatrixFile(opt.snapshotPrefix + std::to_string(k + 1) + ".txt", state.fullPinv());
    }

    std::cout << "replayed " << events.size() << " events: " << state.graph().numNodes()
              << " nodes, " << state.graph().numEdges() << " edges, " << state.componentCount()
              << " component" << (state.componentCount() == 1 ? "" : "s") << '\n';
    if (!opt.out.empty()) writeMatrixFile(opt.out, state.fullPinv());

    if (opt.verifyFinal) {
        const DynamicState<double> fresh(state.graph());
        const double drift = (state.fullPinv() - fresh.fullPinv()).cwiseAbs().maxCoeff();
        std::cout << "final drift = " << drift << '\n';
        if (!(drift <= tol::kVerifyDrift)) {
            std::cerr << "verification failed: drift above " << tol::kVerifyDrift << '\n';
            return 2;
        }
    }
    return 0;
}

struct StatsOptions {
    std::string input;
    Index top = 5;
    std::string omegaCsv;
};

int runStats(const StatsOptions& opt) {
    const auto g = readGraphFile(opt.input);
    const auto p = pinvBaseline(laplacian(g));
    std::cout.precision(12);
    std::cout << "nodes = " << g.numNodes() << ", edges = " << g.numEdges()
              << ", volume = " << g.volume() << '\n';
    std::cout << "kirchhoff index = " << kirchhoffIndex(p) << '\n';

    const auto centrality = topologicalCentrality(p);
    std::vector<NodeId> byRank(static_cast<std::size_t>(g.numNodes()));
    std::iota(byRank.begin(), byRank.end(), NodeId(0));
    std::stable_sort(byRank.begin(), byRank.end(),
                     [&](NodeId a, NodeId b) { return centrality(a) > centrality(b); });
    const Index shown = std::min<Index>(opt.top, g.numNodes());
    for (Index r = 0; r < shown; ++r) {
        const NodeId v = byRank[static_cast<std::size_t>(r)];
        std::cout << "rank " << r + 1 << ": node " << v << " (label " << g.label(v)
                  << ") centrality = " << centrality(v) << '\n';
    }

    if (!opt.omegaCsv.empty()) {
        std::ofstream csv(opt.omegaCsv);
        if (!csv) throw std::runtime_error("cannot open " + opt.omegaCsv);
        csv.precision(std::numeric_limits<double>::max_digits10);
        csv << "x,y,omega\n";
        const auto omega = resistanceMatrix(p);
        for (NodeId x = 0; x < g.numNodes(); ++x)
            for (NodeId y = x + 1; y < g.numNodes(); ++y)
                csv << x << ',' << y << ',' << omega(x, y) << '\n';
    }
    return 0;
}

struct BenchOptions {
    std::string suite = "dac-vs-dense";
    std::vector<Index> ns;
    std::vector<double> rhos;
    std::vector<std::uint64_t> seeds;
    Index baseSize = 64;
    std::string csv;
    bool parallelCells = false;
};

int runBench(const BenchOptions& opt) {
    auto ns = opt.ns;
    auto rhos = opt.rhos;
    auto seeds = opt.seeds;
    if (seeds.empty()) seeds = {1};
    if (rhos.empty()) rhos = {0.05};

    std::vector<BenchRecord> records;
    // one closure per cell so --parallel-cells can fan the grid out
    std::vector<std::function<std::vector<BenchRecord>()>> cells;
    if (opt.suite == "update-scaling") {
        if (ns.empty()) ns = {500, 1000};
        for (const Index n : ns)
            for (const auto seed : seeds)
                cells.push_back([=] { return runUpdateScaling({n}, rhos.front(), {seed}); });
    } else if (opt.suite == "dac-vs-dense") {
        if (ns.empty()) ns = {100, 200};
        for (const Index n : ns)
            for (const auto seed : seeds)
                cells.push_back([=, base = opt.baseSize] {
                    return runDacVsDense({n}, rhos.front(), {seed}, base);
                });
    } else if (opt.suite == "er-grid") {
        if (ns.empty()) ns = {50, 100};
        if (opt.rhos.empty()) rhos = {0.02, 0.1};
        for (const Index n : ns)
            for (const double rho : rhos)
                for (const auto seed : seeds)
                    cells.push_back([=, base = opt.baseSize] {
                        return runErGrid({n}, {rho}, {seed}, base);
                    });
    } else {
        throw std::invalid_argument("unknown suite: " + opt.suite);
    }

    if (opt.parallelCells) {
        std::vector<std::future<std::vector<BenchRecord>>> futures;
        futures.reserve(cells.size());
        for (auto& cell : cells) futures.push_back(std::async(std::launch::async, cell));
        for (auto& f : futures)
            for (auto r : f.get()) {
                r.note = r.note.empty() ? "parallel-cells" : r.note + "; parallel-cells";
                records.push_back(std::move(r));
            }
    } else {
        for (auto& cell : cells)
            for (auto& r : cell()) records.push_back(std::move(r));
    }

    if (opt.csv.empty()) {
        std::cout << kCsvHeader << '\n';
        writeCsvRows(std::cout, records);
    } else {
        appendCsv(opt.csv, records);
        std::cout << "wrote " << records.size() << " rows to " << opt.csv << '\n';
    }
    return 0;
}

struct GenOptions {
    std::string kind = "er";
    Index n = 100;
    double rho = 0.05;
    Index kappa = 2;
    std::uint64_t seed = 0;
    std::string out;
    std::string eventsOut;
    bool connected = false;
};

int runGen(const GenOptions& opt) {
    const GenSpec spec{parseGenKind(opt.kind), opt.n, opt.rho, opt.kappa, opt.seed};
    Graph<double> g(0);
    std::vector<Event> events;
    if (spec.kind == GenKind::er) {
        if (!opt.eventsOut.empty())
            throw std::invalid_argument("event logs are only produced by the pa generator");
        g = erGraph(spec, opt.connected);
    } else {
        auto grown = paGraph(spec);
        g = std::move(grown.graph);
        events = std::move(grown.events);
    }

    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot open " + opt.out);
    writeEdgeList(out, g, metadataComments(spec));
    if (!opt.eventsOut.empty()) {
        std::ofstream eventsOut(opt.eventsOut);
        if (!eventsOut) throw std::runtime_error("cannot open " + opt.eventsOut);
        writeEventLog(eventsOut, events, metadataComments(spec));
    }
    std::cout << "generated " << kindName(spec.kind) << " graph: " << g.numNodes()
              << " nodes, " << g.numEdges() << " edges\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplacian pseudo-inverse toolkit: solve, replay, inspect, benchmark, generate"};
    app.require_subcommand(1);

    SolveOptions so;
    auto* solveCmd = app.add_subcommand("solve", "compute L+ of an edge list into matrix text");
    solveCmd->add_option("input", so.input, "edge list file")->required();
    solveCmd->add_option("output", so.output, "matrix text output")->required();
    solveCmd->add_option("--method", so.method, "dense or dac")
        ->check(CLI::IsMember({"dense", "dac"}))
        ->envname("LAPINC_SOLVE_METHOD");
    solveCmd->add_option("--base-size", so.baseSize, "dense cutoff for dac")
        ->envname("LAPINC_SOLVE_BASE_SIZE");
    solveCmd->add_flag("--check", so.check, "verify the four pseudo-inverse conditions")
        ->envname("LAPINC_SOLVE_CHECK");
    solveCmd->add_flag("--per-component", so.perComponent, "accept disconnected input")
        ->envname("LAPINC_SOLVE_PER_COMPONENT");
    solveCmd->add_option("--partition-report", so.partitionReport,
                         "write the split statistics of the largest component as json")
        ->envname("LAPINC_SOLVE_PARTITION_REPORT");

    EvolveOptions eo;
    auto* evolveCmd = app.add_subcommand("evolve", "replay an event log, maintaining L+ incrementally");
    evolveCmd->add_option("events", eo.events, "event log file")->required();
    evolveCmd->add_option("--initial", eo.initial, "edge list to start from (default: empty graph)")
        ->envname("LAPINC_EVOLVE_INITIAL");
    evolveCmd->add_option("--snapshot-every", eo.snapshotEvery, "write the matrix every K events")
        ->envname("LAPINC_EVOLVE_SNAPSHOT_EVERY");
    evolveCmd->add_option("--snapshot-prefix", eo.snapshotPrefix, "snapshot file prefix")
        ->envname("LAPINC_EVOLVE_SNAPSHOT_PREFIX");
    evolveCmd->add_flag("--verify-final", eo.verifyFinal, "compare against a fresh dense solve")
        ->envname("LAPINC_EVOLVE_VERIFY_FINAL");
    evolveCmd->add_option("--out", eo.out, "write the final matrix here")
        ->envname("LAPINC_EVOLVE_OUT");

    StatsOptions to;
    auto* statsCmd = app.add_subcommand("stats", "resistance-based summary of a connected graph");
    statsCmd->add_option("input", to.input, "edge list file")->required();
    statsCmd->add_option("--top", to.top, "how many nodes to rank by centrality")
        ->envname("LAPINC_STATS_TOP");
    statsCmd->add_option("--omega-csv", to.omegaCsv, "dump all pairwise resistances as csv")
        ->envname("LAPINC_STATS_OMEGA_CSV");

    BenchOptions bo;
    auto* benchCmd = app.add_subcommand("bench", "timing suites, csv output");
    benchCmd->add_option("--suite", bo.suite, "update-scaling, dac-vs-dense, or er-grid")
        ->check(CLI::IsMember({"update-scaling", "dac-vs-dense", "er-grid"}))
        ->envname("LAPINC_BENCH_SUITE");
    benchCmd->add_option("--n", bo.ns, "orders to sweep")->delimiter(',')->envname("LAPINC_BENCH_N");
    benchCmd->add_option("--rho", bo.rhos, "edge probabilities")
        ->delimiter(',')
        ->envname("LAPINC_BENCH_RHO");
    benchCmd->add_option("--seeds", bo.seeds, "seeds per cell")
        ->delimiter(',')
        ->envname("LAPINC_BENCH_SEEDS");
    benchCmd->add_option("--base-size", bo.baseSize, "dense cutoff for dac cells")
        ->envname("LAPINC_BENCH_BASE_SIZE");
    benchCmd->add_option("--csv", bo.csv, "append rows here instead of stdout")
        ->envname("LAPINC_BENCH_CSV");
    benchCmd
        ->add_flag("--parallel-cells", bo.parallelCells,
                   "run cells concurrently; per-cell timings lose comparability")
        ->envname("LAPINC_BENCH_PARALLEL_CELLS");

    GenOptions go;
    auto* genCmd = app.add_subcommand("gen", "write a generated graph (and optional event log)");
    genCmd->add_option("--kind", go.kind, "er or pa")->envname("LAPINC_GEN_KIND");
    genCmd->add_option("--n", go.n, "target order")->envname("LAPINC_GEN_N");
    genCmd->add_option("--rho", go.rho, "er edge probability")->envname("LAPINC_GEN_RHO");
    genCmd->add_option("--kappa", go.kappa, "pa edges per arrival")->envname("LAPINC_GEN_KAPPA");
    genCmd->add_option("--seed", go.seed, "rng seed")->envname("LAPINC_GEN_SEED");
    genCmd->add_option("--out", go.out, "edge list output")->required();
    genCmd->add_option("--events-out", go.eventsOut, "event log output (pa only)")
        ->envname("LAPINC_GEN_EVENTS_OUT");
    genCmd->add_flag("--connected", go.connected, "er: retry seeds until connected")
        ->envname("LAPINC_GEN_CONNECTED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // --help exits cleanly; every misuse is a usage error
    }

    try {
        if (*solveCmd) return runSolve(so);
        if (*evolveCmd) return runEvolve(eo);
        if (*statsCmd) return runStats(to);
        if (*benchCmd) return runBench(bo);
        return runGen(go);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
