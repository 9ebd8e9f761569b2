#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <lapinc/generators.hpp>
#include <lapinc/laplacian.hpp>
#include <lapinc/solve.hpp>
#include <lapinc/update.hpp>

namespace lapinc {

struct BenchRecord {
    std::string method; // baseline | incremental | dac
    Index n = 0;
    double param = 0.0; // rho or kappa, depending on the generator
    std::uint64_t seed = 0;
    double wallTime = std::numeric_limits<double>::quiet_NaN(); // seconds
    double maxErr = std::numeric_limits<double>::quiet_NaN();   // vs the baseline cell, when one exists
    std::string note;
};

inline constexpr const char* kCsvHeader = "method,n,param,seed,wall_time,max_err,note";

/**
 * Median wall time of `repeats` timed runs, each executing f() `inner` times.
 * The inner loop keeps sub-millisecond operations above clock resolution;
 * callers keep results alive through side effects so the work is not elided.
 */
template <typename F>
double medianSeconds(F&& f, int repeats = 5, int inner = 1) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        for (int k = 0; k < inner; ++k) f();
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        times.push_back(elapsed.count() / inner);
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

namespace detail {

inline void writeCsvValue(std::ostream& out, double v) {
    if (std::isnan(v)) {
        out << "nan";
    } else {
        const auto old = out.precision(12);
        out << v;
        out.precision(old);
    }
}

inline std::string sanitizeNote(std::string note) {
    for (char& c : note)
        if (c == ',' || c == '\n') c = ';';
    return note;
}

} // namespace detail

inline void writeCsvRows(std::ostream& out, const std::vector<BenchRecord>& records) {
    for (const auto& r : records) {
        out << r.method << ',' << r.n << ',';
        detail::writeCsvValue(out, r.param);
        out << ',' << r.seed << ',';
        detail::writeCsvValue(out, r.wallTime);
        out << ',';
        detail::writeCsvValue(out, r.maxErr);
        out << ',' << detail::sanitizeNote(r.note) << '\n';
    }
}

/** Appends rows to path, writing the header only when the file starts empty. */
inline void appendCsv(const std::string& path, const std::vector<BenchRecord>& records) {
    bool needHeader = true;
    {
        std::ifstream probe(path);
        std::string first;
        if (probe && std::getline(probe, first) && !first.empty()) needHeader = false;
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open csv for append: " + path);
    if (needHeader) out << kCsvHeader << '\n';
    writeCsvRows(out, records);
}

/**
 * Single-edge update cost against a full dense recompute, across orders.
 * Each instance yields a baseline row (one pinv solve) and an incremental row
 * (one edge fired into the solved matrix, with its error vs a dense recompute
 * of the mutated graph).
 */
inline std::vector<BenchRecord> runUpdateScaling(const std::vector<Index>& ns, double rho,
                                                 const std::vector<std::uint64_t>& seeds) {
    std::vector<BenchRecord> out;
    for (const Index n : ns) {
        for (const std::uint64_t seed : seeds) {
            const GenSpec spec{GenKind::er, n, rho, 1, seed};
            BenchRecord base{"baseline", n, rho, seed};
            BenchRecord inc{"incremental", n, rho, seed};
            try {
                const auto g = erGraph(spec, true);
                const auto L = laplacian(g);
                DenseMatrix<double> P;
                base.wallTime = medianSeconds([&] { P = pinvBaseline(L); });

                std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
                NodeId i, j;
                do {
                    i = uniformIndex(rng, n);
                    j = uniformIndex(rng, n);
                } while (i == j || g.hasEdge(i, j));
                DenseMatrix<double> fired;
                inc.wallTime = medianSeconds([&] { fired = fireEdge(P, i, j, 1.0); }, 5, 4);

                auto mutated = g;
                mutated.addEdge(i, j);
                inc.maxErr = (fired - pinvBaseline(laplacian(mutated))).cwiseAbs().maxCoeff();
            } catch (const std::exception& e) {
                base.note = inc.note = e.what();
            }
            out.push_back(std::move(base));
            out.push_back(std::move(inc));
        }
    }
    return out;
}

/** Divide-and-conquer solve against the dense baseline on connected ER draws. */
inline std::vector<BenchRecord> runDacVsDense(const std::vector<Index>& ns, double rho,
                                              const std::vector<std::uint64_t>& seeds,
                                              Index baseSize = 64) {
    std::vector<BenchRecord> out;
    for (const Index n : ns) {
        for (const std::uint64_t seed : seeds) {
            BenchRecord base{"baseline", n, rho, seed};
            BenchRecord dac{"dac", n, rho, seed};
            try {
                const auto g = erGraph({GenKind::er, n, rho, 1, seed}, true);
                const auto L = laplacian(g);
                DenseMatrix<double> P;
                base.wallTime = medianSeconds([&] { P = pinvBaseline(L); });

                SolveConfig cfg;
                cfg.baseSize = baseSize;
                DenseMatrix<double> Q;
                dac.wallTime = medianSeconds([&] { Q = solve(g, cfg).fullPinv(); });
                dac.maxErr = (Q - P).cwiseAbs().maxCoeff();
            } catch (const std::exception& e) {
                base.note = dac.note = e.what();
            }
            out.push_back(std::move(base));
            out.push_back(std::move(dac));
        }
    }
    return out;
}

/** Sweeps (n, rho) cells; disconnected draws are solved per component. */
inline std::vector<BenchRecord> runErGrid(const std::vector<Index>& ns,
                                          const std::vector<double>& rhos,
                                          const std::vector<std::uint64_t>& seeds,
                                          Index baseSize = 64) {
    std::vector<BenchRecord> out;
    for (const Index n : ns) {
        for (const double rho : rhos) {
            for (const std::uint64_t seed : seeds) {
                BenchRecord base{"baseline", n, rho, seed};
                BenchRecord dac{"dac", n, rho, seed};
                try {
                    const auto g = erGraph({GenKind::er, n, rho, 1, seed});
                    DenseMatrix<double> P;
                    base.wallTime = medianSeconds([&] { P = DynamicState<double>(g).fullPinv(); });
                    SolveConfig cfg;
                    cfg.baseSize = baseSize;
                    DenseMatrix<double> Q;
                    dac.wallTime = medianSeconds([&] { Q = solve(g, cfg).fullPinv(); });
                    dac.maxErr = (Q - P).cwiseAbs().maxCoeff();
                } catch (const std::exception& e) {
                    base.note = dac.note = e.what();
                }
                out.push_back(std::move(base));
                out.push_back(std::move(dac));
            }
        }
    }
    return out;
}

} // namespace lapinc
