#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapinc/dynamic_state.hpp>
#include <lapinc/graph.hpp>
#include <lapinc/types.hpp>

namespace lapinc {

enum class GenKind { er, pa };

inline const char* kindName(GenKind kind) { return kind == GenKind::er ? "er" : "pa"; }

inline GenKind parseGenKind(const std::string& name) {
    if (name == "er") return GenKind::er;
    if (name == "pa") return GenKind::pa;
    throw std::invalid_argument("unknown generator kind: " + name);
}

struct GenSpec {
    GenKind kind = GenKind::er;
    Index n = 0;
    double rho = 0.0;         // er: independent edge probability
    Index kappa = 1;          // pa: edges per arriving node
    std::uint64_t seed = 0;
};

/** Uniform double in [0, 1) from the top 53 bits; identical on every platform. */
inline double canonicalUniform(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

/**
 * Uniform index in [0, n) by rejection. std::uniform_int_distribution is
 * implementation-defined, which would break seed reproducibility across
 * standard libraries, so the draw is pinned here.
 */
inline Index uniformIndex(std::mt19937_64& rng, Index n) {
    if (n < 1) throw std::invalid_argument("empty range");
    if (n == 1) return 0;
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / un * un;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return static_cast<Index>(draw % un);
}

namespace detail {

inline void requireErSpec(const GenSpec& spec) {
    if (spec.kind != GenKind::er) throw std::invalid_argument("spec kind is not er");
    if (spec.n < 0) throw std::invalid_argument("negative order");
    // the boundary probabilities are degenerate but well defined, so they pass
    if (!(spec.rho >= 0.0 && spec.rho <= 1.0))
        throw std::invalid_argument("edge probability outside [0, 1]");
}

inline void requirePaSpec(const GenSpec& spec) {
    if (spec.kind != GenKind::pa) throw std::invalid_argument("spec kind is not pa");
    if (spec.kappa < 1) throw std::invalid_argument("kappa must be at least 1");
    if (spec.kappa >= spec.n) throw std::invalid_argument("kappa must be below n");
}

} // namespace detail

/**
 * Erdős–Rényi draw: every unordered pair appears independently with
 * probability rho, unit weights. When a connected graph is requested,
 * disconnected draws are regenerated with seed+1, seed+2, ... up to 100
 * attempts before giving up.
 */
inline Graph<double> erGraph(const GenSpec& spec, bool requireConnected = false) {
    detail::requireErSpec(spec);
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        std::mt19937_64 rng(spec.seed + attempt);
        Graph<double> g(spec.n);
        for (NodeId u = 0; u + 1 < spec.n; ++u)
            for (NodeId v = u + 1; v < spec.n; ++v)
                if (canonicalUniform(rng) < spec.rho) g.addEdge(u, v);
        if (!requireConnected || connectedComponents(g).count() <= 1) return g;
    }
    throw std::runtime_error("no connected draw within 100 attempts");
}

/**
 * Draws kappa distinct endpoints, each slot equally likely, so a node's chance
 * is proportional to how often it appears in slots (its degree, when the
 * caller keeps one slot per incident edge end). With no slots at all the draw
 * falls back to uniform over the numNodes existing nodes. Duplicates are
 * rejected and redrawn.
 */
inline std::vector<NodeId> sampleAttachmentEndpoints(std::mt19937_64& rng,
                                                     const std::vector<NodeId>& slots,
                                                     Index numNodes, Index kappa) {
    if (kappa < 1 || kappa > numNodes) throw std::invalid_argument("kappa out of range");
    std::vector<NodeId> chosen;
    chosen.reserve(static_cast<std::size_t>(kappa));
    std::vector<char> taken(static_cast<std::size_t>(numNodes), 0);
    long rejections = 0;
    while (static_cast<Index>(chosen.size()) < kappa) {
        const NodeId pick =
            slots.empty() ? uniformIndex(rng, numNodes)
                          : slots[static_cast<std::size_t>(
                                uniformIndex(rng, static_cast<Index>(slots.size())))];
        if (taken[static_cast<std::size_t>(pick)]) {
            if (++rejections > 1'000'000)
                throw std::runtime_error("endpoint sampling stalled; too few distinct candidates");
            continue;
        }
        taken[static_cast<std::size_t>(pick)] = 1;
        chosen.push_back(pick);
    }
    return chosen;
}

struct PaResult {
    Graph<double> graph;
    std::vector<Event> events; // replaying from an empty state rebuilds graph
};

/**
 * Preferential attachment growth. Arrivals attach kappa edges to distinct
 * existing nodes picked proportionally to their degree, with degrees frozen
 * at the start of the arrival. kappa = 1 grows a tree from a singleton;
 * kappa > 1 starts from a complete substrate on kappa+1 nodes so the first
 * arrival has enough distinct neighbors to choose from.
 */
inline PaResult paGraph(const GenSpec& spec) {
    detail::requirePaSpec(spec);
    std::mt19937_64 rng(spec.seed);
    PaResult out;
    out.graph = Graph<double>(0);
    std::vector<NodeId> slots; // one entry per edge end; length tracks total degree

    auto addEdgeEverywhere = [&](NodeId u, NodeId v) {
        out.graph.addEdge(u, v);
        out.events.push_back(Event::addEdge(u, v, 1.0));
        slots.push_back(u);
        slots.push_back(v);
    };

    const Index substrate = spec.kappa == 1 ? 1 : spec.kappa + 1;
    for (Index v = 0; v < substrate; ++v) {
        out.graph.addNode();
        out.events.push_back(Event::addNode());
    }
    for (NodeId u = 0; u + 1 < substrate; ++u)
        for (NodeId v = u + 1; v < substrate; ++v) addEdgeEverywhere(u, v);

    while (out.graph.numNodes() < spec.n) {
        // sampled before the arrival touches slots, so degrees stay frozen
        auto endpoints =
            sampleAttachmentEndpoints(rng, slots, out.graph.numNodes(), spec.kappa);
        std::sort(endpoints.begin(), endpoints.end());
        const NodeId arrival = out.graph.addNode();
        out.events.push_back(Event::addNode());
        for (NodeId e : endpoints) addEdgeEverywhere(e, arrival);
    }
    return out;
}

/** Applies a whole event log in order. */
template <typename Scalar>
void evolve(DynamicState<Scalar>& state, const std::vector<Event>& events) {
    for (const auto& e : events) state.apply(e);
}

/** Same, invoking after(state, k) once event k has been applied. */
template <typename Scalar, typename AfterStep>
void evolve(DynamicState<Scalar>& state, const std::vector<Event>& events, AfterStep&& after) {
    for (std::size_t k = 0; k < events.size(); ++k) {
        state.apply(events[k]);
        after(state, k);
    }
}

/** Header comments describing a generated instance, for edge-list and event files. */
inline std::vector<std::string> metadataComments(const GenSpec& spec) {
    std::ostringstream line;
    line << "generator: " << kindName(spec.kind) << " n=" << spec.n;
    if (spec.kind == GenKind::er) {
        line.precision(12);
        line << " rho=" << spec.rho;
    } else {
        line << " kappa=" << spec.kappa;
    }
    line << " seed=" << spec.seed;
    return {line.str(), "rng: mt19937_64, 53-bit canonical uniforms, rejection-sampled indices"};
}

} // namespace lapinc
