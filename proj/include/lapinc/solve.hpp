#pragma once

#include <algorithm>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <lapinc/dynamic_state.hpp>
#include <lapinc/graph.hpp>
#include <lapinc/laplacian.hpp>
#include <lapinc/types.hpp>
#include <lapinc/update.hpp>

namespace lapinc {

/** The splitting heuristic found no useful cut; callers fall back to a dense solve. */
class HeuristicFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CutoffStats {
    Index removed = 0;   // nodes peeled before the giant component collapsed
    Index components = 0; // parts in the final partition
    Index gccSize = 0;
    Index gccEdges = 0;
    Index cutEdges = 0;
};

template <typename Scalar = double>
struct Partition {
    std::vector<std::vector<NodeId>> parts; // giant component first; ids ascending per part
    std::vector<Edge<Scalar>> cutEdges;     // every cut edge touches parts[0]
    std::vector<NodeId> richClub;           // peel order
    CutoffStats stats;
};

struct SolveConfig {
    Index baseSize = 64; // components at or below this size are solved dense
    Index maxDepth = 32;
    bool parallel = false;
    bool closedForms = true;
};

namespace detail {

/**
 * Connected components of the subgraph induced by mask==0 nodes. Component ids
 * are assigned in ascending order of their smallest member; masked nodes get -1.
 */
template <typename Scalar>
std::pair<std::vector<Index>, std::vector<Index>> maskedComponents(const Graph<Scalar>& g,
                                                                   const std::vector<char>& mask) {
    const Index n = g.numNodes();
    std::vector<Index> component(static_cast<std::size_t>(n), -1);
    std::vector<Index> sizes;
    std::vector<NodeId> stack;
    for (NodeId start = 0; start < n; ++start) {
        if (mask[static_cast<std::size_t>(start)] || component[static_cast<std::size_t>(start)] >= 0)
            continue;
        const Index c = static_cast<Index>(sizes.size());
        sizes.push_back(0);
        component[static_cast<std::size_t>(start)] = c;
        stack.assign(1, start);
        while (!stack.empty()) {
            const NodeId x = stack.back();
            stack.pop_back();
            ++sizes[static_cast<std::size_t>(c)];
            for (const auto& [nb, w] : g.neighbors(x)) {
                if (mask[static_cast<std::size_t>(nb)] || component[static_cast<std::size_t>(nb)] >= 0)
                    continue;
                component[static_cast<std::size_t>(nb)] = c;
                stack.push_back(nb);
            }
        }
    }
    return {std::move(component), std::move(sizes)};
}

} // namespace detail

/**
 * Splits a connected graph by peeling its highest-degree nodes.
 *
 * Nodes leave in descending weighted degree (ties toward the smaller id), an
 * ordering fixed up front on the intact graph. Peeling stops as soon as the
 * largest surviving component holds strictly less than half of all nodes. The
 * partition is that giant component plus the components of everything else
 * (peeled nodes included, original edges restored among them), so the only
 * edges between distinct parts are the ones touching the giant component.
 *
 * Throws HeuristicFailure when no such cutoff exists or when the split is
 * useless because one part still holds all but at most one node.
 */
template <typename Scalar>
Partition<Scalar> richClubSplit(const Graph<Scalar>& g) {
    const Index n = g.numNodes();
    if (n < 4) throw HeuristicFailure("graph too small to split");

    const auto order = degreeOrdering(g);
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    Partition<Scalar> p;

    std::vector<Index> component, sizes;
    Index gccId = -1;
    while (true) {
        if (p.richClub.size() == order.size())
            throw HeuristicFailure("peeling every node never collapsed the giant component");
        const NodeId next = order[p.richClub.size()];
        removed[static_cast<std::size_t>(next)] = 1;
        p.richClub.push_back(next);

        std::tie(component, sizes) = detail::maskedComponents(g, removed);
        gccId = -1;
        Index gccSize = 0;
        for (Index c = 0; c < static_cast<Index>(sizes.size()); ++c) {
            if (sizes[static_cast<std::size_t>(c)] > gccSize) {
                gccSize = sizes[static_cast<std::size_t>(c)];
                gccId = c;
            }
        }
        if (2 * gccSize < n) break;
    }

    std::vector<NodeId> gccPart;
    std::vector<char> side(static_cast<std::size_t>(n), 0); // peeled nodes and non-giant leftovers
    for (NodeId v = 0; v < n; ++v) {
        if (!removed[static_cast<std::size_t>(v)] && component[static_cast<std::size_t>(v)] == gccId)
            gccPart.push_back(v);
        else
            side[static_cast<std::size_t>(v)] = 1;
    }

    std::vector<char> notSide(static_cast<std::size_t>(n), 0);
    for (NodeId v = 0; v < n; ++v) notSide[static_cast<std::size_t>(v)] = !side[static_cast<std::size_t>(v)];
    const auto [sideComponent, sideSizes] = detail::maskedComponents(g, notSide);

    p.parts.resize(1 + sideSizes.size());
    p.parts[0] = std::move(gccPart);
    for (NodeId v = 0; v < n; ++v)
        if (side[static_cast<std::size_t>(v)])
            p.parts[1 + static_cast<std::size_t>(sideComponent[static_cast<std::size_t>(v)])].push_back(v);

    for (const auto& part : p.parts)
        if (static_cast<Index>(part.size()) >= n - 1)
            throw HeuristicFailure("split leaves one part nearly whole");

    for (const auto& e : g.edges()) {
        const bool uSide = side[static_cast<std::size_t>(e.u)];
        const bool vSide = side[static_cast<std::size_t>(e.v)];
        if (uSide != vSide)
            p.cutEdges.push_back(e);
        else if (!uSide)
            ++p.stats.gccEdges;
    }

    p.stats.removed = static_cast<Index>(p.richClub.size());
    p.stats.components = static_cast<Index>(p.parts.size());
    p.stats.gccSize = static_cast<Index>(p.parts[0].size());
    p.stats.cutEdges = static_cast<Index>(p.cutEdges.size());
    return p;
}

template <typename Scalar>
std::string partitionReportJson(const Partition<Scalar>& p) {
    nlohmann::json report;
    report["removed"] = p.stats.removed;
    report["components"] = p.stats.components;
    report["gcc_size"] = p.stats.gccSize;
    report["gcc_edges"] = p.stats.gccEdges;
    report["cut_edges"] = p.stats.cutEdges;
    report["rich_club"] = p.richClub;
    auto& partSizes = report["part_sizes"] = nlohmann::json::array();
    for (const auto& part : p.parts) partSizes.push_back(part.size());
    return report.dump(2);
}

namespace detail {

template <typename Scalar>
bool allUnitWeights(const Graph<Scalar>& g) {
    for (NodeId v = 0; v < g.numNodes(); ++v)
        for (const auto& [nb, w] : g.neighbors(v))
            if (w != Scalar(1)) return false;
    return true;
}

} // namespace detail

/** Root of an unweighted star, or nullopt. Needs n >= 3 to tell the root apart. */
template <typename Scalar>
std::optional<NodeId> detectStarRoot(const Graph<Scalar>& g) {
    const Index n = g.numNodes();
    if (n < 3 || g.numEdges() != n - 1 || !detail::allUnitWeights(g)) return std::nullopt;
    for (NodeId v = 0; v < n; ++v)
        if (static_cast<Index>(g.neighbors(v).size()) == n - 1) return v;
    return std::nullopt;
}

template <typename Scalar>
bool detectClique(const Graph<Scalar>& g) {
    const Index n = g.numNodes();
    return n >= 2 && g.numEdges() == n * (n - 1) / 2 && detail::allUnitWeights(g);
}

enum class EdgeOrder {
    sorted, // ascending (u, v); the deterministic default
    asGiven,
};

struct ReassembleReport {
    std::size_t entriesWritten = 0; // matrix entries produced across all edge steps
    Index joins = 0;
    Index fires = 0;
};

/**
 * Stitches per-part pseudo-inverses back together one cut edge at a time.
 *
 * A cut edge between two still-separate groups joins them; one inside an
 * already-joined group is fired into it. Each step costs one matrix of the
 * current group size, never a factorization. The parts must tile 0..n-1 and
 * the cut edges must reconnect them completely, else this throws. The result
 * is indexed by the original node ids and is independent of the edge order up
 * to roundoff.
 */
template <typename Scalar>
DenseMatrix<Scalar> reassemble(const std::vector<std::vector<NodeId>>& parts,
                               const std::vector<DenseMatrix<Scalar>>& partPinvs,
                               const std::vector<Edge<Scalar>>& cutEdges,
                               EdgeOrder order = EdgeOrder::sorted,
                               ReassembleReport* report = nullptr) {
    if (parts.size() != partPinvs.size())
        throw std::invalid_argument("one matrix per part required");
    Index n = 0;
    for (const auto& part : parts) n += static_cast<Index>(part.size());

    struct Group {
        std::vector<NodeId> nodes;
        DenseMatrix<Scalar> pinv;
    };
    std::vector<Group> groups(parts.size());
    std::vector<Index> groupOf(static_cast<std::size_t>(n), -1);
    std::vector<NodeId> localOf(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].empty()) throw std::invalid_argument("empty part");
        if (partPinvs[k].rows() != partPinvs[k].cols() ||
            partPinvs[k].rows() != static_cast<Index>(parts[k].size()))
            throw std::invalid_argument("part matrix dimension mismatch");
        for (std::size_t a = 0; a < parts[k].size(); ++a) {
            const NodeId v = parts[k][a];
            if (v < 0 || v >= n) throw std::invalid_argument("parts must tile 0..n-1");
            if (groupOf[static_cast<std::size_t>(v)] >= 0)
                throw std::invalid_argument("parts overlap");
            groupOf[static_cast<std::size_t>(v)] = static_cast<Index>(k);
            localOf[static_cast<std::size_t>(v)] = static_cast<NodeId>(a);
        }
        groups[k].nodes = parts[k];
        groups[k].pinv = partPinvs[k];
    }

    std::vector<Edge<Scalar>> work(cutEdges);
    if (order == EdgeOrder::sorted)
        std::sort(work.begin(), work.end(), [](const auto& a, const auto& b) {
            return std::pair(a.u, a.v) < std::pair(b.u, b.v);
        });

    Index live = static_cast<Index>(groups.size());
    for (const auto& e : work) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
            throw std::invalid_argument("cut edge endpoints out of range");
        const Index gu = groupOf[static_cast<std::size_t>(e.u)];
        const Index gv = groupOf[static_cast<std::size_t>(e.v)];
        auto& dst = groups[static_cast<std::size_t>(gu)];
        if (gu == gv) {
            dst.pinv = fireEdge(dst.pinv, localOf[static_cast<std::size_t>(e.u)],
                                localOf[static_cast<std::size_t>(e.v)], e.resistance());
            if (report) {
                ++report->fires;
                report->entriesWritten += static_cast<std::size_t>(dst.pinv.size());
            }
            continue;
        }
        auto& src = groups[static_cast<std::size_t>(gv)];
        const JoinSpec<Scalar> spec{localOf[static_cast<std::size_t>(e.u)],
                                    localOf[static_cast<std::size_t>(e.v)], e.resistance(),
                                    static_cast<Index>(dst.nodes.size()),
                                    static_cast<Index>(src.nodes.size())};
        dst.pinv = firstJoin(dst.pinv, src.pinv, spec);
        for (std::size_t a = 0; a < src.nodes.size(); ++a) {
            const NodeId v = src.nodes[a];
            groupOf[static_cast<std::size_t>(v)] = gu;
            localOf[static_cast<std::size_t>(v)] =
                static_cast<NodeId>(dst.nodes.size() + a);
        }
        dst.nodes.insert(dst.nodes.end(), src.nodes.begin(), src.nodes.end());
        src.nodes.clear();
        src.pinv.resize(0, 0);
        --live;
        if (report) {
            ++report->joins;
            report->entriesWritten += static_cast<std::size_t>(dst.pinv.size());
        }
    }
    if (live != 1)
        throw std::domain_error("cut edges leave the parts disconnected");

    DenseMatrix<Scalar> out(n, n);
    for (NodeId x = 0; x < n; ++x) {
        const auto& px = groups[static_cast<std::size_t>(groupOf[static_cast<std::size_t>(x)])].pinv;
        for (NodeId y = 0; y < n; ++y)
            out(x, y) = px(localOf[static_cast<std::size_t>(x)], localOf[static_cast<std::size_t>(y)]);
    }
    return out;
}

namespace detail {

template <typename Scalar>
DenseMatrix<Scalar> solveConnected(const Graph<Scalar>& g, const SolveConfig& cfg, Index depth) {
    const Index n = g.numNodes();
    if (n <= cfg.baseSize) return pinvBaseline(laplacian(g));
    if (cfg.closedForms) {
        if (detectClique(g)) return cliquePinv<Scalar>(n);
        if (const auto root = detectStarRoot(g)) return starPinv<Scalar>(n, *root);
    }
    if (depth >= cfg.maxDepth) return pinvBaseline(laplacian(g));

    Partition<Scalar> partition;
    try {
        partition = richClubSplit(g);
    } catch (const HeuristicFailure&) {
        return pinvBaseline(laplacian(g));
    }

    std::vector<DenseMatrix<Scalar>> partPinvs(partition.parts.size());
    if (cfg.parallel && partition.parts.size() > 1) {
        SolveConfig inner = cfg; // one level of fan-out keeps the thread count bounded
        inner.parallel = false;
        std::vector<std::future<DenseMatrix<Scalar>>> futures;
        futures.reserve(partition.parts.size());
        for (const auto& part : partition.parts)
            futures.push_back(std::async(std::launch::async, [&g, &part, &inner, depth] {
                return solveConnected(inducedSubgraph(g, part), inner, depth + 1);
            }));
        for (std::size_t k = 0; k < futures.size(); ++k) partPinvs[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < partition.parts.size(); ++k)
            partPinvs[k] = solveConnected(inducedSubgraph(g, partition.parts[k]), cfg, depth + 1);
    }

    // each part matrix is indexed by position within its part, which is exactly
    // the local layout reassemble expects; the result comes back in node order
    return reassemble(partition.parts, partPinvs, partition.cutEdges);
}

} // namespace detail

/**
 * Full solve: split off every connected component, handle each one by divide
 * and conquer (dense below cfg.baseSize, closed forms where they apply), and
 * return the live state ready for incremental maintenance.
 */
template <typename Scalar = double>
DynamicState<Scalar> solve(const Graph<Scalar>& g, const SolveConfig& cfg = {}) {
    const auto labeling = connectedComponents(g);
    std::vector<typename DynamicState<Scalar>::Component> comps(
        static_cast<std::size_t>(labeling.count()));
    for (NodeId v = 0; v < g.numNodes(); ++v)
        comps[static_cast<std::size_t>(labeling.component[static_cast<std::size_t>(v)])]
            .nodes.push_back(v);
    for (auto& comp : comps)
        comp.pinv = detail::solveConnected(inducedSubgraph(g, comp.nodes), cfg, 0);
    return DynamicState<Scalar>(g, std::move(comps));
}

} // namespace lapinc
