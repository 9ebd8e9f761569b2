#ifndef LAPINC_DYNAMIC_STATE_HPP_
#define LAPINC_DYNAMIC_STATE_HPP_

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <lapinc/graph.hpp>
#include <lapinc/laplacian.hpp>
#include <lapinc/types.hpp>
#include <lapinc/update.hpp>

namespace lapinc {

enum class EventKind { addNode, addEdge, deleteEdge, deleteNode };

/**
 * One graph mutation. add-node carries no operands; add-edge uses u, v, w;
 * del-edge uses u, v; del-node uses u. Node ids are dense internal ids valid
 * at the moment the event applies (del-node compacts ids above u).
 */
struct Event {
    EventKind kind = EventKind::addNode;
    NodeId u = -1;
    NodeId v = -1;
    double w = 1.0;

    static Event addNode() { return {EventKind::addNode, -1, -1, 1.0}; }
    static Event addEdge(NodeId u, NodeId v, double w = 1.0) { return {EventKind::addEdge, u, v, w}; }
    static Event deleteEdge(NodeId u, NodeId v) { return {EventKind::deleteEdge, u, v, 1.0}; }
    static Event deleteNode(NodeId u) { return {EventKind::deleteNode, u, -1, 1.0}; }
};

/**
 * Event log text format, one event per line:
 *   add-node
 *   add-edge u v w   (w may be omitted and defaults to 1)
 *   del-edge u v
 *   del-node u
 * `#` lines are comments; blank lines are skipped.
 */
inline std::vector<Event> parseEventLog(std::istream& in, std::vector<Index>* sourceLines = nullptr) {
    std::vector<Event> events;
    std::string line;
    Index lineNo = 0;
    if (sourceLines) sourceLines->clear();
    auto noteLine = [&] {
        if (sourceLines) sourceLines->push_back(lineNo);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        const std::string& kind = tok[0];
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (tok.size() - 1 < lo || tok.size() - 1 > hi)
                throw ParseError(lineNo, "wrong number of operands for " + kind);
        };
        if (kind == "add-node") {
            arity(0, 0);
            events.push_back(Event::addNode());
            noteLine();
        } else if (kind == "add-edge") {
            arity(2, 3);
            const NodeId u = detail::parseInt64Token(tok[1], lineNo);
            const NodeId v = detail::parseInt64Token(tok[2], lineNo);
            const double w = tok.size() == 4 ? detail::parseWeightToken(tok[3], lineNo) : 1.0;
            if (!(w > 0)) throw ParseError(lineNo, "edge weight must be positive");
            events.push_back(Event::addEdge(u, v, w));
            noteLine();
        } else if (kind == "del-edge") {
            arity(2, 2);
            events.push_back(Event::deleteEdge(detail::parseInt64Token(tok[1], lineNo),
                                               detail::parseInt64Token(tok[2], lineNo)));
            noteLine();
        } else if (kind == "del-node") {
            arity(1, 1);
            events.push_back(Event::deleteNode(detail::parseInt64Token(tok[1], lineNo)));
            noteLine();
        } else {
            throw ParseError(lineNo, "unknown event '" + kind + "'");
        }
    }
    return events;
}

inline void writeEventLog(std::ostream& out, const std::vector<Event>& events,
                          const std::vector<std::string>& headerComments = {}) {
    for (const auto& c : headerComments) out << "# " << c << '\n';
    const auto oldPrecision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& e : events) {
        switch (e.kind) {
        case EventKind::addNode: out << "add-node\n"; break;
        case EventKind::addEdge: out << "add-edge " << e.u << ' ' << e.v << ' ' << e.w << '\n'; break;
        case EventKind::deleteEdge: out << "del-edge " << e.u << ' ' << e.v << '\n'; break;
        case EventKind::deleteNode: out << "del-node " << e.u << '\n'; break;
        }
    }
    out.precision(oldPrecision);
}

/**
 * A graph together with one pseudo-inverse per connected component, kept in
 * lockstep through mutation events. Singleton components carry the 1x1 zero
 * matrix. Events either commit completely or leave the state untouched.
 *
 * Each applied event bumps an update counter; with the automatic policy
 * enabled (the default), the state refreshes itself from scratch once the
 * counter reaches 10 per node or a component's row sums drift past 1e-7
 * times its size.
 */
template <typename Scalar = double>
class DynamicState {
public:
    struct Component {
        std::vector<NodeId> nodes; // local index -> global node id
        DenseMatrix<Scalar> pinv;
    };

    DynamicState() = default;

    /** Solves every component of g dense to seed the state. */
    explicit DynamicState(const Graph<Scalar>& g) : graph_(g) {
        const auto labeling = connectedComponents(graph_);
        comps_.resize(static_cast<std::size_t>(labeling.count()));
        for (NodeId v = 0; v < graph_.numNodes(); ++v)
            comps_[static_cast<std::size_t>(labeling.component[static_cast<std::size_t>(v)])].nodes.push_back(v);
        for (auto& comp : comps_) comp.pinv = solveComponent(comp.nodes);
        rebuildLocate();
    }

    /** Adopts precomputed per-component matrices (validated, not recomputed). */
    DynamicState(const Graph<Scalar>& g, std::vector<Component> comps)
        : graph_(g), comps_(std::move(comps)) {
        std::vector<char> seen(static_cast<std::size_t>(graph_.numNodes()), 0);
        for (const auto& comp : comps_) {
            if (comp.pinv.rows() != comp.pinv.cols() ||
                comp.pinv.rows() != static_cast<Index>(comp.nodes.size()))
                throw std::invalid_argument("component matrix dimension mismatch");
            for (NodeId v : comp.nodes) {
                if (v < 0 || v >= graph_.numNodes()) throw std::out_of_range("component node out of range");
                if (seen[static_cast<std::size_t>(v)]++) throw std::invalid_argument("components overlap");
            }
        }
        for (char c : seen)
            if (!c) throw std::invalid_argument("components do not cover the graph");
        rebuildLocate();
    }

    const Graph<Scalar>& graph() const { return graph_; }

    Index componentCount() const { return static_cast<Index>(comps_.size()); }

    const Component& component(Index c) const { return comps_.at(static_cast<std::size_t>(c)); }

    /** (component id, local index) of a node. */
    std::pair<Index, NodeId> locate(NodeId v) const {
        if (v < 0 || v >= graph_.numNodes()) throw std::out_of_range("node id out of range");
        return locate_[static_cast<std::size_t>(v)];
    }

    Index updateCount() const { return updates_; }

    bool automaticRefresh() const { return automatic_; }
    void setAutomaticRefresh(bool on) { automatic_ = on; }

    /** Pseudo-inverse of the whole graph: component blocks scattered to global ids. */
    DenseMatrix<Scalar> fullPinv() const {
        const Index n = graph_.numNodes();
        DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(n, n);
        for (const auto& comp : comps_) {
            const Index k = static_cast<Index>(comp.nodes.size());
            for (Index a = 0; a < k; ++a)
                for (Index b = 0; b < k; ++b) out(comp.nodes[static_cast<std::size_t>(a)],
                                                  comp.nodes[static_cast<std::size_t>(b)]) = comp.pinv(a, b);
        }
        return out;
    }

    /**
     * Routes one event to the matching update formula. add-edge joins two
     * components or fires inside one; del-edge splits at a bridge or
     * downdates otherwise; del-node removes incident edges first and then
     * drops the leftover singleton, compacting ids above it.
     */
    void apply(const Event& e) {
        switch (e.kind) {
        case EventKind::addNode: {
            graph_.addNode();
            comps_.push_back({{graph_.numNodes() - 1}, DenseMatrix<Scalar>::Zero(1, 1)});
            locate_.emplace_back(componentCount() - 1, 0);
            bump(1);
            break;
        }
        case EventKind::addEdge: {
            applyAddEdge(e.u, e.v, Scalar(e.w));
            bump(1);
            break;
        }
        case EventKind::deleteEdge: {
            applyDeleteEdge(e.u, e.v);
            bump(1);
            break;
        }
        case EventKind::deleteNode: {
            if (e.u < 0 || e.u >= graph_.numNodes()) throw std::out_of_range("node id out of range");
            // composite event: work on a copy so a failure cannot leave a half-removed node
            DynamicState staged = *this;
            const Index edgesTouched = std::max<Index>(1, static_cast<Index>(graph_.neighbors(e.u).size()));
            staged.removeNodeInPlace(e.u);
            *this = std::move(staged);
            bump(edgesTouched);
            break;
        }
        }
        maybeAutoRefresh();
    }

    /**
     * Recomputes every component dense and reports the max-norm drift of the
     * incremental matrices it replaced. Resets the update counter.
     */
    Scalar refresh() {
        Scalar worst = 0;
        for (auto& comp : comps_) {
            DenseMatrix<Scalar> fresh = solveComponent(comp.nodes);
            worst = std::max(worst, (fresh - comp.pinv).cwiseAbs().maxCoeff());
            comp.pinv = std::move(fresh);
        }
        updates_ = 0;
        return worst;
    }

private:
    DenseMatrix<Scalar> solveComponent(const std::vector<NodeId>& nodes) const {
        if (nodes.size() == 1) return DenseMatrix<Scalar>::Zero(1, 1);
        return pinvBaseline(laplacian(inducedSubgraph(graph_, nodes)));
    }

    void rebuildLocate() {
        locate_.assign(static_cast<std::size_t>(graph_.numNodes()), {-1, -1});
        for (Index c = 0; c < componentCount(); ++c) {
            const auto& nodes = comps_[static_cast<std::size_t>(c)].nodes;
            for (std::size_t l = 0; l < nodes.size(); ++l)
                locate_[static_cast<std::size_t>(nodes[l])] = {c, static_cast<NodeId>(l)};
        }
    }

    void applyAddEdge(NodeId u, NodeId v, Scalar w) {
        // run the graph's own precondition checks without mutating it yet
        if (u < 0 || v < 0 || u >= graph_.numNodes() || v >= graph_.numNodes())
            throw std::out_of_range("node id out of range");
        if (u == v) throw std::invalid_argument("self-loop rejected");
        if (!(w > Scalar(0))) throw std::invalid_argument("edge weight must be positive");
        if (graph_.hasEdge(u, v))
            throw std::invalid_argument("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
        const Scalar resistance = Scalar(1) / w;
        const auto [cu, lu] = locate(u);
        const auto [cv, lv] = locate(v);
        if (cu == cv) {
            DenseMatrix<Scalar> updated = fireEdge(comps_[static_cast<std::size_t>(cu)].pinv, lu, lv, resistance);
            graph_.addEdge(u, v, w);
            comps_[static_cast<std::size_t>(cu)].pinv = std::move(updated);
        } else {
            auto& part1 = comps_[static_cast<std::size_t>(cu)];
            auto& part2 = comps_[static_cast<std::size_t>(cv)];
            JoinSpec<Scalar> spec{lu, lv, resistance, static_cast<Index>(part1.nodes.size()),
                                  static_cast<Index>(part2.nodes.size())};
            DenseMatrix<Scalar> joined = firstJoin(part1.pinv, part2.pinv, spec);
            graph_.addEdge(u, v, w);
            part1.nodes.insert(part1.nodes.end(), part2.nodes.begin(), part2.nodes.end());
            part1.pinv = std::move(joined);
            comps_.erase(comps_.begin() + cv);
            rebuildLocate();
        }
    }

    void applyDeleteEdge(NodeId u, NodeId v) {
        const Scalar w = graph_.weight(u, v); // validates endpoints and presence
        const auto [c, lu] = locate(u);
        const NodeId lv = locate(v).second;
        auto& comp = comps_[static_cast<std::size_t>(c)];
        if (!isBridge(graph_, u, v)) {
            DenseMatrix<Scalar> updated = deleteNonBridge(comp.pinv, lu, lv, Scalar(1) / w);
            graph_.removeEdge(u, v);
            comp.pinv = std::move(updated);
            return;
        }
        // local indices of everything still reachable from u once (u, v) is gone
        std::vector<char> onUSide(comp.nodes.size(), 0);
        std::vector<NodeId> stack{u};
        onUSide[static_cast<std::size_t>(lu)] = 1;
        while (!stack.empty()) {
            const NodeId x = stack.back();
            stack.pop_back();
            for (const auto& [nb, wt] : graph_.neighbors(x)) {
                if ((x == u && nb == v) || (x == v && nb == u)) continue;
                const NodeId lnb = locate(nb).second;
                if (!onUSide[static_cast<std::size_t>(lnb)]) {
                    onUSide[static_cast<std::size_t>(lnb)] = 1;
                    stack.push_back(nb);
                }
            }
        }
        std::vector<NodeId> sideU, sideV;
        for (std::size_t l = 0; l < comp.nodes.size(); ++l)
            (onUSide[l] ? sideU : sideV).push_back(static_cast<NodeId>(l));
        auto [pU, pV] = deleteBridge(comp.pinv, sideU, sideV);
        graph_.removeEdge(u, v);
        Component compV{{}, std::move(pV)};
        for (NodeId l : sideV) compV.nodes.push_back(comp.nodes[static_cast<std::size_t>(l)]);
        std::vector<NodeId> nodesU;
        for (NodeId l : sideU) nodesU.push_back(comp.nodes[static_cast<std::size_t>(l)]);
        comp.nodes = std::move(nodesU);
        comp.pinv = std::move(pU);
        comps_.push_back(std::move(compV));
        rebuildLocate();
    }

    void removeNodeInPlace(NodeId u) {
        const auto incident = graph_.neighbors(u); // copy: deletions mutate adjacency
        for (const auto& [nb, w] : incident) applyDeleteEdge(u, nb);
        const Index cu = locate(u).first;
        comps_.erase(comps_.begin() + cu);
        graph_.removeNode(u);
        for (auto& comp : comps_)
            for (auto& nd : comp.nodes)
                if (nd > u) --nd;
        rebuildLocate();
    }

    void bump(Index k) { updates_ += k; }

    void maybeAutoRefresh() {
        if (!automatic_ || graph_.numNodes() == 0) return;
        if (updates_ >= tol::kRefreshUpdatesPerNode * graph_.numNodes()) {
            refresh();
            return;
        }
        for (const auto& comp : comps_) {
            if (comp.nodes.size() < 2) continue;
            if (maxAbsRowSum(comp.pinv) > Scalar(tol::kDriftPerNode) * Scalar(comp.nodes.size())) {
                refresh();
                return;
            }
        }
    }

    Graph<Scalar> graph_;
    std::vector<Component> comps_;
    std::vector<std::pair<Index, NodeId>> locate_;
    Index updates_ = 0;
    bool automatic_ = true;
};

} // namespace lapinc

#endif // LAPINC_DYNAMIC_STATE_HPP_
