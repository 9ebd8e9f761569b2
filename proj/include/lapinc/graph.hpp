#ifndef LAPINC_GRAPH_HPP_
#define LAPINC_GRAPH_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <lapinc/types.hpp>

namespace lapinc {

/**
 * Error raised while reading one of the text formats.
 * line() is 1-based and refers to the offending input line.
 */
class ParseError : public std::runtime_error {
public:
    ParseError(Index line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    Index line() const noexcept { return line_; }

private:
    Index line_;
};

/** Undirected weighted edge. The resistance of an edge is the reciprocal of its weight. */
template <typename Scalar = double>
struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    Scalar weight = Scalar(1);

    Scalar resistance() const { return Scalar(1) / weight; }
};

/**
 * Undirected weighted graph over dense internal node ids [0, numNodes()).
 *
 * Every node carries an external integer label; labels stay unique across
 * mutations, so the label map is a bijection onto the current id range.
 * Adjacency is kept symmetric by construction, and the weighted degree and
 * volume caches are maintained incrementally by every mutator.
 *
 * Mutators either succeed completely or throw without changing the graph.
 * A Graph is a value type: copies are independent, and an instance may be
 * handed to another thread, but concurrent mutation is not synchronized.
 */
template <typename Scalar = double>
class Graph {
public:
    Graph() = default;

    /** n isolated nodes labeled 0..n-1. */
    explicit Graph(Index n) : adj_(static_cast<std::size_t>(n)), degree_(static_cast<std::size_t>(n), Scalar(0)) {
        labels_.resize(static_cast<std::size_t>(n));
        std::iota(labels_.begin(), labels_.end(), std::int64_t{0});
        maxLabel_ = n - 1;
    }

    Index numNodes() const { return static_cast<Index>(adj_.size()); }

    Index numEdges() const { return m_; }

    /** Sum of weighted degrees; equals twice the total edge weight. */
    Scalar volume() const { return volume_; }

    /** Weighted degree of v. */
    Scalar degree(NodeId v) const {
        checkNode(v);
        return degree_[static_cast<std::size_t>(v)];
    }

    /** Neighbors of v with edge weights, ordered by neighbor id. */
    const std::map<NodeId, Scalar>& neighbors(NodeId v) const {
        checkNode(v);
        return adj_[static_cast<std::size_t>(v)];
    }

    bool hasEdge(NodeId u, NodeId v) const {
        checkNode(u);
        checkNode(v);
        return adj_[static_cast<std::size_t>(u)].count(v) > 0;
    }

    Scalar weight(NodeId u, NodeId v) const {
        checkNode(u);
        checkNode(v);
        auto it = adj_[static_cast<std::size_t>(u)].find(v);
        if (it == adj_[static_cast<std::size_t>(u)].end())
            throw std::invalid_argument("no edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
        return it->second;
    }

    std::int64_t label(NodeId v) const {
        checkNode(v);
        return labels_[static_cast<std::size_t>(v)];
    }

    /** Adds an isolated node with the next unused label; returns its id. */
    NodeId addNode() { return addNode(maxLabel_ + 1); }

    NodeId addNode(std::int64_t label) {
        adj_.emplace_back();
        degree_.push_back(Scalar(0));
        labels_.push_back(label);
        maxLabel_ = std::max(maxLabel_, label);
        return numNodes() - 1;
    }

    void addEdge(NodeId u, NodeId v, Scalar w = Scalar(1)) {
        checkNode(u);
        checkNode(v);
        if (u == v) throw std::invalid_argument("self-loop (" + std::to_string(u) + ") rejected");
        if (!(w > Scalar(0))) throw std::invalid_argument("edge weight must be positive");
        if (hasEdge(u, v))
            throw std::invalid_argument("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
        adj_[static_cast<std::size_t>(u)].emplace(v, w);
        adj_[static_cast<std::size_t>(v)].emplace(u, w);
        degree_[static_cast<std::size_t>(u)] += w;
        degree_[static_cast<std::size_t>(v)] += w;
        volume_ += Scalar(2) * w;
        ++m_;
    }

    void removeEdge(NodeId u, NodeId v) {
        const Scalar w = weight(u, v); // throws if absent
        adj_[static_cast<std::size_t>(u)].erase(v);
        adj_[static_cast<std::size_t>(v)].erase(u);
        degree_[static_cast<std::size_t>(u)] -= w;
        degree_[static_cast<std::size_t>(v)] -= w;
        volume_ -= Scalar(2) * w;
        --m_;
    }

    /** Removes v and its incident edges; ids above v shift down by one. */
    void removeNode(NodeId v) {
        checkNode(v);
        const auto incident = adj_[static_cast<std::size_t>(v)]; // copy: removeEdge mutates it
        for (const auto& [nb, w] : incident) removeEdge(v, nb);
        adj_.erase(adj_.begin() + v);
        degree_.erase(degree_.begin() + v);
        labels_.erase(labels_.begin() + v);
        for (auto& row : adj_) {
            std::map<NodeId, Scalar> shifted;
            for (const auto& [nb, w] : row) shifted.emplace(nb > v ? nb - 1 : nb, w);
            row = std::move(shifted);
        }
    }

    /** All edges with u < v, ascending by (u, v). */
    std::vector<Edge<Scalar>> edges() const {
        std::vector<Edge<Scalar>> out;
        out.reserve(static_cast<std::size_t>(m_));
        for (NodeId u = 0; u < numNodes(); ++u)
            for (const auto& [v, w] : adj_[static_cast<std::size_t>(u)])
                if (v > u) out.push_back({u, v, w});
        return out;
    }

private:
    void checkNode(NodeId v) const {
        if (v < 0 || v >= numNodes())
            throw std::out_of_range("node id " + std::to_string(v) + " out of range");
    }

    std::vector<std::map<NodeId, Scalar>> adj_;
    std::vector<Scalar> degree_;
    std::vector<std::int64_t> labels_;
    std::int64_t maxLabel_ = -1;
    Scalar volume_ = Scalar(0);
    Index m_ = 0;
};

/** Connected components; ids are assigned in order of each component's smallest node. */
struct ComponentLabeling {
    std::vector<NodeId> component; // node -> component id
    std::vector<Index> sizes;      // component id -> node count
    NodeId gcc = -1;               // largest component; ties resolved toward the smaller id

    Index count() const { return static_cast<Index>(sizes.size()); }
};

template <typename Scalar>
ComponentLabeling connectedComponents(const Graph<Scalar>& g) {
    const Index n = g.numNodes();
    ComponentLabeling out;
    out.component.assign(static_cast<std::size_t>(n), NodeId(-1));
    for (NodeId s = 0; s < n; ++s) {
        if (out.component[static_cast<std::size_t>(s)] >= 0) continue;
        const NodeId c = static_cast<NodeId>(out.sizes.size());
        out.sizes.push_back(0);
        std::queue<NodeId> q;
        out.component[static_cast<std::size_t>(s)] = c;
        q.push(s);
        while (!q.empty()) {
            const NodeId v = q.front();
            q.pop();
            ++out.sizes[static_cast<std::size_t>(c)];
            for (const auto& [w, wt] : g.neighbors(v)) {
                if (out.component[static_cast<std::size_t>(w)] < 0) {
                    out.component[static_cast<std::size_t>(w)] = c;
                    q.push(w);
                }
            }
        }
    }
    for (NodeId c = 0; c < out.count(); ++c)
        if (out.gcc < 0 || out.sizes[static_cast<std::size_t>(c)] > out.sizes[static_cast<std::size_t>(out.gcc)])
            out.gcc = c;
    return out;
}

/** True iff removing (u, v) disconnects u from v. Throws if the edge is absent. */
template <typename Scalar>
bool isBridge(const Graph<Scalar>& g, NodeId u, NodeId v) {
    if (!g.hasEdge(u, v))
        throw std::invalid_argument("no edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    std::vector<char> seen(static_cast<std::size_t>(g.numNodes()), 0);
    std::queue<NodeId> q;
    seen[static_cast<std::size_t>(u)] = 1;
    q.push(u);
    while (!q.empty()) {
        const NodeId x = q.front();
        q.pop();
        for (const auto& [nb, w] : g.neighbors(x)) {
            if ((x == u && nb == v) || (x == v && nb == u)) continue; // skip the candidate edge itself
            if (!seen[static_cast<std::size_t>(nb)]) {
                if (nb == v) return false;
                seen[static_cast<std::size_t>(nb)] = 1;
                q.push(nb);
            }
        }
    }
    return true;
}

/** Node ids by decreasing weighted degree, ties by ascending id. */
template <typename Scalar>
std::vector<NodeId> degreeOrdering(const Graph<Scalar>& g) {
    std::vector<NodeId> order(static_cast<std::size_t>(g.numNodes()));
    std::iota(order.begin(), order.end(), NodeId(0));
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        const Scalar da = g.degree(a), db = g.degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    return order;
}

/**
 * Subgraph induced by `nodes`; local ids follow the order given.
 * Labels carry over, so the original identity of each row is recoverable.
 */
template <typename Scalar>
Graph<Scalar> inducedSubgraph(const Graph<Scalar>& g, const std::vector<NodeId>& nodes) {
    std::unordered_map<NodeId, NodeId> local;
    local.reserve(nodes.size());
    Graph<Scalar> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!local.emplace(nodes[i], static_cast<NodeId>(i)).second)
            throw std::invalid_argument("induced node set contains duplicates");
        out.addNode(g.label(nodes[i]));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (const auto& [nb, w] : g.neighbors(nodes[i])) {
            auto it = local.find(nb);
            if (it != local.end() && it->second > static_cast<NodeId>(i))
                out.addEdge(static_cast<NodeId>(i), it->second, w);
        }
    }
    return out;
}

namespace detail {

inline std::int64_t parseInt64Token(const std::string& tok, Index lineNo) {
    std::int64_t value = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError(lineNo, "expected integer node id, got '" + tok + "'");
    return value;
}

inline double parseWeightToken(const std::string& tok, Index lineNo) {
    double value = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError(lineNo, "expected numeric weight, got '" + tok + "'");
    return value;
}

} // namespace detail

/**
 * Reads an edge list: one `u v [w]` per line, `#` starts a comment line,
 * blank lines are skipped, and the weight defaults to 1. Arbitrary integer
 * node labels are compacted to dense ids in order of first appearance.
 * A pair listed twice (in either orientation) collapses to one undirected
 * edge and the first weight wins. Self-loops, non-positive weights and
 * malformed lines raise ParseError with the line number.
 */
inline Graph<double> parseEdgeList(std::istream& in) {
    Graph<double> g;
    std::unordered_map<std::int64_t, NodeId> ids;
    auto internId = [&](std::int64_t label) {
        auto [it, fresh] = ids.emplace(label, g.numNodes());
        if (fresh) g.addNode(label);
        return it->second;
    };

    std::string line;
    Index lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok.size() < 2 || tok.size() > 3)
            throw ParseError(lineNo, "expected 'u v [w]', got " + std::to_string(tok.size()) + " fields");
        const std::int64_t lu = detail::parseInt64Token(tok[0], lineNo);
        const std::int64_t lv = detail::parseInt64Token(tok[1], lineNo);
        if (lu == lv) throw ParseError(lineNo, "self-loop on node " + std::to_string(lu));
        const double w = tok.size() == 3 ? detail::parseWeightToken(tok[2], lineNo) : 1.0;
        if (!(w > 0)) throw ParseError(lineNo, "edge weight must be positive");
        const NodeId u = internId(lu);
        const NodeId v = internId(lv);
        if (!g.hasEdge(u, v)) g.addEdge(u, v, w); // repeated arc: first weight wins
    }
    return g;
}

/**
 * Writes the edge list using external labels, smaller endpoint first,
 * rows ascending. Unit weights are omitted; anything else is printed with
 * round-trip precision. Header comments go out first, one `# ` line each.
 */
template <typename Scalar>
void writeEdgeList(std::ostream& out, const Graph<Scalar>& g,
                   const std::vector<std::string>& headerComments = {}) {
    for (const auto& c : headerComments) out << "# " << c << '\n';
    struct Row {
        std::int64_t u, v;
        Scalar w;
    };
    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(g.numEdges()));
    for (const auto& e : g.edges()) {
        std::int64_t lu = g.label(e.u), lv = g.label(e.v);
        if (lv < lu) std::swap(lu, lv);
        rows.push_back({lu, lv, e.weight});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    const auto oldPrecision = out.precision(std::numeric_limits<Scalar>::max_digits10);
    for (const auto& r : rows) {
        out << r.u << ' ' << r.v;
        if (r.w != Scalar(1)) out << ' ' << r.w;
        out << '\n';
    }
    out.precision(oldPrecision);
}

} // namespace lapinc

#endif // LAPINC_GRAPH_HPP_
