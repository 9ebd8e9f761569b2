#ifndef LAPINC_UPDATE_HPP_
#define LAPINC_UPDATE_HPP_

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <lapinc/types.hpp>

namespace lapinc {

/**
 * Raised when an edge submitted for non-bridge deletion has an effective
 * resistance equal to its own resistance within tolerance, which is the
 * algebraic signature of a bridge. The structural bridge test stays
 * authoritative; this error is the numerical cross-check firing.
 */
class BridgeSuspectedError : public std::domain_error {
public:
    explicit BridgeSuspectedError(const std::string& what) : std::domain_error(what) {}
};

/** Where two components get tied together: node i in part 1, node j in part 2. */
template <typename Scalar = double>
struct JoinSpec {
    NodeId i = 0;
    NodeId j = 0;
    Scalar resistance = Scalar(1);
    Index n1 = 0;
    Index n2 = 0;
};

namespace detail {

template <typename Derived>
void requireSquare(const Eigen::MatrixBase<Derived>& m, const char* name) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(name) + " must be square");
}

template <typename Derived>
void requireEndpoints(const Eigen::MatrixBase<Derived>& m, NodeId i, NodeId j,
                      typename Derived::Scalar resistance) {
    if (i < 0 || j < 0 || i >= m.rows() || j >= m.rows()) throw std::out_of_range("endpoint out of range");
    if (i == j) throw std::invalid_argument("endpoints must be distinct");
    if (!(resistance > 0)) throw std::invalid_argument("edge resistance must be positive");
}

} // namespace detail

/**
 * Pseudo-inverse of two components tied together by one new edge. Part 1
 * occupies the leading block of the result, part 2 the trailing block; the
 * new edge runs from local node spec.i to local node spec.j and has
 * resistance spec.resistance. Every entry is a closed-form combination of
 * the two input matrices, so the cost is one pass over the output.
 */
template <typename D1, typename D2>
DenseMatrix<typename D1::Scalar> firstJoin(const Eigen::MatrixBase<D1>& P1,
                                           const Eigen::MatrixBase<D2>& P2,
                                           const JoinSpec<typename D1::Scalar>& spec) {
    using Scalar = typename D1::Scalar;
    detail::requireSquare(P1, "part 1");
    detail::requireSquare(P2, "part 2");
    const Index n1 = P1.rows(), n2 = P2.rows();
    if (spec.n1 != n1 || spec.n2 != n2)
        throw std::invalid_argument("join spec dimensions do not match the part matrices");
    if (spec.i < 0 || spec.i >= n1 || spec.j < 0 || spec.j >= n2)
        throw std::out_of_range("join endpoint out of range");
    if (!(spec.resistance > 0)) throw std::invalid_argument("edge resistance must be positive");

    const auto& p1 = P1.derived();
    const auto& p2 = P2.derived();
    const Scalar S = p1(spec.i, spec.i) + p2(spec.j, spec.j) + spec.resistance;
    const Scalar a1 = Scalar(n1), a2 = Scalar(n2), a3 = Scalar(n1 + n2);
    const Scalar den = a3 * a3;

    DenseMatrix<Scalar> out(n1 + n2, n1 + n2);
    for (Index x = 0; x < n1; ++x) {
        for (Index y = x; y < n1; ++y) {
            const Scalar v =
                p1(x, y) - (a2 * a3 * (p1(x, spec.i) + p1(spec.i, y)) - a2 * a2 * S) / den;
            out(x, y) = v;
            out(y, x) = v;
        }
    }
    for (Index x = 0; x < n2; ++x) {
        for (Index y = x; y < n2; ++y) {
            const Scalar v =
                p2(x, y) - (a1 * a3 * (p2(x, spec.j) + p2(spec.j, y)) - a1 * a1 * S) / den;
            out(n1 + x, n1 + y) = v;
            out(n1 + y, n1 + x) = v;
        }
    }
    for (Index x = 0; x < n1; ++x) {
        for (Index y = 0; y < n2; ++y) {
            const Scalar v = (a3 * (a1 * p1(x, spec.i) + a2 * p2(spec.j, y)) - a1 * a2 * S) / den;
            out(x, n1 + y) = v;
            out(n1 + y, x) = v;
        }
    }
#ifndef NDEBUG
    // trace bookkeeping must close: Tr(out) = Tr(P1) + Tr(P2) + n1 n2 / n3 * S
    const Scalar expected = p1.trace() + p2.trace() + a1 * a2 / a3 * S;
    assert(std::abs(out.trace() - expected) <=
           Scalar(1e-10) * std::max(Scalar(1), std::abs(expected)));
#endif
    return out;
}

/**
 * Rank-one update for a new edge (i, j) inside one component. The edge must
 * be absent from the underlying graph; that precondition is owned by the
 * caller since the matrix alone cannot express it.
 */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> fireEdge(const Eigen::MatrixBase<Derived>& P, NodeId i, NodeId j,
                                               typename Derived::Scalar resistance) {
    using Scalar = typename Derived::Scalar;
    detail::requireSquare(P, "pseudo-inverse");
    detail::requireEndpoints(P, i, j, resistance);
    const auto& p = P.derived();
    const Scalar omegaIJ = p(i, i) + p(j, j) - p(i, j) - p(j, i);
    const Scalar denom = resistance + omegaIJ;
    DenseMatrix<Scalar> out = p;
    const DenseVector<Scalar> d = out.col(i) - out.col(j);
    out.noalias() -= d * d.transpose() / denom;
    return out;
}

/** The same new-edge update carried out directly on the resistance matrix. */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> fireEdgeResistances(const Eigen::MatrixBase<Derived>& Omega,
                                                          NodeId i, NodeId j,
                                                          typename Derived::Scalar resistance) {
    using Scalar = typename Derived::Scalar;
    detail::requireSquare(Omega, "resistance matrix");
    detail::requireEndpoints(Omega, i, j, resistance);
    const auto& om = Omega.derived();
    const Index n = om.rows();
    const Scalar denom4 = Scalar(4) * (resistance + om(i, j));
    const DenseVector<Scalar> a = om.col(j) - om.col(i);
    DenseMatrix<Scalar> out(n, n);
    for (Index x = 0; x < n; ++x) {
        for (Index y = x; y < n; ++y) {
            const Scalar diff = a(x) - a(y);
            const Scalar v = om(x, y) - diff * diff / denom4;
            out(x, y) = v;
            out(y, x) = v;
        }
    }
    return out;
}

/**
 * Rank-one downdate removing edge (i, j) when the rest of the component still
 * connects its endpoints. At a bridge the update denominator vanishes, so
 * that case raises BridgeSuspectedError instead of dividing by noise.
 */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> deleteNonBridge(const Eigen::MatrixBase<Derived>& P, NodeId i,
                                                      NodeId j, typename Derived::Scalar resistance) {
    using Scalar = typename Derived::Scalar;
    detail::requireSquare(P, "pseudo-inverse");
    detail::requireEndpoints(P, i, j, resistance);
    const auto& p = P.derived();
    const Scalar omegaIJ = p(i, i) + p(j, j) - p(i, j) - p(j, i);
    const Scalar denom = resistance - omegaIJ;
    if (denom <= Scalar(tol::kBridgeRel) * resistance)
        throw BridgeSuspectedError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                   ") carries its full resistance: removing it would disconnect");
    DenseMatrix<Scalar> out = p;
    const DenseVector<Scalar> d = out.col(i) - out.col(j);
    out.noalias() += d * d.transpose() / denom;
    return out;
}

/** The same deletion carried out directly on the resistance matrix. */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> deleteEdgeResistances(const Eigen::MatrixBase<Derived>& Omega,
                                                            NodeId i, NodeId j,
                                                            typename Derived::Scalar resistance) {
    using Scalar = typename Derived::Scalar;
    detail::requireSquare(Omega, "resistance matrix");
    detail::requireEndpoints(Omega, i, j, resistance);
    const auto& om = Omega.derived();
    const Index n = om.rows();
    const Scalar denom = resistance - om(i, j);
    if (denom <= Scalar(tol::kBridgeRel) * resistance)
        throw BridgeSuspectedError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                   ") carries its full resistance: removing it would disconnect");
    const Scalar denom4 = Scalar(4) * denom;
    const DenseVector<Scalar> a = om.col(j) - om.col(i);
    DenseMatrix<Scalar> out(n, n);
    for (Index x = 0; x < n; ++x) {
        for (Index y = x; y < n; ++y) {
            const Scalar diff = a(x) - a(y);
            const Scalar v = om(x, y) + diff * diff / denom4;
            out(x, y) = v;
            out(y, x) = v;
        }
    }
    return out;
}

/**
 * Removes a bridge given the exact two-sided split of the component, and
 * returns the pseudo-inverses of both remaining components in the order the
 * sides were passed. Local indices in each output ascend by old index.
 */
template <typename Derived>
std::pair<DenseMatrix<typename Derived::Scalar>, DenseMatrix<typename Derived::Scalar>>
deleteBridge(const Eigen::MatrixBase<Derived>& P, const std::vector<NodeId>& side2,
             const std::vector<NodeId>& side3) {
    using Scalar = typename Derived::Scalar;
    detail::requireSquare(P, "pseudo-inverse");
    const Index n = P.rows();
    if (side2.empty() || side3.empty()) throw std::invalid_argument("both sides must be non-empty");
    if (static_cast<Index>(side2.size() + side3.size()) != n)
        throw std::invalid_argument("sides must cover the component");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const auto& side : {side2, side3})
        for (NodeId v : side) {
            if (v < 0 || v >= n) throw std::out_of_range("side node out of range");
            if (seen[static_cast<std::size_t>(v)]++) throw std::invalid_argument("sides overlap");
        }

    const auto& p = P.derived();
    auto extract = [&](std::vector<NodeId> side) {
        std::sort(side.begin(), side.end());
        const Index nV = static_cast<Index>(side.size());
        DenseMatrix<Scalar> sub(nV, nV);
        for (Index a = 0; a < nV; ++a)
            for (Index b = 0; b < nV; ++b) sub(a, b) = p(side[a], side[b]);
        const DenseVector<Scalar> s = sub.rowwise().sum();
        const Scalar T = s.sum();
        const Scalar nS = Scalar(nV);
        DenseMatrix<Scalar> out(nV, nV);
        for (Index a = 0; a < nV; ++a) {
            for (Index b = a; b < nV; ++b) {
                const Scalar v = sub(a, b) - (nS * (s(a) + s(b)) - T) / (nS * nS);
                out(a, b) = v;
                out(b, a) = v;
            }
        }
#ifndef NDEBUG
        // the restricted trace identity must close on each side
        const Scalar expected = sub.trace() - T / nS;
        assert(std::abs(out.trace() - expected) <=
               Scalar(1e-10) * std::max(Scalar(1), std::abs(expected)));
#endif
        return out;
    };
    return {extract(side2), extract(side3)};
}

} // namespace lapinc

#endif // LAPINC_UPDATE_HPP_
