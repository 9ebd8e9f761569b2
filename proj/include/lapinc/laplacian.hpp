#ifndef LAPINC_LAPLACIAN_HPP_
#define LAPINC_LAPLACIAN_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include <lapinc/graph.hpp>
#include <lapinc/types.hpp>

namespace lapinc {

/**
 * Combinatorial Laplacian: off-diagonal entries are negated edge weights and
 * each diagonal entry is the negated sum of its off-diagonal row, so every
 * row cancels to zero exactly.
 */
template <typename Scalar>
DenseMatrix<Scalar> laplacian(const Graph<Scalar>& g) {
    const Index n = g.numNodes();
    DenseMatrix<Scalar> L = DenseMatrix<Scalar>::Zero(n, n);
    for (NodeId v = 0; v < n; ++v) {
        Scalar offDiagSum = 0;
        for (const auto& [nb, w] : g.neighbors(v)) {
            L(v, nb) = -w;
            offDiagSum += -w;
        }
        L(v, v) = -offDiagSum;
    }
    return L;
}

template <typename Derived>
typename Derived::Scalar maxAbsRowSum(const Eigen::MatrixBase<Derived>& m) {
    return m.rowwise().sum().cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar maxAsymmetry(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    Scalar worst = 0;
    for (Index x = 0; x < m.rows(); ++x)
        for (Index y = x + 1; y < m.cols(); ++y)
            worst = std::max(worst, std::abs(m(x, y) - m(y, x)));
    return worst;
}

/**
 * Pseudo-inverse over one connected component: shift by the rank-one all-ones
 * term, invert the resulting positive definite matrix with a Cholesky
 * factorization, shift back. Disconnected input surfaces either as a failed
 * factorization or as a result that is no longer doubly centered; both raise
 * std::domain_error. Eigendecompositions are deliberately avoided.
 */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> pinvBaseline(const Eigen::MatrixBase<Derived>& L) {
    using Scalar = typename Derived::Scalar;
    const Index n = L.rows();
    if (n < 1) throw std::invalid_argument("empty Laplacian");
    if (L.rows() != L.cols()) throw std::invalid_argument("Laplacian must be square");
    if (n == 1) return DenseMatrix<Scalar>::Zero(1, 1);

    const Scalar invN = Scalar(1) / Scalar(n);
    DenseMatrix<Scalar> shifted = L;
    shifted.array() += invN;
    Eigen::LLT<DenseMatrix<Scalar>> llt(shifted);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("factorization failed: input is not the Laplacian of a connected graph");

    DenseMatrix<Scalar> P = llt.solve(DenseMatrix<Scalar>::Identity(n, n));
    P.array() -= invN;
    P = ((P + P.transpose()) * Scalar(0.5)).eval(); // symmetry exact from here on
    if (maxAbsRowSum(P) > Scalar(tol::kCenteringPerNode) * Scalar(n))
        throw std::domain_error("result is not doubly centered: input graph is likely disconnected");
    return P;
}

/** Pairwise effective resistances read off a pseudo-inverse. */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> resistanceMatrix(const Eigen::MatrixBase<Derived>& P) {
    using Scalar = typename Derived::Scalar;
    const Index n = P.rows();
    if (P.rows() != P.cols()) throw std::invalid_argument("matrix must be square");
    const auto& p = P.derived();
    DenseMatrix<Scalar> omega(n, n);
    for (Index x = 0; x < n; ++x) {
        omega(x, x) = Scalar(0);
        for (Index y = x + 1; y < n; ++y) {
            const Scalar o = p(x, x) + p(y, y) - p(x, y) - p(y, x);
            omega(x, y) = o;
            omega(y, x) = o;
        }
    }
    return omega;
}

/**
 * Pseudo-inverse recovered from pairwise resistances alone. This is the
 * second, independent route to the same matrix and serves as the oracle for
 * everything the direct route produces. The input must be hollow (zero
 * diagonal) and symmetric.
 */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> pinvFromResistances(const Eigen::MatrixBase<Derived>& Omega) {
    using Scalar = typename Derived::Scalar;
    const Index n = Omega.rows();
    if (Omega.rows() != Omega.cols()) throw std::invalid_argument("matrix must be square");
    if (n < 1) throw std::invalid_argument("empty resistance matrix");
    const auto& om = Omega.derived();

    const Scalar scale = std::max(Scalar(1), om.cwiseAbs().maxCoeff());
    if (om.diagonal().cwiseAbs().maxCoeff() > Scalar(tol::kSymmetryRead) * scale)
        throw std::domain_error("resistance matrix must have a zero diagonal");
    if (maxAsymmetry(om) > Scalar(tol::kSymmetryRead) * scale)
        throw std::domain_error("resistance matrix must be symmetric");

    const DenseVector<Scalar> rowSum = om.rowwise().sum();
    const Scalar total = rowSum.sum();
    const Scalar nS = Scalar(n);
    const Scalar shift = total / (Scalar(2) * nS * nS);
    DenseMatrix<Scalar> P(n, n);
    for (Index x = 0; x < n; ++x) {
        for (Index y = x; y < n; ++y) {
            const Scalar v = (rowSum(x) + rowSum(y) - nS * om(x, y)) / (Scalar(2) * nS) - shift;
            P(x, y) = v;
            P(y, x) = v;
        }
    }
    return P;
}

/** Closed-form pseudo-inverse of the unit-weight star on n nodes. */
template <typename Scalar = double>
DenseMatrix<Scalar> starPinv(Index n, NodeId root = 0) {
    if (n < 2) throw std::domain_error("star needs n >= 2");
    if (root < 0 || root >= n) throw std::out_of_range("root out of range");
    const Scalar n2 = Scalar(n) * Scalar(n);
    const Scalar rootDiag = Scalar(n - 1) / n2;
    const Scalar rootLeaf = Scalar(-1) / n2;
    const Scalar leafDiag = (n2 - Scalar(n) - Scalar(1)) / n2;
    const Scalar leafOff = -(Scalar(n) + Scalar(1)) / n2;
    DenseMatrix<Scalar> P = DenseMatrix<Scalar>::Constant(n, n, leafOff);
    P.row(root).setConstant(rootLeaf);
    P.col(root).setConstant(rootLeaf);
    P.diagonal().setConstant(leafDiag);
    P(root, root) = rootDiag;
    return P;
}

/** Closed-form pseudo-inverse of the unit-weight complete graph on n nodes. */
template <typename Scalar = double>
DenseMatrix<Scalar> cliquePinv(Index n) {
    if (n < 2) throw std::domain_error("clique needs n >= 2");
    const Scalar n2 = Scalar(n) * Scalar(n);
    DenseMatrix<Scalar> P = DenseMatrix<Scalar>::Constant(n, n, Scalar(-1) / n2);
    P.diagonal().setConstant(Scalar(n - 1) / n2);
    return P;
}

/**
 * Inverse of the Laplacian submatrix obtained by deleting row and column
 * `removed`, assembled entrywise from the pseudo-inverse without a second
 * factorization.
 */
template <typename Derived>
DenseMatrix<typename Derived::Scalar> submatrixInverse(const Eigen::MatrixBase<Derived>& P, NodeId removed) {
    using Scalar = typename Derived::Scalar;
    const Index n = P.rows();
    if (P.rows() != P.cols()) throw std::invalid_argument("matrix must be square");
    if (removed < 0 || removed >= n) throw std::out_of_range("removed node out of range");
    if (n < 2) throw std::invalid_argument("nothing remains after removal");
    const auto& p = P.derived();
    DenseMatrix<Scalar> M(n - 1, n - 1);
    auto orig = [removed](Index a) { return a < removed ? a : a + 1; };
    for (Index a = 0; a < n - 1; ++a) {
        const Index x = orig(a);
        for (Index b = a; b < n - 1; ++b) {
            const Index y = orig(b);
            const Scalar v = p(x, y) - p(x, removed) - p(removed, y) + p(removed, removed);
            M(a, b) = v;
            M(b, a) = v;
        }
    }
    return M;
}

/** Trace of the pseudo-inverse; global connectivity index of the graph. */
template <typename Derived>
typename Derived::Scalar kirchhoffIndex(const Eigen::MatrixBase<Derived>& P) {
    return P.trace();
}

/**
 * Reciprocal diagonal of the pseudo-inverse; larger means more central.
 * Raises std::domain_error when a diagonal entry is not meaningfully positive.
 */
template <typename Derived>
DenseVector<typename Derived::Scalar> topologicalCentrality(const Eigen::MatrixBase<Derived>& P) {
    using Scalar = typename Derived::Scalar;
    const Index n = P.rows();
    DenseVector<Scalar> c(n);
    for (Index x = 0; x < n; ++x) {
        const Scalar d = P(x, x);
        if (!(d > Scalar(tol::kDiagonalFloor)))
            throw std::domain_error("degenerate diagonal entry at node " + std::to_string(x));
        c(x) = Scalar(1) / d;
    }
    return c;
}

/** Expected round-trip length of the random walk between two distinct nodes. */
template <typename Derived>
typename Derived::Scalar commuteTime(const Eigen::MatrixBase<Derived>& P,
                                     typename Derived::Scalar volume, NodeId x, NodeId y) {
    using Scalar = typename Derived::Scalar;
    if (x == y) throw std::domain_error("commute time needs two distinct nodes");
    if (x < 0 || y < 0 || x >= P.rows() || y >= P.rows()) throw std::out_of_range("node out of range");
    const auto& p = P.derived();
    return volume * (p(x, x) + p(y, y) - Scalar(2) * p(x, y));
}

/** Residuals of the four defining pseudo-inverse conditions. */
template <typename Scalar>
struct MoorePenroseResiduals {
    Scalar lpl;   // L P L = L
    Scalar plp;   // P L P = P
    Scalar lpSym; // (L P) symmetric
    Scalar plSym; // (P L) symmetric

    Scalar max() const { return std::max(std::max(lpl, plp), std::max(lpSym, plSym)); }
};

template <typename D1, typename D2>
MoorePenroseResiduals<typename D1::Scalar> moorePenroseResiduals(const Eigen::MatrixBase<D1>& L,
                                                                 const Eigen::MatrixBase<D2>& P) {
    using Scalar = typename D1::Scalar;
    const DenseMatrix<Scalar> LP = L * P;
    const DenseMatrix<Scalar> PL = P * L;
    MoorePenroseResiduals<Scalar> r;
    r.lpl = (LP * L - L.derived()).cwiseAbs().maxCoeff();
    r.plp = (PL * P - P.derived()).cwiseAbs().maxCoeff();
    r.lpSym = (LP - LP.transpose()).cwiseAbs().maxCoeff();
    r.plSym = (PL - PL.transpose()).cwiseAbs().maxCoeff();
    return r;
}

} // namespace lapinc

#endif // LAPINC_LAPLACIAN_HPP_
