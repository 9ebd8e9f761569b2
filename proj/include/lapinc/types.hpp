#ifndef LAPINC_TYPES_HPP_
#define LAPINC_TYPES_HPP_

#include <Eigen/Dense>

namespace lapinc {

using Index = Eigen::Index;

/** Internal node id, dense in [0, numNodes()). */
using NodeId = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/** Tolerances enforced by the library itself (test-side bounds live in the tests). */
namespace tol {

/** Row sums of a pseudo-inverse must stay below this times n. */
inline constexpr double kCenteringPerNode = 1e-9;

/** Symmetry validation bound for the matrix text format. */
inline constexpr double kSymmetryRead = 1e-9;

/** |omega - Omega| below this times omega marks an edge as a suspected bridge. */
inline constexpr double kBridgeRel = 1e-9;

/** Diagonal entries at or below this are treated as degenerate for centrality. */
inline constexpr double kDiagonalFloor = 1e-12;

/** Automatic refresh once the update counter reaches this times the node count. */
inline constexpr Index kRefreshUpdatesPerNode = 10;

/** Automatic refresh once a component's row-sum drift exceeds this times its size. */
inline constexpr double kDriftPerNode = 1e-7;

/** Verification bound for the four pseudo-inverse conditions. */
inline constexpr double kMoorePenrose = 1e-8;

/** Acceptable final drift when verifying a replayed event sequence. */
inline constexpr double kVerifyDrift = 1e-6;

} // namespace tol

} // namespace lapinc

#endif // LAPINC_TYPES_HPP_
