#ifndef LAPINC_MATRIX_IO_HPP_
#define LAPINC_MATRIX_IO_HPP_

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <lapinc/graph.hpp>
#include <lapinc/laplacian.hpp>
#include <lapinc/types.hpp>

namespace lapinc {

/**
 * Symmetric matrix text format: a `# sym n=<n>` header line followed by n
 * rows of n space-separated values at round-trip precision.
 */
template <typename Derived>
void writeSymMatrix(std::ostream& out, const Eigen::MatrixBase<Derived>& M) {
    using Scalar = typename Derived::Scalar;
    const Index n = M.rows();
    if (M.rows() != M.cols()) throw std::invalid_argument("matrix must be square");
    const auto oldPrecision = out.precision(std::numeric_limits<Scalar>::max_digits10);
    out << "# sym n=" << n << '\n';
    for (Index x = 0; x < n; ++x) {
        for (Index y = 0; y < n; ++y) {
            if (y) out << ' ';
            out << M(x, y);
        }
        out << '\n';
    }
    out.precision(oldPrecision);
}

/** Reads the format above; symmetry is validated, not assumed. */
inline DenseMatrix<double> readSymMatrix(std::istream& in) {
    std::string line;
    Index lineNo = 0;
    // header: first non-blank line must be `# sym n=<n>`
    Index n = -1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string hash, sym, dim;
        if (!(ss >> hash)) continue; // blank
        ss >> sym >> dim;
        if (hash != "#" || sym != "sym" || dim.rfind("n=", 0) != 0)
            throw ParseError(lineNo, "expected '# sym n=<n>' header");
        try {
            n = static_cast<Index>(std::stoll(dim.substr(2)));
        } catch (const std::exception&) {
            throw ParseError(lineNo, "bad dimension in header");
        }
        if (n < 1) throw ParseError(lineNo, "dimension must be positive");
        break;
    }
    if (n < 0) throw ParseError(lineNo, "missing '# sym n=<n>' header");

    DenseMatrix<double> M(n, n);
    for (Index x = 0; x < n; ++x) {
        if (!std::getline(in, line)) throw ParseError(lineNo, "unexpected end of matrix data");
        ++lineNo;
        std::istringstream ss(line);
        for (Index y = 0; y < n; ++y) {
            if (!(ss >> M(x, y))) throw ParseError(lineNo, "expected " + std::to_string(n) + " values in row");
        }
        double extra;
        if (ss >> extra) throw ParseError(lineNo, "too many values in row");
    }

    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if (maxAsymmetry(M) > tol::kSymmetryRead * scale)
        throw std::domain_error("matrix file is not symmetric within tolerance");
    return M;
}

} // namespace lapinc

#endif // LAPINC_MATRIX_IO_HPP_
