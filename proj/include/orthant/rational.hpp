#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "orthant/errors.hpp"

namespace orthant {

typedef boost::multiprecision::mpq_rational Rational;
typedef boost::multiprecision::mpz_int Integer;

typedef Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic> MatrixXr;
typedef Eigen::Matrix<Rational, Eigen::Dynamic, 1> VectorXr;

inline double to_double(const Rational& r) {
    return r.template convert_to<double>();
}

inline Eigen::VectorXd to_double(const VectorXr& v) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out(i) = to_double(v(i));
    return out;
}

inline bool is_integer(const Rational& r) {
    return boost::multiprecision::denominator(r) == 1;
}

/**
 * Parse an exact rational from a string of the form "p", "-p", or "p/q".
 *
 * Whitespace around the token is ignored. Anything else (decimals,
 * exponents, empty strings) raises ParseError.
 */
inline Rational parse_rational(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t");
    std::size_t end = text.find_last_not_of(" \t");
    if (begin == std::string::npos)
        throw ParseError("empty rational literal");
    std::string tok = text.substr(begin, end - begin + 1);

    // Accept only an optional sign, digits, and at most one '/' separator.
    bool seen_slash = false;
    for (std::size_t i = 0; i < tok.size(); ++i) {
        char c = tok[i];
        if (c == '-' && (i == 0 || tok[i - 1] == '/'))
            continue;
        if (c == '/' && !seen_slash && i > 0 && i + 1 < tok.size()) {
            seen_slash = true;
            continue;
        }
        if (c < '0' || c > '9')
            throw ParseError("invalid rational literal: \"" + tok + "\"");
    }
    if (seen_slash) {
        std::string den = tok.substr(tok.find('/') + 1);
        if (!den.empty() && den[0] == '-')
            den.erase(0, 1);
        if (den.find_first_not_of('0') == std::string::npos)
            throw ParseError("zero denominator in rational literal: \"" + tok + "\"");
    }
    try {
        Rational r(tok);
        return r;
    } catch (const std::exception&) {
        throw ParseError("invalid rational literal: \"" + tok + "\"");
    }
}

// Canonical "p/q" (or plain "p" for integers) rendering.
inline std::string format_rational(const Rational& r) {
    return r.str();
}

/**
 * Convert a double to the exact rational it represents.  Every finite IEEE
 * double is a dyadic rational, so this conversion is lossless.
 */
inline Rational rational_from_double(double x) {
    return Rational(x);
}

namespace linalg {

/**
 * In-place reduced row echelon form over the rationals.
 *
 * Pivot selection is deterministic: columns are scanned left to right and the
 * first row with a nonzero entry is chosen.  Exactness of the arithmetic makes
 * magnitude-based pivoting unnecessary.
 *
 * @returns the pivot column indices, in ascending order.
 */
inline std::vector<Eigen::Index> rref(MatrixXr& A) {
    std::vector<Eigen::Index> pivots;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < A.cols() && row < A.rows(); ++col) {
        Eigen::Index sel = -1;
        for (Eigen::Index r = row; r < A.rows(); ++r) {
            if (A(r, col) != 0) { sel = r; break; }
        }
        if (sel < 0)
            continue;
        if (sel != row)
            A.row(sel).swap(A.row(row));
        A.row(row) /= A(row, col);
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            if (r != row && A(r, col) != 0)
                A.row(r) -= A(r, col) * A.row(row);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline int rank(MatrixXr A) {
    return static_cast<int>(rref(A).size());
}

// Stack vectors as matrix rows (rows may be empty; the column count then
// comes from `cols`).
inline MatrixXr rows_matrix(const std::vector<VectorXr>& rows, Eigen::Index cols) {
    MatrixXr A(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols)
            throw DimensionError("rows_matrix: inconsistent vector length");
        A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return A;
}

inline MatrixXr cols_matrix(const std::vector<VectorXr>& cols, Eigen::Index rows) {
    MatrixXr A(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows)
            throw DimensionError("cols_matrix: inconsistent vector length");
        A.col(static_cast<Eigen::Index>(j)) = cols[j];
    }
    return A;
}

/**
 * Deterministic basis of the kernel {x : A x = 0}.
 *
 * One basis vector per free (non-pivot) column, ordered by free column index;
 * each carries entry 1 at its free column and the back-substituted pivot
 * entries elsewhere.  The "first kernel vector" is therefore a well-defined
 * object, which downstream decompositions rely on.
 */
inline std::vector<VectorXr> kernel_basis(MatrixXr A) {
    const Eigen::Index n = A.cols();
    std::vector<Eigen::Index> pivots = rref(A);
    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (Eigen::Index p : pivots)
        is_pivot[static_cast<std::size_t>(p)] = true;

    std::vector<VectorXr> basis;
    for (Eigen::Index f = 0; f < n; ++f) {
        if (is_pivot[static_cast<std::size_t>(f)])
            continue;
        VectorXr v = VectorXr::Zero(n);
        v(f) = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i)
            v(pivots[i]) = -A(static_cast<Eigen::Index>(i), f);
        basis.push_back(v);
    }
    return basis;
}

/**
 * Solve A x = b exactly.  Returns std::nullopt when the system is
 * inconsistent; otherwise the particular solution with all free variables
 * set to zero (the unique solution when A has full column rank).
 */
inline std::optional<VectorXr> solve(const MatrixXr& A, const VectorXr& b) {
    if (A.rows() != b.size())
        throw DimensionError("solve: rhs length mismatch");
    MatrixXr aug(A.rows(), A.cols() + 1);
    aug.leftCols(A.cols()) = A;
    aug.col(A.cols()) = b;
    std::vector<Eigen::Index> pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == A.cols())
        return std::nullopt;
    VectorXr x = VectorXr::Zero(A.cols());
    for (std::size_t i = 0; i < pivots.size(); ++i)
        x(pivots[i]) = aug(static_cast<Eigen::Index>(i), A.cols());
    return x;
}

// Exact inverse of a square matrix, or nullopt if singular.
inline std::optional<MatrixXr> invert(const MatrixXr& A) {
    if (A.rows() != A.cols())
        throw DimensionError("invert: matrix not square");
    const Eigen::Index n = A.rows();
    MatrixXr aug(n, 2 * n);
    aug.leftCols(n) = A;
    aug.rightCols(n) = MatrixXr::Identity(n, n);
    std::vector<Eigen::Index> pivots = rref(aug);
    if (static_cast<Eigen::Index>(pivots.size()) < n || pivots.back() >= n)
        return std::nullopt;
    return MatrixXr(aug.rightCols(n));
}

// Induced 1-norm: maximum column sum of absolute values.
inline Rational norm1(const MatrixXr& A) {
    Rational best = 0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        Rational s = 0;
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            s += boost::multiprecision::abs(A(i, j));
        if (s > best)
            best = s;
    }
    return best;
}

inline Rational norm1(const VectorXr& v) {
    Rational s = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += boost::multiprecision::abs(v(i));
    return s;
}

inline bool independent(const std::vector<VectorXr>& vecs, Eigen::Index dim) {
    if (vecs.empty())
        return true;
    return rank(rows_matrix(vecs, dim)) == static_cast<int>(vecs.size());
}

// Membership of v in the linear span of `span`, by an exact rank test.
inline bool in_span(const std::vector<VectorXr>& span, const VectorXr& v) {
    if (span.empty())
        return v.isZero();
    MatrixXr A = rows_matrix(span, v.size());
    int r = rank(A);
    MatrixXr B(A.rows() + 1, A.cols());
    B.topRows(A.rows()) = A;
    B.row(A.rows()) = v.transpose();
    return rank(B) == r;
}

} // namespace linalg
} // namespace orthant
