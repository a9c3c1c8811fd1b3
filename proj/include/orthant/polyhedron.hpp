#pragma once

#include <utility>

#include "orthant/lp.hpp"

namespace orthant {

/**
 * A polyhedron in standard form,
 *
 *   P = { x in R^n : x >= 0,  sum_i x_i C_i = b },
 *
 * described by its n columns C_i in R^m and the right-hand side b.  A point
 * of P is a *vertex* when its active columns (those with x_i > 0) are
 * linearly independent, and *minimal* when no y in P with y <= x, y != x
 * exists; minimality is equivalent to positive independence of the active
 * columns.  Minimal points are exactly the convex combinations of vertices.
 */
struct StandardPolyhedron {
    Eigen::Index m = 0;
    Eigen::Index n = 0;
    std::vector<VectorXr> columns;
    VectorXr b;
};

inline StandardPolyhedron make_polyhedron(std::vector<VectorXr> columns, VectorXr b) {
    StandardPolyhedron p;
    p.m = b.size();
    p.n = static_cast<Eigen::Index>(columns.size());
    if (p.m < 1)
        throw DomainError("polyhedron: b must have at least one row");
    if (p.n < p.m)
        throw DomainError("polyhedron: fewer columns than rows");
    for (const VectorXr& c : columns)
        if (c.size() != p.m)
            throw DimensionError("polyhedron: column length mismatch");
    p.columns = std::move(columns);
    p.b = std::move(b);
    return p;
}

inline bool contains(const StandardPolyhedron& p, const VectorXr& x) {
    if (x.size() != p.n)
        throw DimensionError("polyhedron: point length mismatch");
    VectorXr acc = VectorXr::Zero(p.m);
    for (Eigen::Index i = 0; i < p.n; ++i) {
        if (x(i) < 0)
            return false;
        if (x(i) != 0)
            acc += x(i) * p.columns[static_cast<std::size_t>(i)];
    }
    return acc == p.b;
}

namespace detail {

inline void require_member(const StandardPolyhedron& p, const VectorXr& x,
                           const char* who) {
    if (!contains(p, x))
        throw NotInPError(std::string(who) + ": point is not in the polyhedron");
}

} // namespace detail

// Indices of the strictly positive coordinates, ascending (0-based).
inline std::vector<int> active_set(const StandardPolyhedron& p, const VectorXr& x) {
    detail::require_member(p, x, "active_set");
    std::vector<int> act;
    for (Eigen::Index i = 0; i < p.n; ++i)
        if (x(i) > 0)
            act.push_back(static_cast<int>(i));
    return act;
}

inline bool is_vertex(const StandardPolyhedron& p, const VectorXr& x) {
    std::vector<int> act = active_set(p, x);
    if (act.empty())
        return true; // x = 0, possible only when b = 0
    std::vector<VectorXr> cols;
    for (int i : act)
        cols.push_back(p.columns[static_cast<std::size_t>(i)]);
    return linalg::independent(cols, p.m);
}

namespace detail {

/**
 * Feasible point of {u >= 0 on the active set, sum u_i C_i = 0, sum u_i = 1},
 * i.e. a certificate that the active columns are positively dependent, or
 * std::nullopt when they are positively independent.  The certificate is a
 * vertex of that polytope and deterministic (Bland's rule).
 */
inline std::optional<VectorXr> cancellation(const StandardPolyhedron& p,
                                            const std::vector<int>& act) {
    if (act.empty())
        return std::nullopt;
    const Eigen::Index kk = static_cast<Eigen::Index>(act.size());
    LinearProgram lp;
    lp.objective = VectorXr::Zero(kk);
    lp.lhs = MatrixXr::Zero(p.m + 1, kk);
    lp.rhs = VectorXr::Zero(p.m + 1);
    lp.senses.assign(static_cast<std::size_t>(p.m + 1), Sense::EQ);
    lp.bounds.assign(static_cast<std::size_t>(kk), VarBound::NonNegative);
    for (Eigen::Index j = 0; j < kk; ++j)
        lp.lhs.col(j).head(p.m) =
            p.columns[static_cast<std::size_t>(act[static_cast<std::size_t>(j)])];
    lp.lhs.row(p.m).setConstant(1);
    lp.rhs(p.m) = 1;

    LpSolution sol = solve(lp);
    if (!sol.optimal())
        return std::nullopt;
    VectorXr u = VectorXr::Zero(p.n);
    for (Eigen::Index j = 0; j < kk; ++j)
        u(act[static_cast<std::size_t>(j)]) = sol.point(j);
    return u;
}

} // namespace detail

inline bool is_minimal(const StandardPolyhedron& p, const VectorXr& x) {
    std::vector<int> act = active_set(p, x);
    return !detail::cancellation(p, act).has_value();
}

/**
 * Walk from x down to a minimal point y <= x of P by repeatedly cancelling a
 * positive dependence among the active columns: with u >= 0, sum u_i C_i = 0
 * and t0 = min{x_i / u_i : u_i > 0}, the point x - t0 u stays in P and loses
 * at least one active index.  Terminates in at most n steps.
 */
inline VectorXr reduce_to_minimal(const StandardPolyhedron& p, VectorXr x) {
    detail::require_member(p, x, "reduce_to_minimal");
    for (;;) {
        std::vector<int> act;
        for (Eigen::Index i = 0; i < p.n; ++i)
            if (x(i) > 0)
                act.push_back(static_cast<int>(i));
        std::optional<VectorXr> u = detail::cancellation(p, act);
        if (!u)
            return x;
        bool first = true;
        Rational t0 = 0;
        for (Eigen::Index i = 0; i < p.n; ++i) {
            if ((*u)(i) > 0) {
                Rational ratio = x(i) / (*u)(i);
                if (first || ratio < t0) { t0 = ratio; first = false; }
            }
        }
        x -= t0 * (*u);
        // Exact arithmetic guarantees the argmin coordinate lands on zero.
    }
}

/**
 * Decompose a minimal point into the convex combination of vertices promised
 * by the minimal-point structure theorem.  A non-vertex minimal point has
 * linearly dependent active columns; the first vector u of the deterministic
 * kernel basis of those columns (sign-fixed so its leading nonzero entry is
 * positive, and carrying entries of both signs by positive independence)
 * splits y into
 *
 *   x+ = y + t+ u,  t+ = min{-y_i/u_i : u_i < 0},
 *   x- = y - t- u,  t- = min{ y_i/u_i : u_i > 0},
 *
 * with (t+ + t-) y = t+ x- + t- x+, and both parts are minimal with strictly
 * smaller active sets, so the recursion reaches vertices in at most n levels.
 *
 * @returns (vertex, weight) pairs, weights summing to exactly 1, duplicate
 *          vertices merged, in first-reached depth-first order.
 */
inline std::vector<std::pair<VectorXr, Rational>>
decompose_minimal(const StandardPolyhedron& p, const VectorXr& y0) {
    detail::require_member(p, y0, "decompose_minimal");
    if (!is_minimal(p, y0))
        throw NotMinimalError("decompose_minimal: point is not minimal");

    std::vector<std::pair<VectorXr, Rational>> out;
    auto add = [&out](const VectorXr& v, const Rational& w) {
        for (auto& entry : out)
            if (entry.first == v) { entry.second += w; return; }
        out.emplace_back(v, w);
    };

    // Explicit stack, plus-branch explored first.
    std::vector<std::pair<VectorXr, Rational>> todo;
    todo.emplace_back(y0, Rational(1));
    while (!todo.empty()) {
        auto [y, w] = todo.back();
        todo.pop_back();

        std::vector<int> act;
        for (Eigen::Index i = 0; i < p.n; ++i)
            if (y(i) > 0)
                act.push_back(static_cast<int>(i));
        std::vector<VectorXr> cols;
        for (int i : act)
            cols.push_back(p.columns[static_cast<std::size_t>(i)]);
        if (linalg::independent(cols, p.m)) {
            add(y, w);
            continue;
        }

        std::vector<VectorXr> kern =
            linalg::kernel_basis(linalg::cols_matrix(cols, p.m));
        VectorXr u = VectorXr::Zero(p.n);
        for (std::size_t j = 0; j < act.size(); ++j)
            u(act[j]) = kern.front()(static_cast<Eigen::Index>(j));
        for (Eigen::Index i = 0; i < p.n; ++i) {
            if (u(i) != 0) {
                if (u(i) < 0)
                    u = -u;
                break;
            }
        }

        bool first_p = true, first_m = true;
        Rational tplus = 0, tminus = 0;
        for (Eigen::Index i = 0; i < p.n; ++i) {
            if (u(i) < 0) {
                Rational r = -y(i) / u(i);
                if (first_p || r < tplus) { tplus = r; first_p = false; }
            } else if (u(i) > 0) {
                Rational r = y(i) / u(i);
                if (first_m || r < tminus) { tminus = r; first_m = false; }
            }
        }
        const Rational denom = tplus + tminus;
        // LIFO order: push the minus branch first so the plus branch pops first.
        todo.emplace_back(y - tminus * u, w * tplus / denom);
        todo.emplace_back(y + tplus * u, w * tminus / denom);
    }
    return out;
}

/**
 * All vertices of P, by enumerating column subsets of size at most m with
 * linearly independent columns and keeping the nonnegative basic solutions.
 * Deduplicated; ordered by first generating subset (subsets in bitmask
 * order).
 *
 * @throws TooLargeError when n exceeds 16.
 */
inline std::vector<VectorXr> enumerate_vertices(const StandardPolyhedron& p) {
    if (p.n > 16)
        throw TooLargeError("enumerate_vertices: more than 16 columns");
    std::vector<VectorXr> vertices;
    auto add = [&vertices](const VectorXr& v) {
        for (const VectorXr& w : vertices)
            if (w == v)
                return;
        vertices.push_back(v);
    };

    const unsigned limit = 1u << p.n;
    for (unsigned mask = 0; mask < limit; ++mask) {
        if (static_cast<Eigen::Index>(__builtin_popcount(mask)) > p.m)
            continue;
        std::vector<int> idx;
        for (Eigen::Index i = 0; i < p.n; ++i)
            if (mask & (1u << i))
                idx.push_back(static_cast<int>(i));
        std::vector<VectorXr> cols;
        for (int i : idx)
            cols.push_back(p.columns[static_cast<std::size_t>(i)]);
        MatrixXr cmat = linalg::cols_matrix(cols, p.m);
        if (linalg::rank(cmat) != static_cast<int>(idx.size()))
            continue;
        std::optional<VectorXr> sol = linalg::solve(cmat, p.b);
        if (!sol)
            continue;
        bool nonneg = true;
        for (Eigen::Index j = 0; j < sol->size(); ++j)
            if ((*sol)(j) < 0) { nonneg = false; break; }
        if (!nonneg)
            continue;
        VectorXr v = VectorXr::Zero(p.n);
        for (std::size_t j = 0; j < idx.size(); ++j)
            v(idx[j]) = (*sol)(static_cast<Eigen::Index>(j));
        if (contains(p, v))
            add(v);
    }
    return vertices;
}

/**
 * The norm bound M = max over independent column subsets I of ||C_I^{-1}||_1,
 * realized on a deterministic row basis: for each subset, elimination on the
 * transpose picks the first linearly independent rows R, and the induced
 * 1-norm of the inverse of the square block C_I[R] is taken.  Every vertex v
 * then obeys ||v||_1 <= M ||b||_1, and with it every minimal point, since
 * minimal points are convex combinations of vertices and ||.||_1 is linear on
 * the nonnegative orthant.
 *
 * @throws TooLargeError when n exceeds 16.
 */
inline Rational bound_M(const StandardPolyhedron& p) {
    if (p.n > 16)
        throw TooLargeError("bound_M: more than 16 columns");
    Rational best = 0;
    const unsigned limit = 1u << p.n;
    for (unsigned mask = 1; mask < limit; ++mask) {
        if (static_cast<Eigen::Index>(__builtin_popcount(mask)) > p.m)
            continue;
        std::vector<VectorXr> cols;
        for (Eigen::Index i = 0; i < p.n; ++i)
            if (mask & (1u << i))
                cols.push_back(p.columns[static_cast<std::size_t>(i)]);
        const Eigen::Index kk = static_cast<Eigen::Index>(cols.size());
        MatrixXr cmat = linalg::cols_matrix(cols, p.m);

        MatrixXr ct = cmat.transpose();
        std::vector<Eigen::Index> rows = linalg::rref(ct); // pivot rows of cmat
        if (static_cast<Eigen::Index>(rows.size()) != kk)
            continue; // dependent columns
        MatrixXr square(kk, kk);
        for (Eigen::Index a = 0; a < kk; ++a)
            square.row(a) = cmat.row(rows[static_cast<std::size_t>(a)]);
        std::optional<MatrixXr> inv = linalg::invert(square);
        if (!inv)
            continue;
        Rational norm = linalg::norm1(*inv);
        if (norm > best)
            best = norm;
    }
    return best;
}

/**
 * An extended polyhedron EP = {x in R^n_+ : L x = b, phi . x >= c}.  The
 * inequality is absorbed by one ghost coordinate x_{n+1} = phi(x) - c, which
 * turns EP into a standard polyhedron in dimension n+1.
 */
struct ExtendedPolyhedron {
    MatrixXr L;   // p x n
    VectorXr phi; // n
    VectorXr b;   // p
    Rational c;
};

inline bool extended_contains(const ExtendedPolyhedron& ep, const VectorXr& x) {
    if (x.size() != ep.L.cols())
        throw DimensionError("extended polyhedron: point length mismatch");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < 0)
            return false;
    return ep.L * x == ep.b && ep.phi.dot(x) >= ep.c;
}

// The ghost-coordinate lift of EP as a standard polyhedron.
inline StandardPolyhedron extended_lift(const ExtendedPolyhedron& ep) {
    const Eigen::Index nn = ep.L.cols();
    const Eigen::Index pp = ep.L.rows();
    std::vector<VectorXr> cols;
    for (Eigen::Index i = 0; i < nn; ++i) {
        VectorXr col(pp + 1);
        col.head(pp) = ep.L.col(i);
        col(pp) = ep.phi(i);
        cols.push_back(std::move(col));
    }
    VectorXr ghost = VectorXr::Zero(pp + 1);
    ghost(pp) = -1;
    cols.push_back(std::move(ghost));
    VectorXr b2(pp + 1);
    b2.head(pp) = ep.b;
    b2(pp) = ep.c;
    return make_polyhedron(std::move(cols), std::move(b2));
}

/**
 * Minimal-point reduction inside an extended polyhedron: lift x by the ghost
 * coordinate, reduce in the standard lift, and drop the ghost.  The result
 * lies in EP, is coordinatewise below x, and obeys the lift's norm bound
 * ||(y, ghost)||_1 <= bound_M(lift) (||b||_1 + |c|).
 */
inline VectorXr extended_reduce(const ExtendedPolyhedron& ep, const VectorXr& x) {
    if (!extended_contains(ep, x))
        throw NotInEPError("extended_reduce: point is not in the extended polyhedron");
    StandardPolyhedron lift = extended_lift(ep);
    VectorXr lifted(x.size() + 1);
    lifted.head(x.size()) = x;
    lifted(x.size()) = ep.phi.dot(x) - ep.c;
    VectorXr reduced = reduce_to_minimal(lift, lifted);
    return reduced.head(x.size());
}

} // namespace orthant
