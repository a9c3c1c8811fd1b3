#pragma once

#include <vector>

#include "orthant/rational.hpp"

namespace orthant {

enum class Sense { LE, EQ, GE };
enum class VarBound { NonNegative, Free };

/**
 * maximize  objective . x
 * subject to  lhs.row(i) . x  (<= | = | >=)  rhs(i)   for every row i,
 *             x_j >= 0 for NonNegative variables, x_j free otherwise.
 */
struct LinearProgram {
    VectorXr objective;
    MatrixXr lhs;
    VectorXr rhs;
    std::vector<Sense> senses;
    std::vector<VarBound> bounds;
};

struct LpSolution {
    enum class Status { Optimal, Infeasible, Unbounded };
    Status status = Status::Infeasible;
    VectorXr point;
    Rational value = 0;

    bool optimal() const { return status == Status::Optimal; }
};

namespace detail {

// Dense simplex tableau in canonical form: `basis[i]` names the basic column
// of row i, and that column is a unit vector.  All arithmetic is exact.
struct Tableau {
    MatrixXr t;               // m x (ncols + 1); last column is the rhs
    std::vector<Eigen::Index> basis;

    Eigen::Index rows() const { return t.rows(); }
    Eigen::Index cols() const { return t.cols() - 1; }
    Rational rhs(Eigen::Index i) const { return t(i, t.cols() - 1); }

    void pivot(Eigen::Index row, Eigen::Index col) {
        t.row(row) /= t(row, col);
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            if (r != row && t(r, col) != 0)
                t.row(r) -= t(r, col) * t.row(row);
        basis[static_cast<std::size_t>(row)] = col;
    }
};

// Reduced cost of column j for the minimization objective `cost`:
//   r_j = cost_j - sum_i cost_{basis[i]} * t(i, j).
inline Rational reduced_cost(const Tableau& tab, const VectorXr& cost, Eigen::Index j) {
    Rational r = cost(j);
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
        const Rational& c = cost(tab.basis[static_cast<std::size_t>(i)]);
        if (c != 0 && tab.t(i, j) != 0)
            r -= c * tab.t(i, j);
    }
    return r;
}

/**
 * Run the simplex method on a canonical tableau, minimizing `cost`.
 * Bland's rule on both the entering and the leaving choice guarantees
 * termination and makes every run deterministic.
 *
 * @returns false when an improving column has no positive pivot entry,
 *          i.e. the objective is unbounded below.
 */
inline bool simplex_min(Tableau& tab, const VectorXr& cost,
                        const std::vector<bool>& banned) {
    for (;;) {
        Eigen::Index entering = -1;
        for (Eigen::Index j = 0; j < tab.cols(); ++j) {
            if (banned[static_cast<std::size_t>(j)])
                continue;
            if (reduced_cost(tab, cost, j) < 0) { entering = j; break; }
        }
        if (entering < 0)
            return true;

        Eigen::Index leave_row = -1;
        Rational best_ratio = 0;
        for (Eigen::Index i = 0; i < tab.rows(); ++i) {
            if (tab.t(i, entering) <= 0)
                continue;
            Rational ratio = tab.rhs(i) / tab.t(i, entering);
            if (leave_row < 0 || ratio < best_ratio ||
                (ratio == best_ratio &&
                 tab.basis[static_cast<std::size_t>(i)] <
                     tab.basis[static_cast<std::size_t>(leave_row)])) {
                leave_row = i;
                best_ratio = ratio;
            }
        }
        if (leave_row < 0)
            return false;
        tab.pivot(leave_row, entering);
    }
}

} // namespace detail

/**
 * Exact two-phase primal simplex.  Free variables are split into positive and
 * negative parts, slack/surplus columns turn inequalities into equalities, and
 * phase one minimizes the sum of one artificial per row.  The returned point
 * is a vertex of the feasible region (in the standard-form coordinates) and is
 * deterministic thanks to Bland's rule.
 */
inline LpSolution solve(const LinearProgram& lp) {
    const Eigen::Index n = lp.objective.size();
    const Eigen::Index m = lp.lhs.rows();
    if (lp.lhs.cols() != n || lp.rhs.size() != m ||
        static_cast<Eigen::Index>(lp.senses.size()) != m ||
        static_cast<Eigen::Index>(lp.bounds.size()) != n)
        throw DimensionError("lp::solve: inconsistent program dimensions");

    // Map original variables to standard-form columns.
    std::vector<Eigen::Index> pos_col(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> neg_col(static_cast<std::size_t>(n), -1);
    Eigen::Index nstd = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        pos_col[static_cast<std::size_t>(j)] = nstd++;
        if (lp.bounds[static_cast<std::size_t>(j)] == VarBound::Free)
            neg_col[static_cast<std::size_t>(j)] = nstd++;
    }
    Eigen::Index nslack = 0;
    for (Sense s : lp.senses)
        if (s != Sense::EQ)
            ++nslack;

    const Eigen::Index total = nstd + nslack + m; // + artificials
    detail::Tableau tab;
    tab.t = MatrixXr::Zero(m, total + 1);
    tab.basis.resize(static_cast<std::size_t>(m));

    Eigen::Index slack_at = nstd;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Rational& a = lp.lhs(i, j);
            if (a == 0)
                continue;
            tab.t(i, pos_col[static_cast<std::size_t>(j)]) = a;
            if (neg_col[static_cast<std::size_t>(j)] >= 0)
                tab.t(i, neg_col[static_cast<std::size_t>(j)]) = -a;
        }
        Sense s = lp.senses[static_cast<std::size_t>(i)];
        if (s == Sense::LE)
            tab.t(i, slack_at++) = 1;
        else if (s == Sense::GE)
            tab.t(i, slack_at++) = -1;
        tab.t(i, total) = lp.rhs(i);
        if (tab.t(i, total) < 0)
            tab.t.row(i) = -tab.t.row(i);
        tab.t(i, nstd + nslack + i) = 1; // artificial
        tab.basis[static_cast<std::size_t>(i)] = nstd + nslack + i;
    }

    auto is_artificial = [&](Eigen::Index j) { return j >= nstd + nslack; };

    // Phase one: minimize the sum of artificials.
    VectorXr phase1 = VectorXr::Zero(total);
    for (Eigen::Index j = nstd + nslack; j < total; ++j)
        phase1(j) = 1;
    std::vector<bool> none(static_cast<std::size_t>(total), false);
    detail::simplex_min(tab, phase1, none);

    Rational infeas = 0;
    for (Eigen::Index i = 0; i < tab.rows(); ++i)
        if (is_artificial(tab.basis[static_cast<std::size_t>(i)]))
            infeas += tab.rhs(i);
    if (infeas > 0)
        return LpSolution{LpSolution::Status::Infeasible, VectorXr(), 0};

    // Remove artificials from the basis: pivot each one out on any nonzero
    // structural entry of its (degenerate) row, or drop the row as redundant.
    for (Eigen::Index i = 0; i < tab.rows();) {
        if (!is_artificial(tab.basis[static_cast<std::size_t>(i)])) { ++i; continue; }
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < nstd + nslack; ++j)
            if (tab.t(i, j) != 0) { col = j; break; }
        if (col >= 0) {
            tab.pivot(i, col);
            ++i;
        } else {
            const Eigen::Index last = tab.rows() - 1;
            if (i != last) {
                tab.t.row(i) = tab.t.row(last);
                tab.basis[static_cast<std::size_t>(i)] = tab.basis[static_cast<std::size_t>(last)];
            }
            tab.t.conservativeResize(last, Eigen::NoChange);
            tab.basis.resize(static_cast<std::size_t>(last));
        }
    }

    // Phase two: minimize the negated objective, artificial columns banned.
    VectorXr phase2 = VectorXr::Zero(total);
    for (Eigen::Index j = 0; j < n; ++j) {
        phase2(pos_col[static_cast<std::size_t>(j)]) = -lp.objective(j);
        if (neg_col[static_cast<std::size_t>(j)] >= 0)
            phase2(neg_col[static_cast<std::size_t>(j)]) = lp.objective(j);
    }
    std::vector<bool> banned(static_cast<std::size_t>(total), false);
    for (Eigen::Index j = nstd + nslack; j < total; ++j)
        banned[static_cast<std::size_t>(j)] = true;
    if (!detail::simplex_min(tab, phase2, banned))
        return LpSolution{LpSolution::Status::Unbounded, VectorXr(), 0};

    VectorXr xstd = VectorXr::Zero(total);
    for (Eigen::Index i = 0; i < tab.rows(); ++i)
        xstd(tab.basis[static_cast<std::size_t>(i)]) = tab.rhs(i);

    LpSolution sol;
    sol.status = LpSolution::Status::Optimal;
    sol.point = VectorXr::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        sol.point(j) = xstd(pos_col[static_cast<std::size_t>(j)]);
        if (neg_col[static_cast<std::size_t>(j)] >= 0)
            sol.point(j) -= xstd(neg_col[static_cast<std::size_t>(j)]);
    }
    sol.value = lp.objective.dot(sol.point);
    return sol;
}

} // namespace orthant
