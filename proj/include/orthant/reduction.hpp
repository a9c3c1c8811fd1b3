#pragma once

#include <numeric>
#include <optional>
#include <random>

#include "orthant/distribution.hpp"
#include "orthant/lp.hpp"

namespace orthant {

/**
 * The reduced support of a distribution relative to the nonnegative orthant Q.
 *
 * `tuple` is a maximal admissible tuple (u_1, ..., u_r): linearly independent
 * directions in Q, normalized to coordinate sum 1, such that each u_k carries
 * all remaining mass into its nonpositive half-space after intersecting with
 * the orthogonal complement of the previous directions.  V is the orthogonal
 * complement of span(u_1,...,u_r); different maximal tuples always span the
 * same subspace, so V is canonical.
 *
 * I collects the coordinate axes contained in V, I_perp those contained in
 * V's orthogonal complement (0-based).  V's stored basis is structured: first
 * the axis vectors e_i for i in I (ascending), then `V.dim() - axis_count`
 * vectors spanning the orthogonal complement of those axes inside V.  The
 * cone V+ = {x in V : x_i >= 0 for i in I} is exactly the set of x in V
 * whose leading coordinates in this basis are nonnegative.
 */
struct ReducedSupport {
    int dimension;
    std::vector<VectorXr> tuple;
    Subspace V;
    std::vector<int> I;
    std::vector<int> I_perp;
    bool well_oriented;
    int axis_count;
};

/**
 * Search for a direction u extending the admissible tuple whose span is
 * `span_so_far`, inside the working subspace W (the intersection of the
 * orthogonal complements of the tuple found so far).
 *
 * The candidate set {u >= 0, sum u_i = 1, <u,y> <= 0 for every support atom
 * y in W} is a polytope; u must additionally lie outside span_so_far.  For
 * each vector c of a rational basis of the orthogonal complement of
 * span_so_far (taken in index order, or in `complement_order` when given),
 * <c,.> is maximized and then minimized over the polytope.  A nonzero
 * optimum certifies a vertex outside the span, which is returned; if every
 * such optimum is zero the polytope lies inside the span and no admissible
 * extension exists.
 *
 * @returns a new admissible direction, or std::nullopt if the tuple is
 *          already maximal.
 */
inline std::optional<VectorXr>
find_admissible_direction(const FiniteDistribution& dist, const Subspace& W,
                          const std::vector<VectorXr>& span_so_far,
                          const std::vector<int>* complement_order = nullptr) {
    const int d = dist.dimension;

    std::vector<VectorXr> constraint_atoms;
    for (const Atom& a : dist.atoms)
        if (W.contains(a.point))
            constraint_atoms.push_back(a.point);

    const Eigen::Index rows = static_cast<Eigen::Index>(constraint_atoms.size()) + 1;
    LinearProgram lp;
    lp.lhs = MatrixXr::Zero(rows, d);
    lp.rhs = VectorXr::Zero(rows);
    lp.senses.assign(static_cast<std::size_t>(rows), Sense::LE);
    lp.bounds.assign(static_cast<std::size_t>(d), VarBound::NonNegative);
    for (std::size_t i = 0; i < constraint_atoms.size(); ++i)
        lp.lhs.row(static_cast<Eigen::Index>(i)) = constraint_atoms[i].transpose();
    lp.lhs.row(rows - 1).setConstant(1);
    lp.rhs(rows - 1) = 1;
    lp.senses[static_cast<std::size_t>(rows - 1)] = Sense::EQ;

    std::vector<VectorXr> complement =
        linalg::kernel_basis(linalg::rows_matrix(span_so_far, d));
    std::vector<int> order(complement.size());
    std::iota(order.begin(), order.end(), 0);
    if (complement_order != nullptr) {
        if (complement_order->size() != complement.size())
            throw DimensionError("find_admissible_direction: bad complement order");
        order = *complement_order;
    }

    for (int idx : order) {
        const VectorXr& c = complement[static_cast<std::size_t>(idx)];
        for (int dir = 0; dir < 2; ++dir) {
            lp.objective = (dir == 0) ? c : VectorXr(-c);
            LpSolution sol = solve(lp);
            if (sol.status == LpSolution::Status::Infeasible)
                return std::nullopt;
            if (sol.status == LpSolution::Status::Unbounded)
                throw DomainError("find_admissible_direction: bounded polytope reported unbounded");
            if (sol.value > 0)
                return sol.point;
        }
    }
    return std::nullopt;
}

/**
 * Build the reduced support by the greedy maximal-tuple construction: keep
 * extending the admissible tuple until no direction outside its span exists.
 *
 * `shuffle` randomizes the order in which complement-basis objectives are
 * tried at each step; it exists so tests can confirm that differently chosen
 * maximal tuples still span the same subspace.  Pass nullptr for the
 * deterministic index order.
 */
inline ReducedSupport build_reduced_support(const FiniteDistribution& dist,
                                            std::mt19937_64* shuffle = nullptr) {
    const int d = dist.dimension;
    std::vector<VectorXr> tuple;

    for (;;) {
        Subspace W(d, linalg::kernel_basis(linalg::rows_matrix(tuple, d)));
        std::optional<std::vector<int>> order;
        if (shuffle != nullptr) {
            order.emplace(static_cast<std::size_t>(W.dim()) + 0);
            // complement of span(tuple) has dimension d - |tuple| = dim W
            std::iota(order->begin(), order->end(), 0);
            std::shuffle(order->begin(), order->end(), *shuffle);
        }
        std::optional<VectorXr> u = find_admissible_direction(
            dist, W, tuple, order ? &*order : nullptr);
        if (!u)
            break;
        tuple.push_back(*u);
    }

    std::vector<int> I;
    for (int i = 0; i < d; ++i) {
        bool orthogonal = true;
        for (const VectorXr& u : tuple)
            if (u(i) != 0) { orthogonal = false; break; }
        if (orthogonal)
            I.push_back(i);
    }

    std::vector<int> I_perp;
    for (int i = 0; i < d; ++i) {
        VectorXr e = VectorXr::Zero(d);
        e(i) = 1;
        if (!tuple.empty() && linalg::in_span(tuple, e))
            I_perp.push_back(i);
    }

    std::vector<VectorXr> basis;
    for (int i : I) {
        VectorXr e = VectorXr::Zero(d);
        e(i) = 1;
        basis.push_back(e);
    }
    std::vector<VectorXr> pinned = tuple;
    for (const VectorXr& e : basis)
        pinned.push_back(e);
    for (const VectorXr& g : linalg::kernel_basis(linalg::rows_matrix(pinned, d)))
        basis.push_back(g);

    ReducedSupport rs{d,
                      tuple,
                      Subspace(d, std::move(basis)),
                      std::move(I),
                      std::move(I_perp),
                      tuple.empty(),
                      0};
    rs.axis_count = static_cast<int>(rs.I.size());
    return rs;
}

/**
 * Membership of x in the cone V+ = {v in V : v_i >= 0 for every i in I}.
 * @throws NotInVError when x does not lie in V at all.
 */
inline bool v_plus_contains(const ReducedSupport& rs, const VectorXr& x) {
    if (!rs.V.contains(x))
        throw NotInVError("point does not lie in the reduced subspace");
    for (int i : rs.I)
        if (x(i) < 0)
            return false;
    return true;
}

/**
 * Depth of a starting point: the smallest coordinate of x over the axes that
 * belong neither to I nor to I_perp, or +infinity when those two sets cover
 * every axis.  Decay rates converge to the orthant-infimum bound as the depth
 * grows.
 *
 * @throws NotInOrthantError when x has a negative coordinate.
 */
inline double depth(const ReducedSupport& rs, const VectorXr& x) {
    if (x.size() != rs.dimension)
        throw DimensionError("depth: dimension mismatch");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < 0)
            throw NotInOrthantError("depth: point has a negative coordinate");

    std::vector<bool> covered(static_cast<std::size_t>(rs.dimension), false);
    for (int i : rs.I)
        covered[static_cast<std::size_t>(i)] = true;
    for (int i : rs.I_perp)
        covered[static_cast<std::size_t>(i)] = true;

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rs.dimension; ++i)
        if (!covered[static_cast<std::size_t>(i)])
            best = std::min(best, to_double(x(i)));
    return best;
}

} // namespace orthant
