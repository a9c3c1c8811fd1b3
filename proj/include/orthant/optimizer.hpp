#pragma once

#include "orthant/laplace.hpp"
#include "orthant/reduction.hpp"

namespace orthant {

/**
 * Outcome of minimizing the Laplace transform of the V-restricted measure
 * over the cone V+.
 *
 * inf_value = muV * lambda is the infimum of the original transform over the
 * whole orthant: badly oriented mass is removed by the reduction, and only
 * the restriction to V contributes.  When the restriction carries no mass the
 * report is `degenerate` and the infimum is 0 by convention.
 */
struct MinimizerReport {
    double inf_value = 0.0;
    Eigen::VectorXd v0;
    double lambda = 0.0;
    double muV = 0.0;
    std::vector<int> K;      // axes i in I with <v0, e_i> strictly positive
    double kkt_residual = 0.0;
    bool attained = false;   // true iff the distribution is well oriented
    bool degenerate = false; // true iff muV = 0
    int iterations = 0;
};

namespace detail {

struct VplusProblem {
    FiniteDistribution projected; // atoms <b_j, y> in the V-basis coordinates
    int k = 0;                    // dim V
    int constrained = 0;          // leading coordinates required nonnegative
};

inline VplusProblem project_to_v(const FiniteDistribution& nu, const ReducedSupport& rs) {
    VplusProblem prob;
    prob.k = rs.V.dim();
    prob.constrained = rs.axis_count;
    std::vector<Atom> atoms;
    for (const Atom& a : nu.atoms) {
        VectorXr y(prob.k);
        for (int j = 0; j < prob.k; ++j)
            y(j) = rs.V.basis()[static_cast<std::size_t>(j)].dot(a.point);
        atoms.push_back(Atom{std::move(y), a.weight});
    }
    prob.projected = make_distribution(prob.k, std::move(atoms));
    return prob;
}

// Projection onto the feasible set: clamp the constrained leading
// coordinates at zero.
inline Eigen::VectorXd clamp(const VplusProblem& prob, Eigen::VectorXd c) {
    for (int i = 0; i < prob.constrained; ++i)
        c(i) = std::max(c(i), 0.0);
    return c;
}

inline Eigen::VectorXd projected_gradient(const VplusProblem& prob,
                                          const Eigen::VectorXd& c,
                                          const Eigen::VectorXd& g) {
    Eigen::VectorXd pg = g;
    for (int i = 0; i < prob.constrained; ++i)
        if (c(i) == 0.0 && g(i) > 0.0)
            pg(i) = 0.0;
    return pg;
}

} // namespace detail

/**
 * Minimize L_{mu|V} over V+ by projected Newton iterations in the structured
 * V-basis coordinates, where feasibility is a coordinatewise clamp.
 *
 * The Newton step is taken on the free coordinates (active bounds frozen),
 * damped through the spectral decomposition so that an exactly singular
 * Hessian block — which arises whenever the support is flat along some
 * direction — still yields a fast, well-scaled step, and backtracked with an
 * Armijo test on log L along the projected path.  Iteration starts from
 * v = 0 and stops when the projected gradient norm drops below tol * (1 + L).
 *
 * @throws NoConvergenceError after 10^4 iterations without convergence.
 */
inline MinimizerReport minimize_on_vplus(const FiniteDistribution& dist,
                                         const ReducedSupport& rs,
                                         double tol = 1e-9) {
    MinimizerReport report;
    report.attained = rs.well_oriented;
    report.v0 = Eigen::VectorXd::Zero(dist.dimension);

    FiniteDistribution nu;
    Rational mass;
    try {
        std::tie(nu, mass) = restrict_to(dist, rs.V);
    } catch (const ZeroMassError&) {
        report.degenerate = true;
        return report;
    }
    report.muV = to_double(mass);

    const detail::VplusProblem prob = detail::project_to_v(nu, rs);
    const int k = prob.k;
    const int kMaxIter = 10000;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
    LaplaceMoments mom = laplace_moments(prob.projected, c);
    bool converged = false;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double f = std::exp(mom.log_value);
        const Eigen::VectorXd g = f * mom.drift;
        const Eigen::VectorXd pg = detail::projected_gradient(prob, c, g);
        report.iterations = iter;
        if (pg.norm() <= tol * (1.0 + f)) {
            converged = true;
            break;
        }

        std::vector<int> free_idx;
        for (int i = 0; i < k; ++i) {
            const bool active = i < prob.constrained && c(i) == 0.0 && g(i) > 0.0;
            if (!active)
                free_idx.push_back(i);
        }

        Eigen::VectorXd step = Eigen::VectorXd::Zero(k);
        const int nf = static_cast<int>(free_idx.size());
        if (nf > 0) {
            Eigen::MatrixXd hff(nf, nf);
            Eigen::VectorXd gf(nf);
            const Eigen::MatrixXd h = f * mom.second;
            for (int a = 0; a < nf; ++a) {
                gf(a) = g(free_idx[static_cast<std::size_t>(a)]);
                for (int b = 0; b < nf; ++b)
                    hff(a, b) = h(free_idx[static_cast<std::size_t>(a)],
                                  free_idx[static_cast<std::size_t>(b)]);
            }
            // Damped Newton through the spectral decomposition.  The Hessian
            // of the transform is a positive-semidefinite moment matrix, and
            // support geometries with collinear coordinates make it exactly
            // singular: the transform is constant along the null directions,
            // so their gradient components are pure roundoff (Cauchy-Schwarz
            // bounds them by sqrt(curvature * L)) and damping them costs
            // nothing, while plain gradient fallback would converge too
            // slowly to be usable.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hff);
            const double lo = eig.eigenvalues()(0);
            const double hi = eig.eigenvalues()(nf - 1);
            const double damp = std::max(0.0, -lo) + 1e-11 * std::max(hi, 1.0);
            const Eigen::VectorXd coeff = eig.eigenvectors().transpose() * gf;
            Eigen::VectorXd df(nf);
            for (int a = 0; a < nf; ++a)
                df(a) = -coeff(a) / (eig.eigenvalues()(a) + damp);
            const Eigen::VectorXd step_f = eig.eigenvectors() * df;
            for (int a = 0; a < nf; ++a)
                step(free_idx[static_cast<std::size_t>(a)]) = step_f(a);
        } else {
            step = -pg;
        }

        // Armijo backtracking on log L along the projected arc.  Near the
        // minimum the true decrease of a full Newton step drops below the
        // roundoff noise of evaluating log L, so the sufficient-decrease test
        // carries an absolute slack of a few ulps: a step whose effect is not
        // measurable must not be rejected, or the search stalls one order of
        // magnitude short of the gradient tolerance.
        const double phi0 = mom.log_value;
        const double noise =
            16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(phi0));
        const Eigen::VectorXd glog = mom.drift;
        bool accepted = false;
        double alpha = 1.0;
        for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
            const Eigen::VectorXd cnew = detail::clamp(prob, c + alpha * step);
            const Eigen::VectorXd delta = cnew - c;
            if (delta.isZero(0.0))
                break;
            const LaplaceMoments trial = laplace_moments(prob.projected, cnew);
            if (trial.log_value <= phi0 + 1e-4 * glog.dot(delta) + noise) {
                c = cnew;
                mom = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NoConvergenceError("minimize_on_vplus: line search failed to make progress");
    }
    if (!converged)
        throw NoConvergenceError("minimize_on_vplus: iteration cap reached");

    report.lambda = std::exp(mom.log_value);
    report.inf_value = report.muV * report.lambda;

    for (int j = 0; j < k; ++j)
        report.v0 += c(j) * to_double(rs.V.basis()[static_cast<std::size_t>(j)]);

    const double tol_active = 1e-7 * (1.0 + report.v0.norm());
    for (int j = 0; j < prob.constrained; ++j)
        if (c(j) > tol_active)
            report.K.push_back(rs.I[static_cast<std::size_t>(j)]);

    // KKT residual in the structured basis: gradient components must vanish
    // on the strictly positive axes and along the unconstrained directions,
    // and be nonnegative on the axes at the boundary.
    const double lambda_val = report.lambda;
    const Eigen::VectorXd g = lambda_val * mom.drift;
    double res = 0.0;
    for (int j = 0; j < prob.constrained; ++j) {
        if (c(j) > tol_active)
            res = std::max(res, std::abs(g(j)));
        else
            res = std::max(res, std::max(0.0, -g(j)));
    }
    for (int j = prob.constrained; j < k; ++j) {
        const double len = to_double(rs.V.basis()[static_cast<std::size_t>(j)]).norm();
        res = std::max(res, std::abs(g(j)) / len);
    }
    report.kkt_residual = res;
    return report;
}

// Reduction followed by minimization; the bundle almost every consumer needs.
inline std::pair<ReducedSupport, MinimizerReport>
reduce_and_minimize(const FiniteDistribution& dist, double tol = 1e-9) {
    ReducedSupport rs = build_reduced_support(dist);
    MinimizerReport report = minimize_on_vplus(dist, rs, tol);
    return {std::move(rs), std::move(report)};
}

/**
 * The universal upper bound: any decay-rate estimate for the orthant exit
 * time must sit below inf_Q L within the stated tolerance.
 */
inline bool upper_bound_check(const FiniteDistribution& dist, double rate,
                              double tol = 1e-6) {
    return rate <= reduce_and_minimize(dist).second.inf_value + tol;
}

} // namespace orthant
