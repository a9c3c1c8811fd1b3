#pragma once

#include <cmath>
#include <limits>

#include "orthant/distribution.hpp"

namespace orthant {

// A tilt parameter x0 together with the transform value L(x0) there.
struct TiltPoint {
    Eigen::VectorXd point;
    double value = 0.0;
};

/**
 * Shift-normalized moments of the Laplace transform L(z) = sum_i w_i e^{<z,y_i>}:
 *
 *   log_value = log L(z),
 *   drift     = grad L(z) / L(z)   (the mean of the z-tilted measure),
 *   second    = hess L(z) / L(z)   (its second moment matrix).
 *
 * All three stay finite for any finite z because every exponential is
 * evaluated relative to the largest exponent M = max_i <z,y_i>.
 */
struct LaplaceMoments {
    double log_value;
    Eigen::VectorXd drift;
    Eigen::MatrixXd second;
};

namespace detail {

inline void check_dimension(const FiniteDistribution& dist, const Eigen::VectorXd& z) {
    if (z.size() != dist.dimension)
        throw DimensionError("laplace: argument dimension mismatch");
    if (dist.atoms.empty())
        throw DomainError("laplace: distribution has no atoms");
}

inline double max_exponent(const FiniteDistribution& dist, const Eigen::VectorXd& z,
                           std::vector<double>& exps) {
    exps.resize(dist.atoms.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
        double e = z.dot(to_double(dist.atoms[i].point));
        exps[i] = e;
        if (e > m) m = e;
    }
    return m;
}

} // namespace detail

inline LaplaceMoments laplace_moments(const FiniteDistribution& dist,
                                      const Eigen::VectorXd& z) {
    detail::check_dimension(dist, z);
    std::vector<double> exps;
    const double m = detail::max_exponent(dist, z, exps);
    const int d = dist.dimension;

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
        const double t = to_double(dist.atoms[i].weight) * std::exp(exps[i] - m);
        const Eigen::VectorXd y = to_double(dist.atoms[i].point);
        s0 += t;
        s1 += t * y;
        s2 += t * (y * y.transpose());
    }
    LaplaceMoments mom;
    mom.log_value = m + std::log(s0);
    mom.drift = s1 / s0;
    mom.second = s2 / s0;
    return mom;
}

namespace detail {

inline double exp_checked(double log_value) {
    static const double kLogMax = std::log(std::numeric_limits<double>::max());
    if (log_value > kLogMax)
        throw OverflowError("laplace transform overflows double range");
    return std::exp(log_value);
}

} // namespace detail

/**
 * L(z) = sum_i w_i e^{<z,y_i>}, evaluated as e^M sum_i w_i e^{<z,y_i>-M} with
 * M the largest exponent.  Throws OverflowError instead of returning inf.
 */
inline double laplace_eval(const FiniteDistribution& dist, const Eigen::VectorXd& z) {
    return detail::exp_checked(laplace_moments(dist, z).log_value);
}

inline Eigen::VectorXd laplace_grad(const FiniteDistribution& dist,
                                    const Eigen::VectorXd& z) {
    LaplaceMoments mom = laplace_moments(dist, z);
    Eigen::VectorXd g = detail::exp_checked(mom.log_value) * mom.drift;
    if (!g.allFinite())
        throw OverflowError("laplace gradient overflows double range");
    return g;
}

inline Eigen::MatrixXd laplace_hess(const FiniteDistribution& dist,
                                    const Eigen::VectorXd& z) {
    LaplaceMoments mom = laplace_moments(dist, z);
    Eigen::MatrixXd h = detail::exp_checked(mom.log_value) * mom.second;
    if (!h.allFinite())
        throw OverflowError("laplace hessian overflows double range");
    return h;
}

inline TiltPoint make_tilt_point(const FiniteDistribution& dist,
                                 const Eigen::VectorXd& z) {
    return TiltPoint{z, laplace_eval(dist, z)};
}

/**
 * Exponential change of measure: the tilted distribution has the same support
 * and weights proportional to w_i e^{<x0,y_i>}.
 *
 * The exponential factors are computed in floating point (relative to the
 * largest exponent) and then converted to exact rationals, so the returned
 * weights sum to exactly 1 while matching the float normalization to machine
 * precision.  In particular tilt(dist, 0) returns dist unchanged.
 */
inline FiniteDistribution tilt(const FiniteDistribution& dist,
                               const Eigen::VectorXd& x0) {
    detail::check_dimension(dist, x0);
    std::vector<double> exps;
    const double m = detail::max_exponent(dist, x0, exps);

    std::vector<Atom> atoms = dist.atoms;
    Rational total = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double factor = std::exp(exps[i] - m);
        if (!(factor > 0.0))
            throw OverflowError("tilt factor underflows to zero");
        atoms[i].weight *= rational_from_double(factor);
        total += atoms[i].weight;
    }
    for (Atom& a : atoms)
        a.weight /= total;
    return make_distribution(dist.dimension, std::move(atoms));
}

} // namespace orthant
