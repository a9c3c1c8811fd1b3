#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "orthant/rational.hpp"

namespace orthant {

// One support point of a finitely supported measure, with its exact weight.
struct Atom {
    VectorXr point;
    Rational weight;
};

/**
 * A finitely supported probability distribution on R^d with exact rational
 * weights.  `lattice` is true iff every atom coordinate is an integer, which
 * is what the dynamic-programming survival engine requires.
 *
 * Build through make_distribution() so the lattice flag stays consistent;
 * validate() re-derives every invariant from scratch.
 */
struct FiniteDistribution {
    int dimension = 0;
    std::vector<Atom> atoms;
    bool lattice = false;
};

inline bool compute_lattice_flag(const std::vector<Atom>& atoms) {
    for (const Atom& a : atoms)
        for (Eigen::Index i = 0; i < a.point.size(); ++i)
            if (!is_integer(a.point(i)))
                return false;
    return true;
}

inline FiniteDistribution make_distribution(int dimension, std::vector<Atom> atoms) {
    FiniteDistribution d;
    d.dimension = dimension;
    d.atoms = std::move(atoms);
    d.lattice = compute_lattice_flag(d.atoms);
    return d;
}

// Outcome of validate(): a list of human-readable violations, empty if valid.
struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const FiniteDistribution& dist) {
    ValidationReport report;
    auto flag = [&report](const std::string& msg) { report.violations.push_back(msg); };

    if (dist.dimension < 1)
        flag("dimension must be at least 1");
    if (dist.dimension > 16)
        flag("dimension exceeds the supported cap of 16");
    if (dist.atoms.empty())
        flag("distribution has no atoms");

    Rational total = 0;
    for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
        const Atom& a = dist.atoms[i];
        if (a.point.size() != dist.dimension) {
            std::ostringstream os;
            os << "atom " << i << " has " << a.point.size()
               << " coordinates, expected " << dist.dimension;
            flag(os.str());
        }
        if (a.weight <= 0) {
            std::ostringstream os;
            os << "atom " << i << " has nonpositive weight " << format_rational(a.weight);
            flag(os.str());
        }
        total += a.weight;
    }

    if (!dist.atoms.empty() && total != 1) {
        std::ostringstream os;
        os << "weights sum to " << format_rational(total) << ", off by exactly "
           << format_rational(total - 1);
        flag(os.str());
    }

    for (std::size_t i = 0; i < dist.atoms.size(); ++i)
        for (std::size_t j = i + 1; j < dist.atoms.size(); ++j)
            if (dist.atoms[i].point.size() == dist.atoms[j].point.size() &&
                dist.atoms[i].point == dist.atoms[j].point) {
                std::ostringstream os;
                os << "atoms " << i << " and " << j << " share the same support point";
                flag(os.str());
            }

    if (dist.lattice != compute_lattice_flag(dist.atoms))
        flag("lattice flag is inconsistent with the atom coordinates");

    return report;
}

// Exact mean vector sum_i w_i y_i.
inline VectorXr mean(const FiniteDistribution& dist) {
    VectorXr m = VectorXr::Zero(dist.dimension);
    for (const Atom& a : dist.atoms)
        m += a.weight * a.point;
    return m;
}

/**
 * A linear subspace of R^d given by a rational basis.  Membership is decided
 * exactly: a complement basis (kernel of the row matrix of basis vectors) is
 * prepared once, and y belongs to the subspace iff it is orthogonal to every
 * complement vector.
 */
class Subspace {
public:
    Subspace(int ambient_dimension, std::vector<VectorXr> basis)
        : ambient_(ambient_dimension), basis_(std::move(basis)) {
        for (const VectorXr& b : basis_)
            if (b.size() != ambient_)
                throw DimensionError("Subspace: basis vector length mismatch");
        if (!linalg::independent(basis_, ambient_))
            throw DomainError("Subspace: basis vectors are linearly dependent");
        complement_ = linalg::kernel_basis(linalg::rows_matrix(basis_, ambient_));
    }

    static Subspace full(int ambient_dimension) {
        std::vector<VectorXr> basis;
        for (int i = 0; i < ambient_dimension; ++i) {
            VectorXr e = VectorXr::Zero(ambient_dimension);
            e(i) = 1;
            basis.push_back(e);
        }
        return Subspace(ambient_dimension, std::move(basis));
    }

    static Subspace zero(int ambient_dimension) {
        return Subspace(ambient_dimension, {});
    }

    int ambient_dimension() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<VectorXr>& basis() const { return basis_; }
    const std::vector<VectorXr>& complement_basis() const { return complement_; }

    bool contains(const VectorXr& y) const {
        if (y.size() != ambient_)
            throw DimensionError("Subspace::contains: vector length mismatch");
        for (const VectorXr& c : complement_)
            if (c.dot(y) != 0)
                return false;
        return true;
    }

private:
    int ambient_;
    std::vector<VectorXr> basis_;
    std::vector<VectorXr> complement_;
};

/**
 * Restriction of `dist` to a subspace: atoms outside are dropped and the rest
 * renormalized exactly.
 *
 * @returns the restricted distribution together with the retained mass.
 * @throws ZeroMassError when no atom lies in the subspace.
 */
inline std::pair<FiniteDistribution, Rational>
restrict_to(const FiniteDistribution& dist, const Subspace& sub) {
    if (sub.ambient_dimension() != dist.dimension)
        throw DimensionError("restrict_to: ambient dimension mismatch");
    Rational mass = 0;
    std::vector<Atom> kept;
    for (const Atom& a : dist.atoms) {
        if (sub.contains(a.point)) {
            kept.push_back(a);
            mass += a.weight;
        }
    }
    if (mass == 0)
        throw ZeroMassError("restriction carries zero mass");
    for (Atom& a : kept)
        a.weight /= mass;
    return {make_distribution(dist.dimension, std::move(kept)), mass};
}

} // namespace orthant
