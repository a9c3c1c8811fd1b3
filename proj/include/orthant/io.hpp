#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "orthant/polyhedron.hpp"
#include "orthant/rates.hpp"
#include "orthant/reduction.hpp"

namespace orthant {

using nlohmann::json;

namespace detail {

/**
 * A scalar from JSON: either a string "p/q" (parsed exactly) or a plain
 * number, accepted only when its exact binary value is a rational with
 * denominator at most 10^9 — so 0.25 passes and 0.1 (not exactly
 * representable) is rejected rather than silently approximated.
 */
inline Rational rational_from_json(const json& j, const char* what) {
    if (j.is_string())
        return parse_rational(j.get<std::string>());
    if (j.is_number_integer())
        return Rational(j.get<long long>());
    if (j.is_number_float()) {
        const Rational r = rational_from_double(j.get<double>());
        if (denominator(r) > 1000000000)
            throw ParseError(std::string(what) +
                             ": plain number is not exactly a rational with denominator <= 1e9; "
                             "write it as a \"p/q\" string");
        return r;
    }
    throw ParseError(std::string(what) + ": expected a number or a \"p/q\" string");
}

inline VectorXr vector_from_json(const json& j, const char* what) {
    if (!j.is_array())
        throw ParseError(std::string(what) + ": expected an array");
    VectorXr v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = rational_from_json(j[i], what);
    return v;
}

inline json vector_to_json(const VectorXr& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(format_rational(v(i)));
    return arr;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

/// Fixed-width round-trip formatting so output bytes are reproducible.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline FiniteDistribution distribution_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dimension") || !j.contains("atoms"))
        throw ParseError("distribution: expected {\"dimension\": d, \"atoms\": [...]}");
    if (!j["dimension"].is_number_integer())
        throw ParseError("distribution: dimension must be an integer");
    const int d = j["dimension"].get<int>();
    if (!j["atoms"].is_array())
        throw ParseError("distribution: atoms must be an array");
    std::vector<Atom> atoms;
    for (const json& aj : j["atoms"]) {
        if (!aj.is_object() || !aj.contains("point") || !aj.contains("weight"))
            throw ParseError("distribution: each atom needs \"point\" and \"weight\"");
        Atom a;
        a.point = detail::vector_from_json(aj["point"], "atom point");
        a.weight = detail::rational_from_json(aj["weight"], "atom weight");
        atoms.push_back(std::move(a));
    }
    FiniteDistribution dist = make_distribution(d, std::move(atoms));
    ValidationReport report = validate(dist);
    if (!report.ok())
        throw ParseError("distribution: " + report.violations.front());
    return dist;
}

inline json distribution_to_json(const FiniteDistribution& dist) {
    json atoms = json::array();
    for (const Atom& a : dist.atoms)
        atoms.push_back({{"point", detail::vector_to_json(a.point)},
                         {"weight", format_rational(a.weight)}});
    return json{{"dimension", dist.dimension}, {"atoms", atoms}};
}

inline FiniteDistribution load_distribution(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open distribution file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("distribution file is not valid JSON: " + std::string(e.what()));
    }
    return distribution_from_json(j);
}

inline StandardPolyhedron polyhedron_from_json(const json& j) {
    if (!j.is_object() || !j.contains("columns") || !j.contains("b"))
        throw ParseError("polyhedron: expected {\"columns\": [[..],..], \"b\": [..]}");
    if (!j["columns"].is_array() || j["columns"].empty())
        throw ParseError("polyhedron: columns must be a nonempty array");
    std::vector<VectorXr> columns;
    for (const json& cj : j["columns"])
        columns.push_back(detail::vector_from_json(cj, "polyhedron column"));
    VectorXr b = detail::vector_from_json(j["b"], "polyhedron b");
    try {
        return make_polyhedron(std::move(columns), std::move(b));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

inline json polyhedron_to_json(const StandardPolyhedron& p) {
    json cols = json::array();
    for (const VectorXr& c : p.columns)
        cols.push_back(detail::vector_to_json(c));
    return json{{"columns", cols}, {"b", detail::vector_to_json(p.b)}};
}

inline StandardPolyhedron load_polyhedron(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open polyhedron file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("polyhedron file is not valid JSON: " + std::string(e.what()));
    }
    return polyhedron_from_json(j);
}

/// d(x) can be +infinity, which JSON numbers cannot hold; it becomes "inf".
inline json depth_to_json(double d_of_x) {
    if (std::isinf(d_of_x))
        return json("inf");
    return json(d_of_x);
}

inline json curve_to_json(const SurvivalCurve& curve) {
    json j;
    j["engine"] = engine_name(curve.engine);
    j["start"] = detail::vector_to_json(curve.start);
    j["horizons"] = curve.horizons;
    j["probabilities"] = curve.probabilities;
    if (!curve.mc_stderr.empty())
        j["stderr"] = curve.mc_stderr;
    if (!curve.mc_ess.empty())
        j["ess"] = curve.mc_ess;
    if (curve.truncation >= 0)
        j["truncation"] = curve.truncation;
    return j;
}

inline json rate_report_to_json(const RateReport& report) {
    json j;
    j["rate"] = report.rate;
    j["method"] = method_name(report.method);
    j["bound"] = report.bound;
    j["d_of_x"] = depth_to_json(report.d_of_x);
    j["converged"] = report.converged;
    j["period"] = report.period;
    j["curve"] = curve_to_json(report.curve);
    return j;
}

/**
 * The analysis report: reduction structure plus minimization results.  The
 * exact quantities (tuple, basis, mass of V) are "p/q" strings; the numeric
 * ones (inf_value, v0, lambda) are doubles.
 */
inline json analysis_to_json(const FiniteDistribution& dist, const ReducedSupport& rs,
                             const MinimizerReport& report) {
    json j;
    j["well_oriented"] = rs.well_oriented;
    json tuple = json::array();
    for (const VectorXr& u : rs.tuple)
        tuple.push_back(detail::vector_to_json(u));
    j["tuple"] = tuple;
    json basis = json::array();
    for (const VectorXr& v : rs.V.basis())
        basis.push_back(detail::vector_to_json(v));
    j["V_basis"] = basis;
    j["I"] = rs.I;
    j["I_perp"] = rs.I_perp;
    Rational muv = 0;
    try {
        muv = restrict_to(dist, rs.V).second;
    } catch (const ZeroMassError&) {
        muv = 0;
    }
    j["muV"] = format_rational(muv);
    j["inf_value"] = report.inf_value;
    j["degenerate"] = report.degenerate;
    j["v0"] = detail::vector_to_json(report.v0);
    j["lambda"] = report.lambda;
    j["K"] = report.K;
    j["attained"] = report.attained;
    return j;
}

/**
 * CSV rows of a survival curve: engine, start coordinates, horizon,
 * probability, standard error (empty for exact engines).  Doubles are
 * emitted with 17 significant digits so that equal results give equal bytes.
 */
inline std::string curve_to_csv(const SurvivalCurve& curve, bool header = true) {
    std::ostringstream out;
    if (header) {
        out << "engine";
        for (Eigen::Index i = 0; i < curve.start.size(); ++i)
            out << ",start" << i;
        out << ",n,probability,stderr\n";
    }
    for (std::size_t k = 0; k < curve.horizons.size(); ++k) {
        out << engine_name(curve.engine);
        for (Eigen::Index i = 0; i < curve.start.size(); ++i)
            out << ',' << detail::format_double(curve.start(i));
        out << ',' << curve.horizons[k] << ','
            << detail::format_double(curve.probabilities[k]) << ',';
        if (k < curve.mc_stderr.size())
            out << detail::format_double(curve.mc_stderr[k]);
        out << '\n';
    }
    return out.str();
}

} // namespace orthant
