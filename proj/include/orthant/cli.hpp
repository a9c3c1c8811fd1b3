#pragma once

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "orthant/io.hpp"

namespace orthant {

namespace detail {

inline VectorXr parse_start(const std::string& text) {
    std::vector<Rational> coords;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ','))
        coords.push_back(parse_rational(token));
    if (coords.empty())
        throw ParseError("empty start point");
    VectorXr x(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = coords[i];
    return x;
}

inline RateEngine parse_engine(const std::string& name) {
    if (name == "dp")
        return RateEngine::Dp;
    if (name == "spectral")
        return RateEngine::Spectral;
    if (name == "mc")
        return RateEngine::Mc;
    if (name == "mc-tilted")
        return RateEngine::McTilted;
    throw ParseError("unknown engine: " + name +
                     " (expected dp|spectral|mc|mc-tilted)");
}

inline void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out)
        throw DomainError("cannot open output file: " + out_path);
    out << text;
}

inline std::uint64_t seed_fallback() {
    if (const char* env = std::getenv("ORTHANT_EXIT_SEED"))
        return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
    return 1;
}

} // namespace detail

/// Exit codes shared by all subcommands, fixed so scripts can assert on them.
enum ExitCode {
    kExitOk = 0,
    kExitParse = 2,
    kExitDegenerate = 3,
    kExitDomain = 4,
    kExitNoConvergence = 5,
};

/**
 * Command-line front end.
 *
 *   analyze --dist FILE                     reduction + minimization report
 *   rate    --dist FILE --start a,b,..      survival curve and rate estimate
 *   sweep   --dist FILE --start .. --start ..   one report per start, by d(x)
 *   poly    {minimal-check|reduce|decompose|vertices|bound} --poly FILE [--point ..]
 *
 * All output is a deterministic function of the inputs, flags, and seed;
 * --threads never changes output bytes.
 */
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"orthant-exit: exit-time decay rates for orthant-constrained random walks"};
    app.require_subcommand(1);

    std::string dist_path, poly_path, out_path;
    std::string format = "json";
    std::string engine_name_str = "dp";
    std::vector<std::string> start_strs;
    std::string point_str, tilt_str;
    int n_max = 60;
    long long samples = 100000;
    long long trunc = 0;
    std::uint64_t seed = detail::seed_fallback();
    int threads = 1;
    double tol = 1e-9;

    auto add_common = [&](CLI::App* cmd, bool needs_start) {
        cmd->add_option("--dist", dist_path, "distribution JSON file")->required();
        CLI::Option* start = cmd->add_option("--start", start_strs,
                                             "start point, comma-separated rationals");
        if (needs_start)
            start->required();
        cmd->add_option("--n", n_max, "maximum horizon");
        cmd->add_option("--samples", samples, "Monte Carlo replicates");
        cmd->add_option("--seed", seed, "RNG seed (env ORTHANT_EXIT_SEED as fallback)");
        cmd->add_option("--engine", engine_name_str, "dp|spectral|mc|mc-tilted");
        cmd->add_option("--trunc", trunc, "truncation radius (0 = automatic)");
        cmd->add_option("--tilt", tilt_str,
                        "tilt point for mc-tilted (default: the minimizer v0)");
        cmd->add_option("--threads", threads, "worker threads (never changes output)");
        cmd->add_option("--out", out_path, "output file (default: stdout)");
        cmd->add_option("--format", format, "json|csv");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "reduction and minimization report");
    analyze->add_option("--dist", dist_path, "distribution JSON file")->required();
    analyze->add_option("--tol", tol, "optimizer tolerance");
    analyze->add_option("--out", out_path, "output file (default: stdout)");

    CLI::App* rate = app.add_subcommand("rate", "survival curve and rate estimate");
    add_common(rate, true);

    CLI::App* sweep = app.add_subcommand("sweep", "rate reports for several starts");
    add_common(sweep, true);

    CLI::App* poly = app.add_subcommand("poly", "polyhedron minimal-point tools");
    poly->require_subcommand(1);
    std::vector<CLI::App*> poly_cmds;
    for (const char* name : {"minimal-check", "reduce", "decompose", "vertices", "bound"}) {
        CLI::App* sub = poly->add_subcommand(name);
        sub->add_option("--poly", poly_path, "polyhedron JSON file")->required();
        if (std::string(name) != "vertices" && std::string(name) != "bound")
            sub->add_option("--point", point_str, "point, comma-separated rationals")
                ->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        poly_cmds.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (analyze->parsed()) {
            FiniteDistribution dist = load_distribution(dist_path);
            ReducedSupport rs = build_reduced_support(dist);
            MinimizerReport report = minimize_on_vplus(dist, rs, tol);
            json j = analysis_to_json(dist, rs, report);
            detail::emit(j.dump(2) + "\n", out_path);
            return report.degenerate ? kExitDegenerate : kExitOk;
        }

        if (rate->parsed() || sweep->parsed()) {
            FiniteDistribution dist = load_distribution(dist_path);
            ReducedSupport rs = build_reduced_support(dist);
            MinimizerReport min_report = minimize_on_vplus(dist, rs);

            std::vector<VectorXr> xs;
            for (const std::string& s : start_strs)
                xs.push_back(detail::parse_start(s));
            if (rate->parsed() && xs.size() != 1)
                throw ParseError("rate takes exactly one --start");

            EngineOptions opts;
            opts.n_max = n_max;
            opts.trunc = trunc;
            opts.samples = samples;
            opts.seed = seed;
            opts.threads = threads;
            if (!tilt_str.empty())
                opts.tilt_point = detail::parse_start(tilt_str);
            const RateEngine engine = detail::parse_engine(engine_name_str);

            std::vector<RateReport> reports =
                rate_sweep(dist, rs, min_report, xs, engine, opts);

            if (format == "csv") {
                std::string text;
                for (std::size_t i = 0; i < reports.size(); ++i)
                    text += curve_to_csv(reports[i].curve, i == 0);
                detail::emit(text, out_path);
            } else if (format == "json") {
                if (rate->parsed()) {
                    detail::emit(rate_report_to_json(reports.front()).dump(2) + "\n",
                                 out_path);
                } else {
                    json arr = json::array();
                    for (const RateReport& r : reports)
                        arr.push_back(rate_report_to_json(r));
                    detail::emit(arr.dump(2) + "\n", out_path);
                }
            } else {
                throw ParseError("unknown format: " + format + " (expected json|csv)");
            }
            return kExitOk;
        }

        // poly subcommands
        StandardPolyhedron p = load_polyhedron(poly_path);
        json j;
        if (poly_cmds[0]->parsed()) { // minimal-check
            VectorXr x = detail::parse_start(point_str);
            j["minimal"] = is_minimal(p, x);
            j["vertex"] = is_vertex(p, x);
        } else if (poly_cmds[1]->parsed()) { // reduce
            VectorXr x = detail::parse_start(point_str);
            j["reduced"] = detail::vector_to_json(reduce_to_minimal(p, x));
        } else if (poly_cmds[2]->parsed()) { // decompose
            VectorXr x = detail::parse_start(point_str);
            json parts = json::array();
            for (const auto& [vertex, weight] : decompose_minimal(p, x))
                parts.push_back({{"vertex", detail::vector_to_json(vertex)},
                                 {"weight", format_rational(weight)}});
            j["decomposition"] = parts;
        } else if (poly_cmds[3]->parsed()) { // vertices
            json verts = json::array();
            for (const VectorXr& v : enumerate_vertices(p))
                verts.push_back(detail::vector_to_json(v));
            j["vertices"] = verts;
        } else { // bound
            j["M"] = format_rational(bound_M(p));
        }
        detail::emit(j.dump(2) + "\n", out_path);
        return kExitOk;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const NoConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const OverflowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    }
}

} // namespace orthant
