#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include <orthant/io.hpp>

#include "oracles.hpp"

using namespace orthant;
using nlohmann::json;

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("scalars parse exactly or are rejected") {
    CHECK(detail::rational_from_json(json("3/7"), "x") == Rational(3, 7));
    CHECK(detail::rational_from_json(json("-2"), "x") == Rational(-2));
    CHECK(detail::rational_from_json(json(5), "x") == Rational(5));
    CHECK(detail::rational_from_json(json(-12), "x") == Rational(-12));
    CHECK(detail::rational_from_json(json(0.25), "x") == Rational(1, 4));
    CHECK(detail::rational_from_json(json(-1.5), "x") == Rational(-3, 2));

    // 0.1 is not exactly representable; its binary value has a huge
    // denominator, so it must be rejected with a hint, not approximated.
    CHECK_THROWS_MATCHES(detail::rational_from_json(json(0.1), "weight"), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("p/q") &&
                                                         ContainsSubstring("weight")));
    CHECK_THROWS_AS(detail::rational_from_json(json(true), "x"), ParseError);
    CHECK_THROWS_AS(detail::rational_from_json(json::array(), "x"), ParseError);
    CHECK_THROWS_AS(detail::rational_from_json(json("3/0"), "x"), ParseError);
}

TEST_CASE("vectors accept mixed scalar forms") {
    json j = json::array({"1/2", 3, 0.25});
    VectorXr v = detail::vector_from_json(j, "v");
    REQUIRE(v.size() == 3);
    CHECK(v(0) == Rational(1, 2));
    CHECK(v(1) == Rational(3));
    CHECK(v(2) == Rational(1, 4));
    CHECK_THROWS_AS(detail::vector_from_json(json("nope"), "v"), ParseError);
}

TEST_CASE("distribution JSON round-trips exactly") {
    FiniteDistribution d = oracles::axis_drift(Rational(1, 2), Rational(1, 8), Rational(3, 8));
    json j = distribution_to_json(d);
    FiniteDistribution back = distribution_from_json(j);
    REQUIRE(back.dimension == d.dimension);
    REQUIRE(back.atoms.size() == d.atoms.size());
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        CHECK(back.atoms[i].point == d.atoms[i].point);
        CHECK(back.atoms[i].weight == d.atoms[i].weight);
    }
    CHECK(back.lattice == d.lattice);
}

TEST_CASE("distribution JSON validation and structure errors") {
    json good = {{"dimension", 2},
                 {"atoms", json::array({{{"point", {1, -1}}, {"weight", "1/2"}},
                                        {{"point", {-1, 1}}, {"weight", "1/2"}}})}};
    FiniteDistribution d = distribution_from_json(good);
    CHECK(d.atoms.size() == 2);

    json bad_sum = good;
    bad_sum["atoms"][0]["weight"] = "1/3";
    CHECK_THROWS_MATCHES(distribution_from_json(bad_sum), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("off by exactly")));

    json dup = good;
    dup["atoms"][1]["point"] = {1, -1};
    dup["atoms"][1]["weight"] = "1/2";
    CHECK_THROWS_MATCHES(
        distribution_from_json(dup), ParseError,
        Catch::Matchers::MessageMatches(ContainsSubstring("share the same support point")));

    CHECK_THROWS_AS(distribution_from_json(json::array()), ParseError);
    CHECK_THROWS_AS(distribution_from_json(json{{"dimension", 2}}), ParseError);
    json no_weight = {{"dimension", 1}, {"atoms", json::array({{{"point", {1}}}})}};
    CHECK_THROWS_AS(distribution_from_json(no_weight), ParseError);
    json bad_dim = good;
    bad_dim["dimension"] = "two";
    CHECK_THROWS_AS(distribution_from_json(bad_dim), ParseError);
}

TEST_CASE("distribution files load with helpful failures") {
    const char* tmp = std::getenv("TMPDIR");
    std::string dir = tmp ? tmp : "/tmp";
    FiniteDistribution d = oracles::seesaw(Rational(1, 4));
    std::string path =
        oracles::write_temp_file(dir, "orthant_io_dist.json", distribution_to_json(d).dump());

    FiniteDistribution loaded = load_distribution(path);
    CHECK(loaded.atoms.size() == 3);

    std::string broken =
        oracles::write_temp_file(dir, "orthant_io_broken.json", "{not json at all");
    CHECK_THROWS_MATCHES(load_distribution(broken), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("not valid JSON")));
    CHECK_THROWS_MATCHES(load_distribution(dir + "/definitely_missing_file.json"), ParseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
}

TEST_CASE("polyhedron JSON round-trips exactly") {
    std::vector<VectorXr> cols = {oracles::rvec({1, 0}), oracles::rvec({0, 1}),
                                  oracles::rvec({Rational(1, 2), Rational(1, 3)})};
    StandardPolyhedron p = make_polyhedron(cols, oracles::rvec({2, 3}));
    json j = polyhedron_to_json(p);
    StandardPolyhedron back = polyhedron_from_json(j);
    REQUIRE(back.columns.size() == p.columns.size());
    for (std::size_t i = 0; i < p.columns.size(); ++i)
        CHECK(back.columns[i] == p.columns[i]);
    CHECK(back.b == p.b);

    CHECK_THROWS_AS(polyhedron_from_json(json{{"columns", json::array()}, {"b", {1}}}),
                    ParseError);
    CHECK_THROWS_AS(polyhedron_from_json(json{{"b", {1}}}), ParseError);
    // Construction guards surface as parse errors when coming from JSON.
    json degenerate = {{"columns", json::array({json::array({1, 0})})}, {"b", {1, 1}}};
    CHECK_THROWS_AS(polyhedron_from_json(degenerate), ParseError);
}

TEST_CASE("depth serializes infinity as a string") {
    CHECK(depth_to_json(3.0) == json(3.0));
    CHECK(depth_to_json(std::numeric_limits<double>::infinity()) == json("inf"));
}

TEST_CASE("curve JSON carries exactly the fields each engine fills") {
    FiniteDistribution d = oracles::seesaw(Rational(1, 4));
    VectorXr start = oracles::rvec({2, 2});

    SECTION("exact engine: truncation, no error bars") {
        SurvivalCurve c = survival_dp(d, start, 6, 4);
        json j = curve_to_json(c);
        CHECK(j["engine"] == "dp");
        CHECK(j["truncation"] == 4);
        CHECK_FALSE(j.contains("stderr"));
        CHECK_FALSE(j.contains("ess"));
        REQUIRE(j["horizons"].size() == 7);
        CHECK(j["probabilities"][0] == 1.0);
        CHECK(j["start"] == json::array({2.0, 2.0})); // float vector, not exact
    }
    SECTION("plain sampling engine: error bars, no truncation") {
        SurvivalCurve c = mc_survival(d, start, 6, 2000, 5);
        json j = curve_to_json(c);
        CHECK(j["engine"] == "mc");
        CHECK(j.contains("stderr"));
        CHECK_FALSE(j.contains("ess"));
        CHECK_FALSE(j.contains("truncation"));
    }
    SECTION("weighted sampling engine: error bars and effective sample sizes") {
        SurvivalCurve c = mc_tilted_survival(d, oracles::rvec({0, 1}), start, 6, 2000, 5);
        json j = curve_to_json(c);
        CHECK(j["engine"] == "mc-tilted");
        CHECK(j.contains("stderr"));
        CHECK(j.contains("ess"));
    }
}

TEST_CASE("rate report JSON") {
    FiniteDistribution d = oracles::seesaw(Rational(1, 4));
    RateReport rep = spectral_rate(d, oracles::rvec({2, 2}));
    json j = rate_report_to_json(rep);
    CHECK(j["method"] == "spectral");
    CHECK_THAT(j["rate"].get<double>(), WithinAbs(0.5 * std::cos(M_PI / 6.0), 1e-8));
    CHECK_THAT(j["bound"].get<double>(), WithinAbs(0.5, 1e-9));
    CHECK(j["d_of_x"] == json(2.0));
    CHECK(j["converged"] == true);
    CHECK(j["period"] == 2);
    CHECK(j["curve"]["engine"] == "dp");

    // A start covered by the reduced axes has infinite depth.
    FiniteDistribution a = oracles::axis_drift(Rational(1, 2), Rational(1, 4), Rational(1, 4));
    RateReport deep = dp_rate(a, oracles::rvec({1, 1}), 12);
    json dj = rate_report_to_json(deep);
    CHECK(dj["d_of_x"] == json("inf"));
    CHECK(dj["method"] == "ratio");
}

TEST_CASE("analysis JSON lays out the reduction and the minimum") {
    SECTION("reduced walk with an axis split") {
        FiniteDistribution d =
            oracles::axis_drift(Rational(1, 2), Rational(1, 8), Rational(3, 8));
        auto [rs, report] = reduce_and_minimize(d);
        json j = analysis_to_json(d, rs, report);
        CHECK(j["well_oriented"] == false);
        CHECK(j["tuple"].size() == 1);
        CHECK(j["V_basis"].size() == 1);
        CHECK(j["I"] == json::array({1}));
        CHECK(j["I_perp"] == json::array({0}));
        CHECK(j["muV"] == "1/2");
        CHECK_THAT(j["inf_value"].get<double>(), WithinRel(std::sqrt(3.0) / 4.0, 1e-9));
        CHECK(j["degenerate"] == false);
        // The restricted minimum is reached at v0, but the infimum over the
        // whole orthant is approached only in the limit: not attained.
        CHECK(j["attained"] == false);
        CHECK(j["K"] == json::array({1}));
        REQUIRE(j["v0"].size() == 2);
        CHECK(j["lambda"].is_number());
    }
    SECTION("no mass on the reduced support") {
        FiniteDistribution d = oracles::make_dist(
            1, {{{-1}, Rational(1, 2)}, {{-2}, Rational(1, 2)}});
        auto [rs, report] = reduce_and_minimize(d);
        json j = analysis_to_json(d, rs, report);
        CHECK(j["muV"] == "0");
        CHECK(j["degenerate"] == true);
        CHECK(j["inf_value"] == 0.0);
        CHECK(j["V_basis"].empty());
    }
}

TEST_CASE("CSV output is byte-reproducible") {
    SurvivalCurve c;
    c.start = Eigen::VectorXd(2);
    c.start << 2.0, 2.0;
    c.horizons = {0, 1, 2};
    c.probabilities = {1.0, 0.5, 0.25};
    c.engine = Engine::DP;
    c.truncation = 4;

    CHECK(curve_to_csv(c) == "engine,start0,start1,n,probability,stderr\n"
                             "dp,2,2,0,1,\n"
                             "dp,2,2,1,0.5,\n"
                             "dp,2,2,2,0.25,\n");
    CHECK(curve_to_csv(c, false) == "dp,2,2,0,1,\n"
                                    "dp,2,2,1,0.5,\n"
                                    "dp,2,2,2,0.25,\n");

    c.engine = Engine::MC;
    c.truncation = -1;
    c.mc_stderr = {0.0, 0.125, 0.0625};
    CHECK(curve_to_csv(c, false) == "mc,2,2,0,1,0\n"
                                    "mc,2,2,1,0.5,0.125\n"
                                    "mc,2,2,2,0.25,0.0625\n");
}

TEST_CASE("doubles round-trip through their fixed-width rendering") {
    for (double v : {1.0 / 3.0, M_PI, 1e-300, 0.6648039372061, 2.0 / 3.0, 1e17}) {
        const std::string s = detail::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}
