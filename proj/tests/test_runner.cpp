#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "delayosc/errors.hpp"
#include "delayosc/runner.hpp"

using namespace delayosc;
using namespace delayosc::runner;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("delayosc_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string field_of(const std::string& json) {
    try {
        parse_config(json);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

/// Scoped environment variable.
struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (value) ::setenv(kBudgetEnv, value, 1);
        else ::unsetenv(kBudgetEnv);
    }
    ~EnvGuard() { ::unsetenv(kBudgetEnv); }
};

}  // namespace

TEST_CASE("presets round-trip through serialization") {
    REQUIRE(presets().size() >= 4);
    for (const auto& p : presets()) {
        CAPTURE(p.name);
        CHECK_NOTHROW(p.config.validate());
        CHECK(parse_config(serialize_config(p.config)) == p.config);
        CHECK(find_preset(p.name).config == p.config);
    }
    CHECK_THROWS_AS(find_preset("nope"), InvalidArgument);
}

TEST_CASE("shipped preset files match the built-ins") {
    const fs::path dir = fs::path(DELAYOSC_SOURCE_DIR) / "presets";
    for (const auto& p : presets()) {
        CAPTURE(p.name);
        const fs::path f = dir / (p.name + ".json");
        REQUIRE(fs::exists(f));
        CHECK(load_config(f.string()) == p.config);
        CHECK(slurp(f) == serialize_config(p.config));
    }
}

TEST_CASE("preset parameter sets") {
    const auto& g15 = find_preset("linear-g1.5").config;
    CHECK(g15.params.G == 1.5);
    CHECK(std::abs(g15.params.tau - 3.5724) < 1e-4);
    const auto& cyc = find_preset("closed-cycle-g4").config;
    CHECK(cyc.params.omega * cyc.params.tau == doctest::Approx(2 * std::numbers::pi).epsilon(1e-4));
    CHECK(cyc.params.G == 4.0);
    const auto& nl = find_preset("nonlinear-g1.2").config;
    CHECK(nl.params.tau == 6.284);
    CHECK(nl.params.gamma_non == nl.params.kappa());
}

TEST_CASE("invalid configs name the offending field") {
    CHECK(field_of(R"({"G": 0.5})") == "G");
    CHECK(field_of(R"({"n_trunc": 1})") == "n_trunc");
    CHECK(field_of(R"({"n_trunc": -3})") == "n_trunc");
    CHECK(field_of(R"({"k": 0})") == "k");
    CHECK(field_of(R"({"tau": 0})") == "tau");
    CHECK(field_of(R"({"dt": 5, "tau": 1})") == "dt");
    CHECK(field_of(R"({"methods": ["dde", "fourier"]})") == "methods");
    CHECK(field_of(R"({"methods": []})") == "methods");
    CHECK(field_of(R"({"colour": 3})") == "colour");
    CHECK(field_of(R"({"kappa1": "one"})") == "kappa1");
    CHECK(field_of(R"({"noise_model": "pink"})") == "noise_model");
    CHECK(field_of(R"({"integrator": "euler"})") == "integrator");
    CHECK(field_of(R"({"methods": ["quantum"], "n_trunc": 4, "alpha0_re": 2})") == "alpha0_re");
    CHECK(field_of(R"({"history": "exponential", "methods": ["dde", "moments"]})") == "history");
    CHECK(field_of("{ not json") == "<file>");
    CHECK(field_of("[1, 2]") == "<file>");
    CHECK(field_of(R"({"G": 1.5, "methods": ["dde", "moments"]})").empty());
    // absent keys keep their defaults
    CHECK(parse_config("{}") == ScenarioConfig{});
}

TEST_CASE("byte counts and the budget override") {
    CHECK(parse_bytes("1024", "x") == 1024);
    CHECK(parse_bytes("3K", "x") == 3072);
    CHECK(parse_bytes("2MiB", "x") == 2u << 20);
    CHECK(parse_bytes("4G", "x") == std::size_t{4} << 30);
    CHECK_THROWS_AS(parse_bytes("lots", "x"), ConfigError);
    CHECK_THROWS_AS(parse_bytes("5T", "x"), ConfigError);
    CHECK_THROWS_AS(parse_bytes("0", "x"), ConfigError);

    ScenarioConfig c;
    c.budget_bytes = 12345;
    {
        EnvGuard g(nullptr);
        CHECK(effective_budget(c) == 12345);
    }
    {
        EnvGuard g("1M");
        CHECK(effective_budget(c) == 1u << 20);
        // a tiny environment budget stops the quantum run
        c.methods = {Method::quantum};
        c.n_trunc = 12;
        c.m_max = 1;
        CHECK_THROWS_AS(run_method(c, Method::quantum), BudgetExceeded);
        // the explicit budget wins
        CHECK_NOTHROW(run_method(c, Method::quantum, std::size_t{1} << 30));
    }
    {
        EnvGuard g("junk");
        CHECK_THROWS_AS(effective_budget(c), ConfigError);
    }
}

TEST_CASE("BudgetExceeded for a seven-copy chain") {
    ScenarioConfig c = find_preset("linear-g1.5").config;
    c.methods = {Method::quantum};
    c.m_max = 6;
    c.n_trunc = 12;
    RunOptions o;
    o.out_dir = scratch("budget").string();
    CHECK_THROWS_AS(run_scenario(c, o), BudgetExceeded);
}

TEST_CASE("dde and first-order moments agree on the linear preset") {
    ScenarioConfig c = find_preset("linear-g1.5").config;
    c.methods = {Method::dde, Method::moments};
    RunOptions o;
    o.out_dir = scratch("linear").string();
    const auto out = run_scenario(c, o);
    REQUIRE(out.results.size() == 2);
    for (const char* f : {"linear-g1.5_dde.csv", "linear-g1.5_moments.csv", "linear-g1.5_compare.csv"})
        CHECK(fs::exists(fs::path(o.out_dir) / f));
    const auto rep = compare_results(c.name, out.results);
    const auto* pair = rep.find(Method::dde, Method::moments);
    REQUIRE(pair != nullptr);
    CHECK(pair->find("a")->max_abs < 1e-9);
    CHECK(pair->find("n") == nullptr);  // dde carries no fluctuations
    CHECK(rep.to_key_value().find("dde_vs_moments.a.max=") != std::string::npos);
}

TEST_CASE("quantum run of the linear preset fits the default budget") {
    ScenarioConfig c = find_preset("linear-g1.5").config;
    c.methods = {Method::quantum};
    c.m_max = 1;
    c.n_trunc = 12;
    const auto r = run_method(c, Method::quantum);
    CHECK(r.series.back().t == doctest::Approx(2 * c.params.tau));
    CHECK(r.max_trace_drift < 1e-8);
}

TEST_CASE("comparison plumbing") {
    ScenarioConfig c;
    c.params.G = 1.5;
    c.params.tau = 1.0;
    c.m_max = 1;
    c.dt = 0.01;
    const auto a = run_method(c, Method::dde);
    SUBCASE("a method against itself") {
        const auto rep = compare_results("self", {a, a});
        for (const auto& d : rep.pairs.at(0).deviations) CHECK(d.max_abs == 0.0);
    }
    SUBCASE("nested grids align, others do not") {
        ScenarioConfig coarse = c;
        coarse.dt = 0.02;
        const auto b = run_method(coarse, Method::dde);
        const auto al = align(a.series, b.series);
        CHECK(al.a.size() == b.series.size());
        CHECK(al.a.size() == al.b.size());
        coarse.dt = 0.015;
        const auto bad = run_method(coarse, Method::dde);
        CHECK_THROWS_AS(align(a.series, bad.series), GridMismatch);
    }
    SUBCASE("needs two methods") {
        RunOptions o;
        o.out_dir = scratch("one").string();
        CHECK_THROWS_AS(compare_methods(c, o), ConfigError);
    }
    SUBCASE("curve diameter") {
        std::vector<TimeSample> s(3);
        s[1].a = cd(3.0, 0.0);
        s[2].a = cd(0.0, 4.0);
        CHECK(curve_diameter(s) == doctest::Approx(5.0));
    }
}

TEST_CASE("identical configs give byte-identical files") {
    ScenarioConfig c = find_preset("linear-g1.5").config;
    c.methods = {Method::dde, Method::moments, Method::quantum};
    c.n_trunc = 4;
    c.alpha0_re = 0.5;
    c.m_max = 1;
    c.dt = 0.05;
    RunOptions o1, o2;
    o1.out_dir = scratch("det1").string();
    o2.out_dir = scratch("det2").string();
    o2.parallel = 3;
    o1.plots = o2.plots = true;
    const auto r1 = run_scenario(c, o1);
    const auto r2 = run_scenario(c, o2);
    REQUIRE(r1.files.size() == r2.files.size());
    for (std::size_t i = 0; i < r1.files.size(); ++i) {
        CAPTURE(r1.files[i]);
        CHECK(fs::path(r1.files[i]).filename() == fs::path(r2.files[i]).filename());
        CHECK(slurp(r1.files[i]) == slurp(r2.files[i]));
    }
    // twelve significant digits, '.' separator
    const std::string csv = slurp(fs::path(o1.out_dir) / "linear-g1.5_dde.csv");
    CHECK(csv.rfind("t,re_x,im_x\n", 0) == 0);
    CHECK(csv.find("\r") == std::string::npos);
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("stability chart export") {
    StabilityChartOptions o;
    o.out_dir = scratch("chart").string();
    o.branches = 2;
    o.grid_n = 9;
    o.alpha_min = -2.0;
    o.alpha_max = 0.0;
    o.beta_min = -std::numbers::pi / 2 * 2;
    o.beta_max = 0.0;
    o.plot = true;
    const auto chart = export_stability_chart(o);
    REQUIRE(chart.curves.size() == 2);
    CHECK(chart.curves[0].samples.size() == o.n_samples);
    double best = 1e9;
    for (const auto& s : chart.curves[0].samples)
        best = std::min(best, std::hypot(s.alpha_prime + 3.573, s.beta_prime + 4.375));
    CHECK(best < 3e-3);
    CHECK(chart.grid.size() == 81);
    bool saw_stable = false, saw_boundary = false;
    for (const auto& g : chart.grid) {
        CHECK(g.verdict == stability::classify_stability(g.alpha_prime, g.beta_prime));
        if (g.alpha_prime == -1.0 && g.beta_prime == doctest::Approx(-std::numbers::pi / 4)) saw_stable = g.verdict == stability::Stability::stable;
        if (g.alpha_prime == 0.0 && g.beta_prime == doctest::Approx(-std::numbers::pi / 2)) saw_boundary = g.verdict == stability::Stability::oscillatory_boundary;
    }
    CHECK(saw_stable);
    CHECK(saw_boundary);
    CHECK(stability::classify_stability(-1.0, -0.5) == stability::Stability::stable);
    for (const char* f : {"c_curve_0.csv", "c_curve_1.csv", "stability_grid.csv", "stability_chart.svg"})
        CHECK(fs::exists(fs::path(o.out_dir) / f));
    const std::string head = slurp(fs::path(o.out_dir) / "c_curve_0.csv").substr(0, 30);
    CHECK(head.rfind("theta,alpha_prime,beta_prime\n", 0) == 0);
    StabilityChartOptions bad = o;
    bad.theta_min = 5.0;
    bad.theta_max = 1.0;
    CHECK_THROWS_AS(export_stability_chart(bad), InvalidArgument);
}
