// Command-line front end: run, compare, stability, presets.
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "delayosc/errors.hpp"
#include "delayosc/runner.hpp"

namespace fs = std::filesystem;
using namespace delayosc;
using namespace delayosc::runner;

namespace {

struct Common {
    std::string out;
    std::string budget;
    bool plots = false;
    std::size_t parallel = 1;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "Output directory (default: the config's output_dir)");
    app->add_option("--budget", c.budget, std::string("Memory budget in bytes (K/M/G suffixes allowed); beats ") + kBudgetEnv);
    app->add_flag("--plots", c.plots, "Also write SVG charts");
    app->add_option("--parallel", c.parallel, "Run up to N independent jobs at once")->check(CLI::PositiveNumber);
}

RunOptions options(const Common& c) {
    RunOptions o;
    o.out_dir = c.out;
    o.plots = c.plots;
    o.parallel = c.parallel;
    if (!c.budget.empty()) o.budget = parse_bytes(c.budget, "--budget");
    return o;
}

// A path to a JSON file, or the name of a bundled preset.
ScenarioConfig resolve(const std::string& what) {
    if (fs::exists(what)) return load_config(what);
    for (const auto& p : presets())
        if (p.name == what) return p.config;
    throw ConfigError("<file>", "no such file or preset: " + what);
}

int cmd_run(const std::vector<std::string>& configs, const Common& common) {
    RunOptions opt = options(common);
    std::vector<ScenarioConfig> cs;
    for (const auto& c : configs) cs.push_back(resolve(c));

    auto one = [](const ScenarioConfig& c, RunOptions o) { return run_scenario(c, o); };
    std::vector<ScenarioOutput> outs(cs.size());
    if (cs.size() > 1 && opt.parallel > 1) {
        RunOptions inner = opt;
        inner.parallel = 1;
        for (std::size_t start = 0; start < cs.size(); start += opt.parallel) {
            std::vector<std::future<ScenarioOutput>> jobs;
            const std::size_t stop = std::min(cs.size(), start + opt.parallel);
            for (std::size_t i = start; i < stop; ++i) jobs.push_back(std::async(std::launch::async, one, std::cref(cs[i]), inner));
            for (std::size_t i = start; i < stop; ++i) outs[i] = jobs[i - start].get();
        }
    } else {
        for (std::size_t i = 0; i < cs.size(); ++i) outs[i] = one(cs[i], opt);
    }
    for (const auto& o : outs)
        for (const auto& f : o.files) std::cout << f << '\n';
    return 0;
}

int cmd_compare(const std::string& config, const Common& common) {
    const ScenarioConfig c = resolve(config);
    const RunOptions opt = options(common);
    const CompareReport rep = compare_methods(c, opt);
    const std::string dir = opt.out_dir.empty() ? c.output_dir : opt.out_dir;
    const std::string path = (fs::path(dir) / (c.name + "_report.txt")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << rep.to_key_value();
    std::cout << rep.to_key_value() << '\n' << rep.summary();
    std::cerr << "report written to " << path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-feedback self-oscillator toolkit"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::string> run_configs;
    auto* run = app.add_subcommand("run", "Run one or more scenarios (JSON file or preset name)");
    run->add_option("config", run_configs, "Scenario files or preset names")->required();
    add_common(run, common);

    std::string compare_config;
    auto* compare = app.add_subcommand("compare", "Run a scenario and report deviations between its methods");
    compare->add_option("config", compare_config, "Scenario file or preset name")->required();
    add_common(compare, common);

    StabilityChartOptions chart;
    std::vector<double> arange, brange;
    auto* stab = app.add_subcommand("stability", "Export C_j curves and a stability grid");
    stab->add_option("--branches", chart.branches, "Number of curves C_0..C_{n-1}")->check(CLI::PositiveNumber);
    stab->add_option("--samples", chart.n_samples, "Samples per curve");
    stab->add_option("--theta-min", chart.theta_min, "Lower theta bound");
    stab->add_option("--theta-max", chart.theta_max, "Upper theta bound");
    stab->add_option("--alpha-range", arange, "Grid range of alpha' as MIN MAX")->expected(2);
    stab->add_option("--beta-range", brange, "Grid range of beta' as MIN MAX")->expected(2);
    stab->add_option("--grid", chart.grid_n, "Grid points per axis");
    add_common(stab, common);

    auto* pre = app.add_subcommand("presets", "Bundled scenarios");
    pre->require_subcommand(1);
    pre->add_subcommand("list", "List preset names");
    std::string export_dir;
    auto* pexport = pre->add_subcommand("export", "Write every preset as a JSON config");
    pexport->add_option("dir", export_dir, "Target directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_configs, common);
        if (compare->parsed()) return cmd_compare(compare_config, common);
        if (stab->parsed()) {
            if (arange.size() == 2) chart.alpha_min = arange[0], chart.alpha_max = arange[1];
            if (brange.size() == 2) chart.beta_min = brange[0], chart.beta_max = brange[1];
            chart.out_dir = common.out.empty() ? "out/stability" : common.out;
            chart.plot = common.plots;
            for (const auto& f : export_stability_chart(chart).files) std::cout << f << '\n';
            return 0;
        }
        if (pre->got_subcommand("list")) {
            for (const auto& p : presets()) std::cout << p.name << "\t" << p.description << '\n';
            return 0;
        }
        if (pexport->parsed()) {
            fs::create_directories(export_dir);
            for (const auto& p : presets()) {
                const std::string path = (fs::path(export_dir) / (p.name + ".json")).string();
                save_config(path, p.config);
                std::cout << path << '\n';
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
