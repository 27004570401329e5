#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "delayosc/config.hpp"
#include "delayosc/dde.hpp"
#include "delayosc/stability.hpp"
#include "delayosc/timeseries.hpp"

namespace delayosc::runner {

struct Preset {
    std::string name;
    std::string description;
    ScenarioConfig config;
};
const std::vector<Preset>& presets();
/// Throws InvalidArgument for an unknown name.
const Preset& find_preset(const std::string& name);

/// The classical mean-field problem the cascade reduces to: alpha = -kappa,
/// beta = -exp(i phi) sqrt(G kappa1 kappa2), detuning omega, and an empty
/// delayed term during the first interval (zero history) unless configured.
dde::DdeProblem dde_problem(const ScenarioConfig& c);

struct MethodResult {
    Method method = Method::dde;
    TimeSeries series;
    /// False for dde, whose samples carry only the amplitude.
    bool has_fluctuations = true;
    dde::Trajectory trajectory;                 // dde only
    std::vector<std::size_t> equation_counts;  // moments only
    double max_trace_drift = 0.0;               // quantum only
    double min_uncertainty_product = 0.0;       // quantum only
};

/// Budget after the environment override is applied.
std::size_t effective_budget(const ScenarioConfig& c);

/// `budget` beats both the environment and the config.
MethodResult run_method(const ScenarioConfig& c, Method m, std::optional<std::size_t> budget = {});

struct RunOptions {
    /// Empty: use the config's output_dir.
    std::string out_dir;
    bool plots = false;
    /// Methods of one scenario run concurrently on up to this many threads.
    std::size_t parallel = 1;
    /// Beats both the config and the environment.
    std::optional<std::size_t> budget;
};

struct ScenarioOutput {
    std::vector<MethodResult> results;
    std::vector<std::string> files;
};

/// Writes <name>_<method>.csv per method, <name>_compare.csv on the common
/// grid when more than one method ran, and SVG charts when asked.
ScenarioOutput run_scenario(ScenarioConfig c, const RunOptions& opt);

/// Samples of `b` on the grid of `a` (or the reverse, whichever is coarser).
/// Throws GridMismatch unless one step is an integer multiple of the other.
struct Aligned {
    std::vector<TimeSample> a, b;
};
Aligned align(const TimeSeries& a, const TimeSeries& b);

struct Deviation {
    std::string observable;
    double max_abs = 0.0;
    double rms = 0.0;
    std::vector<double> per_interval_max;
};

struct PairReport {
    Method reference;
    Method other;
    std::vector<Deviation> deviations;
    /// Scales of the reference amplitude, for relative tolerances.
    double max_abs_a = 0.0;
    double diameter = 0.0;
    const Deviation* find(const std::string& observable) const;
};

struct CompareReport {
    std::string scenario;
    std::vector<PairReport> pairs;
    const PairReport* find(Method reference, Method other) const;
    /// "key=value" lines, e.g. dde_vs_quantum.a.max=1.2e-05
    std::string to_key_value() const;
    std::string summary() const;
};

CompareReport compare_results(const std::string& scenario, const std::vector<MethodResult>& results);
/// Runs every selected method, then compares each pair against the first.
/// Needs at least two methods.
CompareReport compare_methods(ScenarioConfig c, const RunOptions& opt);

/// Largest distance between two points of the (Re a, Im a) curve.
double curve_diameter(const std::vector<TimeSample>& s);

struct StabilityChartOptions {
    int branches = 1;
    std::size_t n_samples = 20000;
    double theta_min = 0.0;
    double theta_max = 1e300;
    double alpha_min = -6.0, alpha_max = 2.0;
    double beta_min = -8.0, beta_max = 2.0;
    std::size_t grid_n = 41;
    std::string out_dir = "out";
    bool plot = false;
};

struct GridPoint {
    double alpha_prime;
    double beta_prime;
    double max_re;
    stability::Stability verdict;
};

struct StabilityChart {
    std::vector<stability::StabilityCurve> curves;
    std::vector<GridPoint> grid;
    std::vector<std::string> files;
};

/// C_j samples restricted to [theta_min, theta_max] (open at the singular
/// ends) plus a classification grid; writes c_curve_<j>.csv and
/// stability_grid.csv.
StabilityChart export_stability_chart(const StabilityChartOptions& opt);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
/// Minimal standalone SVG line chart.
void write_svg_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<PlotSeries>& series);

}  // namespace delayosc::runner
