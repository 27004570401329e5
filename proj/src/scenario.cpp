#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>

#include "delayosc/cascade.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/moments.hpp"
#include "delayosc/runner.hpp"

namespace delayosc::runner {

namespace fs = std::filesystem;

dde::DdeProblem dde_problem(const ScenarioConfig& c) {
    const auto& p = c.params;
    dde::DdeProblem d;
    d.alpha = -p.kappa();
    d.beta = -std::polar(p.feedback(), p.phi);
    d.omega = p.omega;
    d.gamma_non = p.gamma_non;
    d.tau = p.tau;
    d.history = c.history == "exponential" ? dde::HistorySpec::exponential(c.history_rate) : dde::HistorySpec::zero();
    d.x0 = c.alpha0();
    d.horizon = static_cast<double>(c.m_max + 1) * p.tau;
    d.dt = c.effective_dde_dt();
    return d;
}

std::size_t effective_budget(const ScenarioConfig& c) { return budget_from_env(c.budget_bytes); }

MethodResult run_method(const ScenarioConfig& c, Method m, std::optional<std::size_t> budget) {
    MethodResult r;
    r.method = m;
    switch (m) {
        case Method::dde: {
            const auto prob = dde_problem(c);
            r.trajectory = dde::integrate_dde(prob);
            r.has_fluctuations = false;
            const std::size_t n = dde::steps_per_delay(prob.tau, prob.dt);
            for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
                const cd x = r.trajectory.values[i];
                r.series.samples.push_back({r.trajectory.times[i], x, std::norm(x), 0.0, 0.0, i == 0 ? 0 : (i - 1) / n});
            }
            break;
        }
        case Method::quantum: {
            cascade::QuantumOptions o;
            o.m_max = c.m_max;
            o.n_trunc = c.n_trunc;
            o.dt = c.dt;
            o.integrator = c.integrator;
            o.budget_bytes = budget ? *budget : effective_budget(c);
            auto run = cascade::evolve_delayed(c.params, fock::coherent(c.n_trunc, c.alpha0()), o);
            r.series = std::move(run.series);
            r.max_trace_drift = run.max_trace_drift;
            r.min_uncertainty_product = run.min_uncertainty_product;
            break;
        }
        case Method::moments: {
            moments::MomentOptions o;
            o.m_max = c.m_max;
            o.k = c.k;
            o.dt = c.dt;
            auto run = moments::integrate_moment_system(c.params, moments::coherent_moments(c.alpha0()), o);
            r.series = std::move(run.series);
            r.equation_counts = std::move(run.equation_counts);
            break;
        }
    }
    return r;
}

namespace {

std::vector<MethodResult> run_all(const ScenarioConfig& c, std::size_t parallel, std::optional<std::size_t> budget) {
    std::vector<MethodResult> results(c.methods.size());
    if (parallel <= 1 || c.methods.size() == 1) {
        for (std::size_t i = 0; i < c.methods.size(); ++i) results[i] = run_method(c, c.methods[i], budget);
        return results;
    }
    // Waves of at most `parallel` concurrent methods; first failure wins.
    for (std::size_t start = 0; start < c.methods.size(); start += parallel) {
        std::vector<std::future<MethodResult>> jobs;
        const std::size_t stop = std::min(c.methods.size(), start + parallel);
        for (std::size_t i = start; i < stop; ++i)
            jobs.push_back(std::async(std::launch::async, run_method, std::cref(c), c.methods[i], budget));
        for (std::size_t i = start; i < stop; ++i) results[i] = jobs[i - start].get();
    }
    return results;
}

double step_of(const TimeSeries& s) {
    if (s.size() < 2) throw GridMismatch("time series with fewer than two samples");
    return s[1].t - s[0].t;
}

std::size_t stride_between(double coarse, double fine) {
    const double ratio = coarse / fine;
    const double r = std::round(ratio);
    if (r < 1.0 || std::abs(ratio - r) > 1e-6 * ratio)
        throw GridMismatch("time steps " + format_number(coarse) + " and " + format_number(fine) +
                           " are not integer multiples");
    return static_cast<std::size_t>(r);
}

void write_compare_csv(const std::string& path, const std::vector<MethodResult>& results) {
    double coarse = 0.0;
    for (const auto& r : results) coarse = std::max(coarse, step_of(r.series));
    std::vector<std::size_t> strides;
    std::size_t rows = static_cast<std::size_t>(-1);
    for (const auto& r : results) {
        strides.push_back(stride_between(coarse, step_of(r.series)));
        rows = std::min(rows, (r.series.size() - 1) / strides.back() + 1);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << "t";
    for (const auto& r : results) {
        const std::string m = to_string(r.method);
        os << ",re_a_" << m << ",im_a_" << m;
        if (r.has_fluctuations) os << ",n_" << m << ",dX_" << m << ",dP_" << m;
    }
    os << ",interval_index\n";
    for (std::size_t row = 0; row < rows; ++row) {
        const TimeSample& first = results[0].series[row * strides[0]];
        os << format_number(first.t);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const TimeSample& s = results[i].series[row * strides[i]];
            os << ',' << format_number(s.a.real()) << ',' << format_number(s.a.imag());
            if (results[i].has_fluctuations)
                os << ',' << format_number(s.n) << ',' << format_number(s.dX) << ',' << format_number(s.dP);
        }
        os << ',' << first.interval << '\n';
    }
}

void write_plots(const std::string& dir, const ScenarioConfig& c, const std::vector<MethodResult>& results,
                 std::vector<std::string>& files) {
    std::vector<PlotSeries> re, n, phase;
    for (const auto& r : results) {
        PlotSeries s{to_string(r.method), {}, {}}, sn = s, sp = s;
        const std::size_t stride = std::max<std::size_t>(1, r.series.size() / 4000);
        for (std::size_t i = 0; i < r.series.size(); i += stride) {
            const auto& x = r.series[i];
            s.x.push_back(x.t);
            s.y.push_back(x.a.real());
            sp.x.push_back(x.a.real());
            sp.y.push_back(x.a.imag());
            if (r.has_fluctuations) {
                sn.x.push_back(x.t);
                sn.y.push_back(x.n);
            }
        }
        re.push_back(std::move(s));
        phase.push_back(std::move(sp));
        if (r.has_fluctuations) n.push_back(std::move(sn));
    }
    auto emit = [&](const std::string& suffix, const std::string& title, const std::string& xl, const std::string& yl,
                    const std::vector<PlotSeries>& ss) {
        if (ss.empty()) return;
        const std::string path = (fs::path(dir) / (c.name + suffix)).string();
        write_svg_chart(path, c.name + ": " + title, xl, yl, ss);
        files.push_back(path);
    };
    emit("_re_a.svg", "Re <a>", "t", "Re <a>", re);
    emit("_n.svg", "<n>", "t", "<n>", n);
    emit("_phase.svg", "phase plane", "Re <a>", "Im <a>", phase);
}

}  // namespace

ScenarioOutput run_scenario(ScenarioConfig c, const RunOptions& opt) {
    c.validate();
    const std::string dir = opt.out_dir.empty() ? c.output_dir : opt.out_dir;
    fs::create_directories(dir);

    ScenarioOutput out;
    out.results = run_all(c, opt.parallel, opt.budget);
    for (const auto& r : out.results) {
        const std::string path = (fs::path(dir) / (c.name + "_" + to_string(r.method) + ".csv")).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot write " + path);
        if (r.method == Method::dde) {
            dde::write_csv(os, r.trajectory);
        } else {
            write_csv(os, r.series);
        }
        out.files.push_back(path);
    }
    if (out.results.size() > 1) {
        const std::string path = (fs::path(dir) / (c.name + "_compare.csv")).string();
        write_compare_csv(path, out.results);
        out.files.push_back(path);
    }
    if (opt.plots) write_plots(dir, c, out.results, out.files);
    return out;
}

StabilityChart export_stability_chart(const StabilityChartOptions& opt) {
    if (opt.branches < 1) throw InvalidArgument("need at least one branch");
    if (opt.n_samples < 2) throw InvalidArgument("need at least two samples per branch");
    if (!(opt.theta_min < opt.theta_max)) throw InvalidArgument("empty theta range");
    if (!(opt.alpha_min < opt.alpha_max) || !(opt.beta_min < opt.beta_max)) throw InvalidArgument("empty grid range");
    if (opt.grid_n < 2) throw InvalidArgument("grid needs at least two points per axis");

    StabilityChart chart;
    fs::create_directories(opt.out_dir);
    const double pi = std::numbers::pi;
    for (int j = 0; j < opt.branches; ++j) {
        const double lo = std::max(j * pi, opt.theta_min);
        const double hi = std::min((j + 1) * pi, opt.theta_max);
        stability::StabilityCurve curve;
        curve.branch = j;
        if (lo < hi) {
            for (std::size_t i = 0; i < opt.n_samples; ++i) {
                const double th = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(opt.n_samples + 1);
                curve.samples.push_back(stability::c_curve_point(th));
            }
        }
        const std::string path = (fs::path(opt.out_dir) / ("c_curve_" + std::to_string(j) + ".csv")).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot write " + path);
        os << "theta,alpha_prime,beta_prime\n";
        for (const auto& s : curve.samples)
            os << format_number(s.theta) << ',' << format_number(s.alpha_prime) << ',' << format_number(s.beta_prime)
               << '\n';
        chart.files.push_back(path);
        chart.curves.push_back(std::move(curve));
    }

    const std::string gpath = (fs::path(opt.out_dir) / "stability_grid.csv").string();
    std::ofstream gs(gpath, std::ios::binary);
    if (!gs) throw Error("cannot write " + gpath);
    gs << "alpha_prime,beta_prime,max_re_z,classification\n";
    const double step_a = (opt.alpha_max - opt.alpha_min) / static_cast<double>(opt.grid_n - 1);
    const double step_b = (opt.beta_max - opt.beta_min) / static_cast<double>(opt.grid_n - 1);
    for (std::size_t ib = 0; ib < opt.grid_n; ++ib) {
        for (std::size_t ia = 0; ia < opt.grid_n; ++ia) {
            GridPoint g;
            g.alpha_prime = opt.alpha_min + step_a * static_cast<double>(ia);
            g.beta_prime = opt.beta_min + step_b * static_cast<double>(ib);
            g.max_re = stability::characteristic_roots(g.alpha_prime, g.beta_prime).front().real();
            g.verdict = stability::classify_stability(g.alpha_prime, g.beta_prime);
            gs << format_number(g.alpha_prime) << ',' << format_number(g.beta_prime) << ',' << format_number(g.max_re)
               << ',' << stability::to_string(g.verdict) << '\n';
            chart.grid.push_back(g);
        }
    }
    chart.files.push_back(gpath);

    if (opt.plot) {
        std::vector<PlotSeries> ss;
        for (const auto& cv : chart.curves) {
            PlotSeries s{"C_" + std::to_string(cv.branch), {}, {}};
            const std::size_t stride = std::max<std::size_t>(1, cv.samples.size() / 2000);
            for (std::size_t i = 0; i < cv.samples.size(); i += stride) {
                // Far from the origin the branches run off to infinity.
                const auto& p = cv.samples[i];
                if (p.alpha_prime < opt.alpha_min || p.alpha_prime > opt.alpha_max || p.beta_prime < opt.beta_min ||
                    p.beta_prime > opt.beta_max)
                    continue;
                s.x.push_back(p.alpha_prime);
                s.y.push_back(p.beta_prime);
            }
            ss.push_back(std::move(s));
        }
        PlotSeries stable{"stable grid points", {}, {}};
        for (const auto& g : chart.grid)
            if (g.verdict == stability::Stability::stable) {
                stable.x.push_back(g.alpha_prime);
                stable.y.push_back(g.beta_prime);
            }
        ss.push_back(std::move(stable));
        const std::string path = (fs::path(opt.out_dir) / "stability_chart.svg").string();
        write_svg_chart(path, "stability chart", "alpha'", "beta'", ss);
        chart.files.push_back(path);
    }
    return chart;
}

}  // namespace delayosc::runner
