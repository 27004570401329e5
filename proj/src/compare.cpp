#include <algorithm>
#include <cmath>
#include <sstream>

#include "delayosc/errors.hpp"
#include "delayosc/runner.hpp"

namespace delayosc::runner {

namespace {

double step_of(const TimeSeries& s) {
    if (s.size() < 2) throw GridMismatch("time series with fewer than two samples");
    return s[1].t - s[0].t;
}

std::size_t stride_for(double coarse, double fine) {
    const double ratio = coarse / fine;
    const double r = std::round(ratio);
    if (r < 1.0 || std::abs(ratio - r) > 1e-6 * ratio)
        throw GridMismatch("time steps " + format_number(coarse) + " and " + format_number(fine) +
                           " are not integer multiples");
    return static_cast<std::size_t>(r);
}

Deviation deviation(const Aligned& al, const std::string& name, double (*diff)(const TimeSample&, const TimeSample&)) {
    Deviation d;
    d.observable = name;
    double sq = 0.0;
    for (std::size_t i = 0; i < al.a.size(); ++i) {
        const double e = diff(al.a[i], al.b[i]);
        d.max_abs = std::max(d.max_abs, e);
        sq += e * e;
        const std::size_t iv = al.a[i].interval;
        if (d.per_interval_max.size() <= iv) d.per_interval_max.resize(iv + 1, 0.0);
        d.per_interval_max[iv] = std::max(d.per_interval_max[iv], e);
    }
    d.rms = al.a.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(al.a.size()));
    return d;
}

}  // namespace

Aligned align(const TimeSeries& a, const TimeSeries& b) {
    const double ha = step_of(a), hb = step_of(b);
    const std::size_t sa = ha >= hb ? 1 : stride_for(hb, ha);
    const std::size_t sb = ha >= hb ? stride_for(ha, hb) : 1;
    Aligned out;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size(); i += sa, j += sb) {
        out.a.push_back(a[i]);
        out.b.push_back(b[j]);
    }
    return out;
}

double curve_diameter(const std::vector<TimeSample>& s) {
    const std::size_t stride = std::max<std::size_t>(1, s.size() / 3000);
    double best = 0.0;
    for (std::size_t i = 0; i < s.size(); i += stride)
        for (std::size_t j = i + stride; j < s.size(); j += stride) best = std::max(best, std::abs(s[i].a - s[j].a));
    return best;
}

const Deviation* PairReport::find(const std::string& observable) const {
    for (const auto& d : deviations)
        if (d.observable == observable) return &d;
    return nullptr;
}

const PairReport* CompareReport::find(Method reference, Method other) const {
    for (const auto& p : pairs)
        if (p.reference == reference && p.other == other) return &p;
    return nullptr;
}

CompareReport compare_results(const std::string& scenario, const std::vector<MethodResult>& results) {
    if (results.size() < 2) throw InvalidArgument("comparison needs at least two methods");
    CompareReport rep;
    rep.scenario = scenario;
    const MethodResult& ref = results.front();
    for (std::size_t i = 1; i < results.size(); ++i) {
        const MethodResult& other = results[i];
        const Aligned al = align(ref.series, other.series);
        PairReport pr;
        pr.reference = ref.method;
        pr.other = other.method;
        for (const auto& s : al.a) pr.max_abs_a = std::max(pr.max_abs_a, std::abs(s.a));
        pr.diameter = curve_diameter(al.a);
        pr.deviations.push_back(deviation(al, "a", [](const TimeSample& x, const TimeSample& y) { return std::abs(x.a - y.a); }));
        if (ref.has_fluctuations && other.has_fluctuations) {
            pr.deviations.push_back(deviation(al, "n", [](const TimeSample& x, const TimeSample& y) { return std::abs(x.n - y.n); }));
            pr.deviations.push_back(deviation(al, "dX", [](const TimeSample& x, const TimeSample& y) { return std::abs(x.dX - y.dX); }));
            pr.deviations.push_back(deviation(al, "dP", [](const TimeSample& x, const TimeSample& y) { return std::abs(x.dP - y.dP); }));
        }
        rep.pairs.push_back(std::move(pr));
    }
    return rep;
}

CompareReport compare_methods(ScenarioConfig c, const RunOptions& opt) {
    if (c.methods.size() < 2) throw ConfigError("methods", "compare needs at least two methods");
    const std::string name = c.name;
    const ScenarioOutput out = run_scenario(std::move(c), opt);
    return compare_results(name, out.results);
}

std::string CompareReport::to_key_value() const {
    std::ostringstream os;
    os << "scenario=" << scenario << '\n';
    for (const auto& p : pairs) {
        const std::string pre = to_string(p.reference) + "_vs_" + to_string(p.other) + ".";
        os << pre << "max_abs_a=" << format_number(p.max_abs_a) << '\n';
        os << pre << "diameter=" << format_number(p.diameter) << '\n';
        for (const auto& d : p.deviations) {
            os << pre << d.observable << ".max=" << format_number(d.max_abs) << '\n';
            os << pre << d.observable << ".rms=" << format_number(d.rms) << '\n';
            for (std::size_t i = 0; i < d.per_interval_max.size(); ++i)
                os << pre << d.observable << ".interval" << i << ".max=" << format_number(d.per_interval_max[i]) << '\n';
        }
    }
    return os.str();
}

std::string CompareReport::summary() const {
    std::ostringstream os;
    os << "scenario " << scenario << '\n';
    for (const auto& p : pairs) {
        os << "  " << to_string(p.other) << " against " << to_string(p.reference) << ":";
        for (const auto& d : p.deviations) os << "  " << d.observable << " max " << format_number(d.max_abs);
        if (const Deviation* a = p.find("a"); a && p.max_abs_a > 0.0)
            os << "  (relative " << format_number(a->max_abs / p.max_abs_a) << ")";
        os << '\n';
    }
    return os.str();
}

}  // namespace delayosc::runner
