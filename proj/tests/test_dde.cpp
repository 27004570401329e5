#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delayosc/dde.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/stability.hpp"
#include "oracles.hpp"

using namespace delayosc;
using namespace delayosc::dde;

namespace {

// Point exactly on C_0 with Im z = 2.526..., tau = 1.
const stability::CurveSample kC0 = stability::c_curve_point(2.526112944919406);

std::vector<double> real_parts(const Trajectory& tr) {
    std::vector<double> v;
    for (const auto& x : tr.values) v.push_back(x.real());
    return v;
}

std::vector<double> moduli(const Trajectory& tr) {
    std::vector<double> v;
    for (const auto& x : tr.values) v.push_back(std::abs(x));
    return v;
}

// Parabola-refined peak heights of v after time t_from.
std::vector<double> peak_heights(const Trajectory& tr, const std::vector<double>& v, double t_from, double t_to) {
    std::vector<double> out;
    for (auto [i, val] : oracle::peaks(v, 0)) {
        if (tr.times[i] < t_from || tr.times[i] > t_to) continue;
        out.push_back(oracle::refine_peak(tr.times[i - 1], tr.times[i], tr.times[i + 1], v[i - 1], v[i], v[i + 1]).second);
    }
    return out;
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *hi;
}

}  // namespace

TEST_CASE("pure decay without delayed term") {
    DdeProblem p;
    p.alpha = -1.0;
    p.horizon = 1.0;
    p.dt = 1e-3;
    const Trajectory tr = integrate_dde(p);
    CHECK(tr.times.front() == 0.0);
    CHECK(std::abs(tr.times.back() - 1.0) < 1e-12);
    CHECK(std::abs(tr.values.back() - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("trajectory grid is strictly increasing and ends at the horizon") {
    DdeProblem p;
    p.beta = -0.5;
    p.tau = 0.7;
    p.dt = 0.03;  // shrunk to tau / 24
    p.horizon = 3.3;
    const Trajectory tr = integrate_dde(p);
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
    CHECK(std::abs(tr.times.back() - p.horizon) <= tr.step());
    CHECK(std::abs(tr.step() - p.tau / 24.0) < 1e-12);
}

TEST_CASE("agrees with a fine forward-Euler oracle") {
    DdeProblem p;
    p.alpha = -0.4;
    p.beta = -1.3;
    p.tau = 1.0;
    p.horizon = 4.0;
    p.dt = 1e-2;
    const Trajectory tr = integrate_dde(p);
    const auto ref = oracle::euler_dde(-0.4, -1.3, 0.0, 1.0, 1.0, 4.0, 200000);
    CHECK(std::abs(tr.values.back() - ref.back()) < 5e-5);
}

TEST_CASE("C_0 parameters sustain the oscillation at late times") {
    DdeProblem p;
    p.alpha = kC0.alpha_prime;
    p.beta = kC0.beta_prime;
    p.horizon = 40.0;
    p.dt = 1e-3;
    const Trajectory tr = integrate_dde(p);
    const auto h = peak_heights(tr, real_parts(tr), 20.0, 40.0);
    REQUIRE(h.size() >= 6);
    CHECK(spread(h) < 1e-3);
}

TEST_CASE("stable point decays, unstable point grows") {
    DdeProblem p;
    p.alpha = -1.0;
    p.beta = -0.5;
    p.horizon = 10.0;
    p.dt = 1e-2;
    CHECK(std::abs(integrate_dde(p).values.back()) < 1e-2);

    p.alpha = 0.0;
    p.beta = -4.0;
    const Trajectory grow = integrate_dde(p);
    CHECK(std::abs(grow.values.back()) > 10.0);
}

TEST_CASE("overflow is reported with the first offending time") {
    DdeProblem p;
    p.alpha = 5.0;
    p.horizon = 10.0;
    p.dt = 1e-2;
    try {
        integrate_dde(p);
        FAIL("expected NonFiniteValue");
    } catch (const NonFiniteValue& e) {
        // e^{5t} passes 1e12 near t = 5.53
        CHECK(e.time() == doctest::Approx(std::log(1e12) / 5.0).epsilon(0.01));
    }
}

TEST_CASE("invalid problems are rejected") {
    DdeProblem p;
    p.tau = 0.0;
    CHECK_THROWS_AS(integrate_dde(p), InvalidArgument);
    p = {};
    p.dt = 2.0;
    CHECK_THROWS_AS(integrate_dde(p), InvalidArgument);
    p = {};
    p.gamma_non = -1.0;
    CHECK_THROWS_AS(integrate_dde(p), InvalidArgument);
    CHECK_THROWS_AS(HistorySpec::exponential(-0.5), InvalidArgument);
}

TEST_CASE("real inputs give real output") {
    DdeProblem p;
    p.alpha = -1.0;
    p.beta = -2.0;
    p.tau = 1.2;
    p.horizon = 6.0;
    p.dt = 1e-2;
    for (const auto& x : integrate_dde(p).values) CHECK(std::abs(x.imag()) < 1e-14);
}

TEST_CASE("linearity in the initial value") {
    DdeProblem p;
    p.alpha = cd(-0.3, 0.2);
    p.beta = cd(-1.1, 0.4);
    p.history = HistorySpec::exponential(0.8);
    p.horizon = 5.0;
    p.dt = 1e-2;
    const Trajectory base = integrate_dde(p);
    for (cd c : {cd(0.5), cd(2.0), cd(0.0, 1.0)}) {
        DdeProblem q = p;
        q.x0 = c * p.x0;
        const Trajectory tr = integrate_dde(q);
        for (std::size_t i = 0; i < tr.size(); ++i)
            CHECK(std::abs(tr.values[i] - c * base.values[i]) <= 1e-9 * std::max(1.0, std::abs(c * base.values[i])));
    }
}

TEST_CASE("superposition of histories") {
    DdeProblem p;
    p.alpha = -0.5;
    p.beta = cd(-1.0, 0.3);
    p.horizon = 4.0;
    p.dt = 1e-2;
    DdeProblem a = p, b = p, ab = p;
    a.history = HistorySpec::constant(0.3);
    a.x0 = 1.0;
    b.history = HistorySpec::constant(cd(0.0, -0.7));
    b.x0 = cd(0.2, 0.5);
    ab.history = a.history + b.history;
    ab.x0 = a.x0 + b.x0;
    const Trajectory ta = integrate_dde(a), tb = integrate_dde(b), tab = integrate_dde(ab);
    for (std::size_t i = 0; i < tab.size(); ++i) CHECK(std::abs(tab.values[i] - ta.values[i] - tb.values[i]) < 1e-12);
}

TEST_CASE("history values") {
    const HistorySpec h = HistorySpec::constant(0.3) + HistorySpec::exponential(1.5);
    CHECK(std::abs(h.value(-1.0, cd(0.0, -0.7)) - (0.3 + cd(0.0, -0.7) * std::exp(-1.5))) < 1e-15);
    CHECK(HistorySpec::zero().is_zero());
    CHECK(HistorySpec::zero().value(-2.0, 5.0) == cd(0.0));
}

TEST_CASE("fourth-order convergence under step halving") {
    DdeProblem p;
    p.alpha = -0.5;
    p.beta = cd(-1.2, 0.5);
    p.history = HistorySpec::exponential(1.0);
    p.horizon = 3.0;
    p.tau = 1.0;
    auto at = [&](double dt) {
        DdeProblem q = p;
        q.dt = dt;
        return integrate_dde(q).values.back();
    };
    const double h0 = 0.1;
    std::vector<cd> x;
    for (int i = 0; i < 5; ++i) x.push_back(at(h0 / std::pow(2.0, i)));
    // successive differences shrink by 2^order
    std::vector<double> orders;
    for (int i = 0; i + 2 < 5; ++i) orders.push_back(std::log2(std::abs(x[i] - x[i + 1]) / std::abs(x[i + 1] - x[i + 2])));
    double mean = 0.0;
    for (double o : orders) mean += o / static_cast<double>(orders.size());
    CHECK(mean >= 3.5);
}

TEST_CASE("nonlinear late-time amplitude forgets the initial value") {
    // just above threshold: the leading rate is ~6e-4, so the cycle takes
    // hundreds of delays to settle
    DdeProblem p;
    p.alpha = -1.0;
    p.beta = -std::sqrt(1.2);
    p.gamma_non = 1.0;
    p.tau = 6.284;
    p.horizon = 1000 * p.tau;
    p.dt = 2e-2;
    std::vector<double> amp;
    for (double x0 : {0.5, 1.0}) {
        p.x0 = x0;
        const Trajectory tr = integrate_dde(p);
        const auto h = peak_heights(tr, moduli(tr), p.horizon - 5 * p.tau, p.horizon);
        REQUIRE(!h.empty());
        amp.push_back(*std::max_element(h.begin(), h.end()));
    }
    CHECK(amp[1] > 0.05);
    CHECK(std::abs(amp[0] - amp[1]) / amp[1] < 1e-3);
}

TEST_CASE("detuning gauge") {
    SUBCASE("omega = 0 is the identity") {
        DdeProblem p;
        p.beta = cd(-1.0, 0.5);
        const DdeProblem q = rescale_detuned(p);
        CHECK(q.beta == p.beta);
        CHECK(q.omega == 0.0);
    }
    SUBCASE("omega tau = 2 pi leaves beta unchanged") {
        DdeProblem p;
        p.beta = -2.0;
        p.tau = 1.2092;
        p.omega = 2.0 * std::numbers::pi / p.tau;
        CHECK(std::abs(rescale_detuned(p).beta - p.beta) < 1e-12);
    }
    SUBCASE("omega tau = pi flips the sign") {
        DdeProblem p;
        p.beta = 1.0;
        p.omega = std::numbers::pi;
        CHECK(std::abs(rescale_detuned(p).beta + 1.0) < 1e-12);
    }
    SUBCASE("round trip reproduces the detuned trajectory") {
        DdeProblem p;
        p.alpha = -1.0;
        p.beta = -1.7;
        p.tau = 1.3;
        p.omega = 2.1;
        p.history = HistorySpec::exponential(0.9);
        p.x0 = cd(0.6, 0.2);
        p.horizon = 6.0;
        p.dt = 1e-3;
        const Trajectory direct = integrate_dde(p);
        const Trajectory back = undo_detuning(integrate_dde(rescale_detuned(p)), p.omega);
        REQUIRE(direct.size() == back.size());
        for (std::size_t i = 0; i < direct.size(); ++i) CHECK(std::abs(direct.values[i] - back.values[i]) < 1e-8);
    }
}

TEST_CASE("closed phase-plane cycle with omega tau = 2 pi") {
    DdeProblem p;
    p.alpha = -1.2092;
    p.beta = -2.4184;
    p.tau = 1.0;
    p.omega = 2.0 * std::numbers::pi;
    p.x0 = cd(1.0, 0.5);
    p.dt = 1e-3;
    // on C_0 with theta = 2 pi / 3 the motion repeats every 3 tau
    const double period = 2.0 * std::numbers::pi / std::sqrt(2.4184 * 2.4184 - 1.2092 * 1.2092);
    CHECK(period == doctest::Approx(3.0).epsilon(1e-4));
    p.horizon = 60.0;
    const Trajectory tr = integrate_dde(p);
    const std::size_t per = static_cast<std::size_t>(std::lround(period / tr.step()));
    double diameter = 0.0;
    for (std::size_t i = tr.size() - per; i < tr.size(); i += 10)
        for (std::size_t j = i; j < tr.size(); j += 10) diameter = std::max(diameter, std::abs(tr.values[i] - tr.values[j]));
    std::vector<double> returns;
    for (std::size_t i = per; i < tr.size(); i += per) returns.push_back(std::abs(tr.values[i] - tr.values[i - per]));
    // shrinking until the integrator's own error floor
    for (std::size_t i = 1; i < returns.size(); ++i) CHECK((returns[i] < returns[i - 1] || returns[i] < 1e-5 * diameter));
    CHECK(returns.back() < 1e-3 * diameter);
}

TEST_CASE("trajectory CSV layout") {
    DdeProblem p;
    p.horizon = 0.002;
    p.dt = 0.001;
    std::ostringstream os;
    write_csv(os, integrate_dde(p));
    CHECK(os.str().rfind("t,re_x,im_x\n0,1,0\n0.001,", 0) == 0);
}
