#include <cmath>
#include <numbers>

#include "delayosc/errors.hpp"
#include "delayosc/runner.hpp"
#include "delayosc/stability.hpp"

namespace delayosc::runner {

namespace {

// Linear cascade with kappa1 = kappa2 = 1 sitting exactly at its critical delay.
ScenarioConfig linear(const std::string& name, double G) {
    ScenarioConfig c;
    c.name = name;
    c.methods = {Method::dde, Method::quantum, Method::moments};
    c.params.G = G;
    c.params.tau = stability::critical_delay(-1.0, -std::sqrt(G)).tau_cr;
    c.n_trunc = 12;
    c.m_max = 2;
    c.k = 1;
    c.dt = 0.01;
    c.output_dir = "out/" + name;
    return c;
}

std::vector<Preset> build() {
    std::vector<Preset> out;
    out.push_back({"linear-g1.1", "linear gain 1.1 at the critical delay; dde, quantum and k=1 moments",
                   linear("linear-g1.1", 1.1)});
    out.push_back({"linear-g1.5", "linear gain 1.5 at the critical delay; dde, quantum and k=1 moments",
                   linear("linear-g1.5", 1.5)});
    {
        ScenarioConfig c;
        c.name = "closed-cycle-g4";
        c.methods = {Method::dde, Method::quantum};
        c.params.G = 4.0;
        c.params.tau = 1.2092;
        c.params.omega = 2.0 * std::numbers::pi / 1.2092;
        c.n_trunc = 24;
        c.m_max = 1;
        c.dt = 0.002;
        c.output_dir = "out/closed-cycle-g4";
        out.push_back({c.name, "gain 4, omega tau = 2 pi, kappa tau = 1.2092: closed phase-plane cycle", c});
    }
    {
        ScenarioConfig c;
        c.name = "nonlinear-g1.2";
        c.methods = {Method::quantum, Method::moments, Method::dde};
        c.params.G = 1.2;
        c.params.gamma_non = 1.0;
        c.params.tau = 6.284;
        c.n_trunc = 8;
        c.m_max = 3;
        c.k = 3;
        c.dt = 0.05;
        c.integrator = fock::Integrator::lawson;
        c.output_dir = "out/nonlinear-g1.2";
        out.push_back({c.name, "gain 1.2 with two-photon absorption gamma = kappa, kappa tau = 6.284", c});
    }
    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build();
    return all;
}

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw InvalidArgument("unknown preset '" + name + "'");
}

}  // namespace delayosc::runner
