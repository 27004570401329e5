#include "delayosc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "delayosc/errors.hpp"

namespace delayosc::runner {

using nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::dde: return "dde";
        case Method::quantum: return "quantum";
        case Method::moments: return "moments";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "dde") return Method::dde;
    if (s == "quantum") return Method::quantum;
    if (s == "moments") return Method::moments;
    throw ConfigError("methods", "unknown method '" + s + "' (expected dde, quantum or moments)");
}

std::string to_string(fock::Integrator i) { return i == fock::Integrator::rk4 ? "rk4" : "lawson"; }

fock::Integrator integrator_from_string(const std::string& s) {
    if (s == "rk4") return fock::Integrator::rk4;
    if (s == "lawson") return fock::Integrator::lawson;
    throw ConfigError("integrator", "expected rk4 or lawson, got '" + s + "'");
}

bool ScenarioConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

namespace {

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void ScenarioConfig::validate() const {
    require(!name.empty(), "name", "must not be empty");
    require(name.find_first_of("/\\") == std::string::npos, "name", "must not contain path separators");
    require(!methods.empty(), "methods", "select at least one of dde, quantum, moments");
    require(std::set<Method>(methods.begin(), methods.end()).size() == methods.size(), "methods", "duplicate entry");

    const auto& p = params;
    require(p.kappa1 > 0.0 && finite(p.kappa1), "kappa1", "must be positive");
    require(p.kappa2 >= 0.0 && finite(p.kappa2), "kappa2", "must be >= 0");
    require(p.G >= 1.0 && finite(p.G), "G", "gain must be >= 1");
    require(finite(p.phi), "phi", "must be finite");
    require(finite(p.omega), "omega", "must be finite");
    require(p.gamma_non >= 0.0 && finite(p.gamma_non), "gamma_non", "must be >= 0");
    require(p.tau > 0.0 && finite(p.tau), "tau", "must be positive");
    require(p.nbar_input >= 0.0 && finite(p.nbar_input), "nbar_input", "must be >= 0");
    require(p.nbar_amp >= 0.0 && finite(p.nbar_amp), "nbar_amp", "must be >= 0");

    require(n_trunc >= 2, "n_trunc", "must be >= 2");
    require(k >= 1 && k <= 6, "k", "moment order must lie in 1..6");
    require(dt > 0.0 && dt <= p.tau, "dt", "need 0 < dt <= tau");
    require(dde_dt == 0.0 || (dde_dt > 0.0 && dde_dt <= p.tau), "dde_dt", "need 0 (same as dt) or 0 < dde_dt <= tau");
    require(finite(alpha0_re), "alpha0_re", "must be finite");
    require(finite(alpha0_im), "alpha0_im", "must be finite");
    if (has(Method::quantum)) {
        // A coherent state needs room: mean occupancy well below the cutoff.
        require(std::norm(alpha0()) < 0.5 * static_cast<double>(n_trunc), "alpha0_re",
                "|alpha0|^2 must stay below n_trunc/2 for the truncated coherent state");
    }
    require(history == "zero" || history == "exponential", "history", "expected zero or exponential");
    if (history == "exponential") {
        require(history_rate > 0.0 && finite(history_rate), "history_rate", "must be positive");
        require(methods.size() == 1 && methods[0] == Method::dde, "history",
                "a non-zero history only applies to dde-only scenarios");
    }
    require(!output_dir.empty(), "output_dir", "must not be empty");
    require(budget_bytes > 0, "budget_bytes", "must be positive");
}

std::string serialize_config(const ScenarioConfig& c) {
    json j = json::object();
    j["name"] = c.name;
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["kappa1"] = c.params.kappa1;
    j["kappa2"] = c.params.kappa2;
    j["G"] = c.params.G;
    j["phi"] = c.params.phi;
    j["omega"] = c.params.omega;
    j["gamma_non"] = c.params.gamma_non;
    j["tau"] = c.params.tau;
    j["nbar_input"] = c.params.nbar_input;
    j["nbar_amp"] = c.params.nbar_amp;
    j["noise_model"] = cascade::to_string(c.params.noise_model);
    j["n_trunc"] = c.n_trunc;
    j["m_max"] = c.m_max;
    j["k"] = c.k;
    j["dt"] = c.dt;
    j["dde_dt"] = c.dde_dt;
    j["alpha0_re"] = c.alpha0_re;
    j["alpha0_im"] = c.alpha0_im;
    j["integrator"] = to_string(c.integrator);
    j["history"] = c.history;
    j["history_rate"] = c.history_rate;
    j["output_dir"] = c.output_dir;
    j["budget_bytes"] = c.budget_bytes;
    return j.dump(2) + "\n";
}

namespace {

template <class T>
T get(const json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(field, "wrong type: " + j.dump());
    }
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number, got " + j.dump());
    return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError(field, "expected a non-negative integer, got " + j.dump());
    return j.get<std::size_t>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("<file>", "top level must be an object");

    ScenarioConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "name") c.name = get<std::string>(v, key);
        else if (key == "methods") {
            if (!v.is_array()) throw ConfigError(key, "expected an array of method names");
            c.methods.clear();
            for (const auto& m : v) c.methods.push_back(method_from_string(get<std::string>(m, key)));
        }
        else if (key == "kappa1") c.params.kappa1 = get_number(v, key);
        else if (key == "kappa2") c.params.kappa2 = get_number(v, key);
        else if (key == "G") c.params.G = get_number(v, key);
        else if (key == "phi") c.params.phi = get_number(v, key);
        else if (key == "omega") c.params.omega = get_number(v, key);
        else if (key == "gamma_non") c.params.gamma_non = get_number(v, key);
        else if (key == "tau") c.params.tau = get_number(v, key);
        else if (key == "nbar_input") c.params.nbar_input = get_number(v, key);
        else if (key == "nbar_amp") c.params.nbar_amp = get_number(v, key);
        else if (key == "noise_model") {
            try {
                c.params.noise_model = cascade::noise_model_from_string(get<std::string>(v, key));
            } catch (const InvalidArgument& e) {
                throw ConfigError(key, e.what());
            }
        }
        else if (key == "n_trunc") c.n_trunc = get_count(v, key);
        else if (key == "m_max") c.m_max = get_count(v, key);
        else if (key == "k") c.k = static_cast<std::uint32_t>(get_count(v, key));
        else if (key == "dt") c.dt = get_number(v, key);
        else if (key == "dde_dt") c.dde_dt = get_number(v, key);
        else if (key == "alpha0_re") c.alpha0_re = get_number(v, key);
        else if (key == "alpha0_im") c.alpha0_im = get_number(v, key);
        else if (key == "integrator") c.integrator = integrator_from_string(get<std::string>(v, key));
        else if (key == "history") c.history = get<std::string>(v, key);
        else if (key == "history_rate") c.history_rate = get_number(v, key);
        else if (key == "output_dir") c.output_dir = get<std::string>(v, key);
        else if (key == "budget_bytes") c.budget_bytes = get_count(v, key);
        else throw ConfigError(key, "unknown field");
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config(const std::string& path, const ScenarioConfig& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("<file>", "cannot write " + path);
    out << serialize_config(c);
}

std::size_t parse_bytes(const std::string& text, const std::string& field) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a byte count, got '" + text + "'");
    }
    std::string suffix = text.substr(pos);
    unsigned long long mult = 1;
    if (suffix == "K" || suffix == "KiB") mult = 1ULL << 10;
    else if (suffix == "M" || suffix == "MiB") mult = 1ULL << 20;
    else if (suffix == "G" || suffix == "GiB") mult = 1ULL << 30;
    else if (!suffix.empty()) throw ConfigError(field, "unknown size suffix '" + suffix + "'");
    if (v == 0) throw ConfigError(field, "must be positive");
    return static_cast<std::size_t>(v * mult);
}

std::size_t budget_from_env(std::size_t fallback) {
    const char* env = std::getenv(kBudgetEnv);
    if (env == nullptr || *env == '\0') return fallback;
    return parse_bytes(env, kBudgetEnv);
}

}  // namespace delayosc::runner
