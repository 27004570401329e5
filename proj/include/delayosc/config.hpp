#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "delayosc/cascade.hpp"

namespace delayosc::runner {

enum class Method { dde, quantum, moments };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

std::string to_string(fock::Integrator i);
fock::Integrator integrator_from_string(const std::string& s);

/// One scenario. Serialized as a flat JSON object whose keys are the field
/// names below (cascade parameters inlined); absent keys keep their defaults,
/// unknown keys are rejected.
struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<Method> methods{Method::dde};
    cascade::CascadeParams params;
    std::size_t n_trunc = 8;
    std::size_t m_max = 1;
    std::uint32_t k = 1;
    double dt = 1e-2;
    /// 0 means: same as dt.
    double dde_dt = 0.0;
    double alpha0_re = 1.0;
    double alpha0_im = 0.0;
    fock::Integrator integrator = fock::Integrator::rk4;
    /// "zero" or "exponential" (x0 exp(history_rate t) for t < 0). Only the
    /// zero history matches the quantum and moment layers.
    std::string history = "zero";
    double history_rate = 1.0;
    std::string output_dir = "out";
    std::size_t budget_bytes = cascade::kDefaultBudget;

    std::complex<double> alpha0() const { return {alpha0_re, alpha0_im}; }
    bool has(Method m) const;
    double effective_dde_dt() const { return dde_dt > 0.0 ? dde_dt : dt; }
    /// Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

std::string serialize_config(const ScenarioConfig& c);
/// Parses and validates.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
void save_config(const std::string& path, const ScenarioConfig& c);

/// Name of the environment variable that overrides the memory budget.
inline constexpr const char* kBudgetEnv = "DELAYOSC_BUDGET";
/// Budget from the environment if set, else `fallback`. Throws ConfigError on
/// a malformed value.
std::size_t budget_from_env(std::size_t fallback);
std::size_t parse_bytes(const std::string& text, const std::string& field);

}  // namespace delayosc::runner
