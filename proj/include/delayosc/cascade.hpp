#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "delayosc/fock.hpp"
#include "delayosc/superoperator.hpp"
#include "delayosc/timeseries.hpp"

namespace delayosc::cascade {

using fock::cd;
using fock::Mat;

enum class NoiseModel { main_text_constant, appendix_recursive };

std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

struct CascadeParams {
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    double G = 1.0;
    double phi = 0.0;
    double omega = 0.0;
    double gamma_non = 0.0;
    double tau = 1.0;
    double nbar_input = 0.0;
    double nbar_amp = 0.0;
    NoiseModel noise_model = NoiseModel::main_text_constant;

    double kappa() const { return 0.5 * (kappa1 + kappa2); }
    /// sqrt(G kappa1 kappa2)
    double feedback() const;
    void validate() const;

    bool operator==(const CascadeParams&) const = default;
};

/// Occupation after i passes through the amplifier:
/// G^i nbar + (G^i - 1)(nbar_amp + 1).
double amplified_occupation(const CascadeParams& p, std::size_t i);

/// Noise occupation seen by the copy of age j during interval m. The
/// recursive model counts m - j + 1 amplifier passes.
double nbar_schedule(const CascadeParams& p, std::size_t j, std::size_t m);

/// Generator for interval m acting on slots 0..m of `chain` (slot = age).
/// Extra slots beyond m are left untouched, which is what a statically
/// allocated chain needs before those copies switch on.
fock::SuperOperator build_interval_liouvillian(const CascadeParams& p, std::size_t m, const fock::ModeChain& chain);

struct ChainState {
    fock::DensityMatrix rho;
    std::size_t m = 0;
    /// age -> tensor slot; the growth scheme keeps it the identity.
    std::vector<std::size_t> labeling;
};

ChainState initial_chain(const Mat& single_mode_state);

inline constexpr std::size_t kDefaultBudget = std::size_t{4} << 30;

/// Appends `fresh` as the new oldest copy on a new top slot. Throws
/// BudgetExceeded when the grown chain's RK4 storage would not fit.
ChainState grow_chain(const ChainState& state, const Mat& fresh, std::size_t budget_bytes = kDefaultBudget);

/// Bytes the full run needs, saturating instead of overflowing.
std::size_t required_bytes(std::size_t n_trunc, std::size_t m_max);

struct QuantumOptions {
    std::size_t m_max = 0;
    std::size_t n_trunc = 8;
    double dt = 1e-2;
    fock::Integrator integrator = fock::Integrator::rk4;
    std::size_t budget_bytes = kDefaultBudget;
    /// Called with the state at every interval boundary (before growth) and at the end.
    std::function<void(const ChainState&)> on_boundary;
};

struct QuantumRun {
    TimeSeries series;
    ChainState final_state;
    double max_trace_drift = 0.0;
    double min_uncertainty_product = 0.0;
};

/// Piecewise evolution over [0, (m_max+1) tau] on a chain that grows by one
/// copy of `initial` at every boundary. Throws BudgetExceeded before any
/// allocation and NonFiniteValue on blow-up.
QuantumRun evolve_delayed(const CascadeParams& p, const Mat& initial, const QuantumOptions& opt);

}  // namespace delayosc::cascade
