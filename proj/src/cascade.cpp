#include "delayosc/cascade.hpp"

#include <cmath>
#include <limits>

#include "delayosc/dde.hpp"
#include "delayosc/errors.hpp"

namespace delayosc::cascade {

std::string to_string(NoiseModel m) {
    return m == NoiseModel::main_text_constant ? "main_text_constant" : "appendix_recursive";
}

NoiseModel noise_model_from_string(const std::string& s) {
    if (s == "main_text_constant") return NoiseModel::main_text_constant;
    if (s == "appendix_recursive") return NoiseModel::appendix_recursive;
    throw InvalidArgument("unknown noise model '" + s + "'");
}

double CascadeParams::feedback() const { return std::sqrt(G * kappa1 * kappa2); }

void CascadeParams::validate() const {
    if (!(kappa1 > 0.0)) throw InvalidArgument("kappa1 must be positive");
    if (!(kappa2 > 0.0) && kappa2 != 0.0) throw InvalidArgument("kappa2 must be >= 0");
    if (!(G >= 1.0)) throw InvalidArgument("gain G must be >= 1");
    if (!(gamma_non >= 0.0)) throw InvalidArgument("gamma_non must be >= 0");
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (!(nbar_input >= 0.0) || !(nbar_amp >= 0.0)) throw InvalidArgument("occupations must be >= 0");
    if (!std::isfinite(phi) || !std::isfinite(omega)) throw InvalidArgument("phi and omega must be finite");
}

double amplified_occupation(const CascadeParams& p, std::size_t i) {
    const double gi = std::pow(p.G, static_cast<double>(i));
    return gi * p.nbar_input + (gi - 1.0) * (p.nbar_amp + 1.0);
}

double nbar_schedule(const CascadeParams& p, std::size_t j, std::size_t m) {
    if (j > m) throw IndexOutOfRange("age index exceeds interval index");
    if (p.noise_model == NoiseModel::main_text_constant) return amplified_occupation(p, 1);
    return amplified_occupation(p, m - j + 1);
}

fock::SuperOperator build_interval_liouvillian(const CascadeParams& p, std::size_t m, const fock::ModeChain& chain) {
    p.validate();
    if (chain.n_modes < m + 1) throw DimensionMismatch("chain has fewer than m+1 modes");
    fock::SuperOperator L(chain);
    for (std::size_t j = 0; j <= m; ++j) {
        const fock::SpMat a = fock::mode_op(chain, j, fock::OpKind::annihilate);
        const fock::SpMat ad = fock::mode_op(chain, j, fock::OpKind::create);
        const double noise = nbar_schedule(p, j, m) * p.kappa1;
        L += fock::dissipator(chain, a, noise + p.kappa1 + p.kappa2);
        L += fock::dissipator(chain, ad, noise);
        if (p.gamma_non > 0.0) L += fock::dissipator(chain, fock::SpMat(a * a), p.gamma_non);
        if (p.omega != 0.0) {
            L += fock::hamiltonian(chain, fock::SpMat(-p.omega * fock::mode_op(chain, j, fock::OpKind::number)));
        }
    }
    for (std::size_t j = 1; j <= m; ++j) L += fock::coupling_term(chain, j, j - 1, p.feedback(), p.phi);
    return L;
}

ChainState initial_chain(const Mat& single_mode_state) {
    if (single_mode_state.rows() != single_mode_state.cols() || single_mode_state.rows() < 2)
        throw DimensionMismatch("single-mode state must be square with at least two levels");
    ChainState s;
    s.rho = fock::DensityMatrix({1, static_cast<std::size_t>(single_mode_state.rows())}, single_mode_state);
    s.m = 0;
    s.labeling = {0};
    return s;
}

std::size_t required_bytes(std::size_t n_trunc, std::size_t m_max) {
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t dim = 1;
    for (std::size_t i = 0; i <= m_max; ++i) {
        if (dim > kMax / n_trunc) return kMax;
        dim *= n_trunc;
    }
    const std::size_t per_entry = 5 * sizeof(cd);
    if (dim > kMax / dim || dim * dim > kMax / per_entry) return kMax;
    return per_entry * dim * dim;
}

ChainState grow_chain(const ChainState& state, const Mat& fresh, std::size_t budget_bytes) {
    const auto& chain = state.rho.chain;
    if (static_cast<std::size_t>(fresh.rows()) != chain.n_trunc || fresh.cols() != fresh.rows())
        throw DimensionMismatch("fresh mode does not match the chain truncation");
    const std::size_t need = required_bytes(chain.n_trunc, chain.n_modes);
    if (need > budget_bytes) throw BudgetExceeded(need, budget_bytes);
    ChainState out;
    out.rho = fock::DensityMatrix({chain.n_modes + 1, chain.n_trunc}, fock::kron(fresh, state.rho.rho));
    out.m = state.m + 1;
    out.labeling = state.labeling;
    out.labeling.push_back(chain.n_modes);
    return out;
}

QuantumRun evolve_delayed(const CascadeParams& p, const Mat& initial, const QuantumOptions& opt) {
    p.validate();
    if (opt.n_trunc < 2) throw InvalidArgument("n_trunc must be >= 2");
    if (static_cast<std::size_t>(initial.rows()) != opt.n_trunc)
        throw DimensionMismatch("initial state does not match n_trunc");
    if (!(opt.dt > 0.0) || opt.dt > p.tau) throw InvalidArgument("need 0 < dt <= tau");
    const std::size_t need = required_bytes(opt.n_trunc, opt.m_max);
    if (need > opt.budget_bytes) throw BudgetExceeded(need, opt.budget_bytes);

    const std::size_t n_steps = dde::steps_per_delay(p.tau, opt.dt);
    const double h = p.tau / static_cast<double>(n_steps);

    QuantumRun run;
    ChainState state = initial_chain(initial);
    run.min_uncertainty_product = std::numeric_limits<double>::infinity();
    const cd tr0 = state.rho.trace();

    auto sample = [&](double t, std::size_t interval) {
        const auto mm = fock::mode_moments(state.rho.rho, state.rho.chain, 0);
        const auto q = fock::quadratures_from_moments(mm);
        run.series.samples.push_back({t, mm.a, mm.n, q.dX, q.dP, interval});
        run.min_uncertainty_product = std::min(run.min_uncertainty_product, q.dX * q.dP);
    };
    sample(0.0, 0);

    fock::Rk4Workspace ws;
    for (std::size_t m = 0; m <= opt.m_max; ++m) {
        if (m > 0) {
            if (opt.on_boundary) opt.on_boundary(state);
            ws = {};
            state = grow_chain(state, initial, opt.budget_bytes);
        }
        const fock::CompiledSuperOperator L(build_interval_liouvillian(p, m, state.rho.chain));
        const bool herm = L.hermiticity_paired() && state.rho.hermiticity_error() < 1e-12;
        if (herm) {
            const Mat adj = state.rho.rho.adjoint();
            state.rho.rho = 0.5 * (state.rho.rho + adj);
        }
        const bool lawson = opt.integrator == fock::Integrator::lawson;
        const fock::LawsonFactors factors = lawson ? fock::LawsonFactors(L, h) : fock::LawsonFactors{};
        for (std::size_t i = 1; i <= n_steps; ++i) {
            if (lawson) {
                fock::lawson_step(L, state.rho.rho, factors, ws, herm);
            } else {
                fock::rk4_step(L, state.rho.rho, h, ws, herm);
            }
            const double t = h * static_cast<double>(m * n_steps + i);
            const cd tr = state.rho.trace();
            if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
                throw NonFiniteValue(t, "density matrix blew up");
            run.max_trace_drift = std::max(run.max_trace_drift, std::abs(tr - tr0));
            sample(t, m);
        }
    }
    if (opt.on_boundary) opt.on_boundary(state);
    run.final_state = std::move(state);
    return run;
}

}  // namespace delayosc::cascade
