#include <cmath>
#include <deque>

#include "delayosc/dde.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/moments.hpp"

namespace delayosc::moments {

namespace {

OpPoly single(const OperatorWord& w, cd c = 1.0) { return OpPoly{{w, c}}; }

const OpPoly kOne = single(OperatorWord{});

void add_dissipator(std::vector<SymbolicTerm>& gen, const OpPoly& c, double rate) {
    if (rate == 0.0) return;
    const OpPoly cdc = multiply(dagger(c), c);
    gen.push_back({rate, c, c});
    gen.push_back({-0.5 * rate, cdc, kOne});
    gen.push_back({-0.5 * rate, kOne, cdc});
}

}  // namespace

std::vector<SymbolicTerm> symbolic_generator(const cascade::CascadeParams& p, std::size_t m) {
    p.validate();
    std::vector<SymbolicTerm> gen;
    for (std::size_t j = 0; j <= m; ++j) {
        const auto mode = static_cast<std::uint32_t>(j);
        const OpPoly a = single(OperatorWord::annihilate(mode));
        const OpPoly ad = single(OperatorWord::create(mode));
        const double noise = cascade::nbar_schedule(p, j, m) * p.kappa1;
        add_dissipator(gen, a, noise + p.kappa1 + p.kappa2);
        add_dissipator(gen, ad, noise);
        if (p.gamma_non > 0.0) add_dissipator(gen, single(OperatorWord({{mode, 0, 2}})), p.gamma_non);
        if (p.omega != 0.0) {
            const OpPoly H = single(OperatorWord({{mode, 1, 1}}), -p.omega);
            gen.push_back({cd(0.0, -1.0), H, kOne});
            gen.push_back({cd(0.0, 1.0), kOne, H});
        }
    }
    const cd e = std::polar(p.feedback(), p.phi);
    for (std::size_t j = 1; j <= m; ++j) {
        const auto from = static_cast<std::uint32_t>(j);
        const auto to = static_cast<std::uint32_t>(j - 1);
        const OpPoly a_from = single(OperatorWord::annihilate(from));
        const OpPoly a_to = single(OperatorWord::annihilate(to));
        const OpPoly x = single(OperatorWord({{to, 1, 0}, {from, 0, 1}}));
        gen.push_back({-e, x, kOne});
        gen.push_back({e, a_from, a_to});
        gen.push_back({-std::conj(e), kOne, x});
        gen.push_back({std::conj(e), a_to, a_from});
    }
    return gen;
}

OpPoly adjoint_action(const std::vector<SymbolicTerm>& generator, const OperatorWord& word) {
    OpPoly out;
    const OpPoly o = single(word);
    for (const auto& t : generator) {
        for (const auto& [w, c] : multiply(multiply(dagger(t.B), o), t.A)) {
            auto [it, inserted] = out.try_emplace(w, t.coef * c);
            if (!inserted) {
                it->second += t.coef * c;
                if (std::abs(it->second) < 1e-13) out.erase(it);
            }
        }
    }
    return out;
}

MomentPolynomial adjoint_derivative(const cascade::CascadeParams& p, std::size_t m, const OperatorWord& word) {
    return MomentPolynomial::linear(adjoint_action(symbolic_generator(p, m), word));
}

Representative representative(const OperatorWord& w) {
    const OperatorWord d = w.dagger();
    if (d == w) return {w, false};
    const int iw = w.imbalance(), id = d.imbalance();
    if (iw != id) return iw < id ? Representative{w, false} : Representative{d, true};
    // Balanced: the lowest mode where the two differ decides, more daggers wins.
    for (const auto& mp : w.powers()) {
        if (mp.p != mp.q) return mp.p > mp.q ? Representative{w, false} : Representative{d, true};
    }
    return {w, false};
}

std::size_t MomentSystem::monomial_count() const { return terms_.size(); }

bool MomentSystem::tracks(const OperatorWord& w) const { return index_of(w) != npos; }

std::size_t MomentSystem::index_of(const OperatorWord& w) const {
    const auto r = representative(w);
    const auto it = index_.find(r.word);
    return it == index_.end() ? npos : it->second;
}

cd MomentSystem::value(const OperatorWord& w, const std::vector<cd>& state) const {
    if (w.is_identity()) return 1.0;
    const auto r = representative(w);
    const auto it = index_.find(r.word);
    if (it == index_.end()) throw IndexOutOfRange("moment <" + w.to_string() + "> is not tracked");
    return r.conjugated ? std::conj(state[it->second]) : state[it->second];
}

void MomentSystem::compile() {
    row_begin_.assign(1, 0);
    terms_.clear();
    factors_.clear();
    for (const auto& poly : rhs_) {
        for (const auto& [mono, c] : poly.terms()) {
            Term t{c, static_cast<std::uint32_t>(factors_.size()), 0};
            for (const auto& w : mono) {
                const auto r = representative(w);
                const auto it = index_.find(r.word);
                if (it == index_.end()) throw ClosureDiverged("right-hand side uses untracked <" + w.to_string() + ">");
                factors_.push_back({static_cast<std::uint32_t>(it->second), r.conjugated});
            }
            t.end = static_cast<std::uint32_t>(factors_.size());
            terms_.push_back(t);
        }
        row_begin_.push_back(static_cast<std::uint32_t>(terms_.size()));
    }
}

void MomentSystem::derivative(const std::vector<cd>& state, std::vector<cd>& out) const {
    out.assign(keys_.size(), 0.0);
    for (std::size_t row = 0; row < keys_.size(); ++row) {
        cd sum{0.0};
        for (std::uint32_t ti = row_begin_[row]; ti < row_begin_[row + 1]; ++ti) {
            const Term& t = terms_[ti];
            cd prod = t.coef;
            for (std::uint32_t f = t.begin; f < t.end; ++f) {
                const cd v = state[factors_[f].index];
                prod *= factors_[f].conj ? std::conj(v) : v;
            }
            sum += prod;
        }
        out[row] = sum;
    }
}

std::string MomentSystem::listing() const {
    std::string s;
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        s += "d<" + keys_[i].to_string() + ">/dt = " + rhs_[i].to_string() + "\n";
    }
    return s;
}

MomentSystem generate_moment_system(const cascade::CascadeParams& p, std::size_t m, std::uint32_t k,
                                    std::size_t word_budget) {
    if (k < 1) throw InvalidArgument("truncation order k must be >= 1");
    const auto gen = symbolic_generator(p, m);
    CumulantExpander expander(k);

    MomentSystem sys;
    sys.m_ = m;
    sys.k_ = k;
    std::deque<OperatorWord> queue;
    for (std::size_t j = 0; j <= m; ++j) queue.push_back(OperatorWord::annihilate(static_cast<std::uint32_t>(j)));
    if (k >= 2) {
        queue.push_back(OperatorWord({{0, 1, 1}}));
        queue.push_back(OperatorWord({{0, 0, 2}}));
    }

    while (!queue.empty()) {
        const OperatorWord w = representative(queue.front()).word;
        queue.pop_front();
        if (w.is_identity() || sys.index_.count(w)) continue;
        if (sys.keys_.size() >= word_budget)
            throw ClosureDiverged("moment closure exceeded " + std::to_string(word_budget) + " tracked words");
        sys.index_.emplace(w, sys.keys_.size());
        sys.keys_.push_back(w);

        const MomentPolynomial raw = MomentPolynomial::linear(adjoint_action(gen, w));
        MomentPolynomial closed = raw.substitute([&](const OperatorWord& x) {
            return x.order() > k ? expander.expand(x) : MomentPolynomial::of(x);
        });
        for (const auto& [mono, c] : closed.terms())
            for (const auto& x : mono)
                if (!sys.index_.count(representative(x).word)) queue.push_back(x);
        sys.rhs_.push_back(std::move(closed));
    }
    sys.compile();
    return sys;
}

SingleModeMoments coherent_moments(cd alpha) {
    return [alpha](std::uint32_t p, std::uint32_t q) {
        return std::pow(std::conj(alpha), static_cast<double>(p)) * std::pow(alpha, static_cast<double>(q));
    };
}

SingleModeMoments state_moments(const fock::Mat& rho) {
    const Eigen::Index n = rho.rows();
    const fock::Mat a = fock::Mat(fock::ladder(static_cast<std::size_t>(n)));
    return [rho, a](std::uint32_t p, std::uint32_t q) {
        fock::Mat op = fock::Mat::Identity(rho.rows(), rho.cols());
        for (std::uint32_t i = 0; i < p; ++i) op = op * a.adjoint();
        for (std::uint32_t i = 0; i < q; ++i) op = op * a;
        return cd((op * rho).trace());
    };
}

MomentRun integrate_moment_system(const cascade::CascadeParams& p, const SingleModeMoments& initial,
                                  const MomentOptions& opt) {
    p.validate();
    if (!(opt.dt > 0.0) || opt.dt > p.tau) throw InvalidArgument("need 0 < dt <= tau");
    const std::size_t n_steps = dde::steps_per_delay(p.tau, opt.dt);
    const double h = p.tau / static_cast<double>(n_steps);

    const OperatorWord a0 = OperatorWord::annihilate(0);
    const OperatorWord n0({{0, 1, 1}});
    const OperatorWord aa0({{0, 0, 2}});

    MomentRun run;
    std::vector<cd> state;
    MomentSystem prev;
    bool have_prev = false;

    for (std::size_t m = 0; m <= opt.m_max; ++m) {
        MomentSystem sys = generate_moment_system(p, m, opt.k, opt.word_budget);
        run.equation_counts.push_back(sys.size());
        CumulantExpander expander(opt.k);

        std::vector<cd> next(sys.size());
        const auto fresh = static_cast<std::uint32_t>(m);
        std::function<cd(const OperatorWord&)> carried = [&](const OperatorWord& w) -> cd {
            if (w.is_identity()) return 1.0;
            if (!have_prev || w.involves(fresh)) {
                const auto [on, off] = w.split_mode(fresh);
                cd v = 1.0;
                if (!on.is_identity()) v = initial(on.powers()[0].p, on.powers()[0].q);
                return off.is_identity() ? v : v * carried(off);
            }
            if (prev.tracks(w)) return prev.value(w, state);
            const std::uint32_t order = w.order();
            if (order < 2) throw IndexOutOfRange("no value for <" + w.to_string() + "> at interval boundary");
            // Untracked before: treat its top cumulant as zero.
            return cumulant_expand(w, std::min(opt.k, order - 1)).evaluate(carried);
        };
        for (std::size_t i = 0; i < sys.size(); ++i) next[i] = carried(sys.keys()[i]);
        state = std::move(next);

        auto observe = [&](const OperatorWord& w) {
            if (sys.tracks(w)) return sys.value(w, state);
            return expander.expand(w).evaluate([&](const OperatorWord& x) { return sys.value(x, state); });
        };
        auto sample = [&](double t) {
            fock::ModeMoments mm{observe(a0), observe(aa0), observe(n0).real()};
            const auto q = fock::quadratures_from_moments(mm);
            run.series.samples.push_back({t, mm.a, mm.n, q.dX, q.dP, m});
        };
        if (m == 0) sample(0.0);

        std::vector<cd> k1, k2, k3, k4, tmp(state.size());
        for (std::size_t i = 1; i <= n_steps; ++i) {
            sys.derivative(state, k1);
            for (std::size_t j = 0; j < state.size(); ++j) tmp[j] = state[j] + 0.5 * h * k1[j];
            sys.derivative(tmp, k2);
            for (std::size_t j = 0; j < state.size(); ++j) tmp[j] = state[j] + 0.5 * h * k2[j];
            sys.derivative(tmp, k3);
            for (std::size_t j = 0; j < state.size(); ++j) tmp[j] = state[j] + h * k3[j];
            sys.derivative(tmp, k4);
            const double t = h * static_cast<double>(m * n_steps + i);
            for (std::size_t j = 0; j < state.size(); ++j) {
                state[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                if (!std::isfinite(state[j].real()) || !std::isfinite(state[j].imag()) ||
                    std::abs(state[j]) > dde::kOverflowThreshold)
                    throw NonFiniteValue(t, "moment <" + sys.keys()[j].to_string() + "> diverged");
            }
            sample(t);
        }
        prev = std::move(sys);
        have_prev = true;
    }
    run.last_system = prev;
    run.final_state = state;
    return run;
}

}  // namespace delayosc::moments
