#include "delayosc/superoperator.hpp"

#include <algorithm>
#include <cmath>

#include "delayosc/errors.hpp"

namespace delayosc::fock {

namespace {

bool same_dims(const SpMat& a, const SpMat& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

bool sparse_equal(const SpMat& a, const SpMat& b) {
    if (!same_dims(a, b)) return false;
    const SpMat diff = a - b;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it)
            if (it.value() != cd(0.0)) return false;
    return true;
}

// A has at most one entry per row, all on the diagonal col = row + off, all real.
bool as_shift(const SpMat& A, std::size_t d, std::ptrdiff_t& off, std::vector<double>& f) {
    f.assign(d, 0.0);
    off = 0;
    bool have = false;
    for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            const cd v = it.value();
            if (v == cd(0.0)) continue;
            if (v.imag() != 0.0) return false;
            const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(it.col()) - static_cast<std::ptrdiff_t>(it.row());
            if (!have) {
                off = o;
                have = true;
            } else if (o != off) {
                return false;
            }
            f[static_cast<std::size_t>(it.row())] = v.real();
        }
    }
    return true;
}

bool is_identity(std::ptrdiff_t off, const std::vector<double>& f) {
    return off == 0 && std::all_of(f.begin(), f.end(), [](double x) { return x == 1.0; });
}

bool close(cd a, cd b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); }

constexpr Eigen::Index kBlock = 64;

void mirror_lower(Mat& m) {
    const Eigen::Index d = m.rows();
    for (Eigen::Index cb = 0; cb < d; cb += kBlock) {
        const Eigen::Index ce = std::min(d, cb + kBlock);
        for (Eigen::Index rb = cb; rb < d; rb += kBlock) {
            const Eigen::Index re = std::min(d, rb + kBlock);
            for (Eigen::Index c = cb; c < ce; ++c)
                for (Eigen::Index r = std::max(rb, c + 1); r < re; ++r) m(c, r) = std::conj(m(r, c));
        }
    }
}

}  // namespace

SuperOperator::SuperOperator(ModeChain chain) : chain_(chain) {}

void SuperOperator::add_term(cd coef, SpMat A, SpMat B) {
    const auto d = static_cast<Eigen::Index>(chain_.dim());
    if (A.rows() != d || A.cols() != d || B.rows() != d || B.cols() != d)
        throw DimensionMismatch("superoperator term does not match chain dimension");
    if (coef == cd(0.0)) return;
    A.prune(cd(0.0));
    B.prune(cd(0.0));
    terms_.push_back({coef, std::move(A), std::move(B)});
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other) {
    if (!(other.chain_ == chain_)) throw DimensionMismatch("superoperators live on different chains");
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    return *this;
}

SuperOperator SuperOperator::operator+(const SuperOperator& other) const {
    SuperOperator s = *this;
    s += other;
    return s;
}

SuperOperator SuperOperator::scaled(cd factor) const {
    SuperOperator s(chain_);
    if (factor == cd(0.0)) return s;
    s.terms_ = terms_;
    for (auto& t : s.terms_) t.coef *= factor;
    return s;
}

Mat SuperOperator::apply(const Mat& rho) const {
    const auto d = static_cast<Eigen::Index>(chain_.dim());
    if (rho.rows() != d || rho.cols() != d) throw DimensionMismatch("rho does not match superoperator chain");
    Mat out = Mat::Zero(d, d);
    for (const auto& t : terms_) {
        const Mat left = t.A * rho;
        out += t.coef * (left * t.B.adjoint());
    }
    return out;
}

SpMat SuperOperator::to_sparse() const {
    const auto d = static_cast<Eigen::Index>(chain_.dim());
    std::vector<Eigen::Triplet<cd>> trip;
    for (const auto& t : terms_) {
        const SpMat Bc = t.B.conjugate();
        for (Eigen::Index kb = 0; kb < Bc.outerSize(); ++kb)
            for (SpMat::InnerIterator ib(Bc, kb); ib; ++ib)
                for (Eigen::Index ka = 0; ka < t.A.outerSize(); ++ka)
                    for (SpMat::InnerIterator ia(t.A, ka); ia; ++ia)
                        trip.emplace_back(static_cast<int>(ib.row() * d + ia.row()),
                                          static_cast<int>(ib.col() * d + ia.col()),
                                          t.coef * ib.value() * ia.value());
    }
    SpMat out(d * d, d * d);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

SuperOperator dissipator(const ModeChain& chain, const SpMat& c, double rate) {
    if (rate < 0) throw InvalidArgument("dissipator rate must be >= 0");
    SuperOperator L(chain);
    if (rate == 0.0) return L;
    const SpMat id = identity(chain.dim());
    const SpMat cdc = SpMat(c.adjoint()) * c;
    L.add_term(rate, c, c);
    L.add_term(-0.5 * rate, cdc, id);
    L.add_term(-0.5 * rate, id, cdc);
    return L;
}

SuperOperator hamiltonian(const ModeChain& chain, const SpMat& H) {
    SuperOperator L(chain);
    const SpMat id = identity(chain.dim());
    L.add_term(cd(0.0, -1.0), H, id);
    L.add_term(cd(0.0, 1.0), id, H);
    return L;
}

SuperOperator coupling_term(const ModeChain& chain, std::size_t j_from, std::size_t j_to, double strength, double phi) {
    if (j_from >= chain.n_modes || j_to >= chain.n_modes) throw IndexOutOfRange("coupling slot out of range");
    if (j_from == j_to) throw InvalidArgument("coupling needs two distinct slots");
    SuperOperator L(chain);
    if (strength == 0.0) return L;
    const SpMat id = identity(chain.dim());
    const SpMat a_from = mode_op(chain, j_from, OpKind::annihilate);
    const SpMat a_to = mode_op(chain, j_to, OpKind::annihilate);
    const SpMat x = SpMat(a_to.adjoint()) * a_from;
    const cd e = std::polar(strength, phi);
    // e [a_to^dag, a_from rho] = e (x rho - a_from rho a_to^dag)
    L.add_term(-e, x, id);
    L.add_term(e, a_from, a_to);
    // conj(e) [rho a_from^dag, a_to] = conj(e) (rho x^dag - a_to rho a_from^dag)
    L.add_term(-std::conj(e), id, x);
    L.add_term(std::conj(e), a_to, a_from);
    return L;
}

CompiledSuperOperator::CompiledSuperOperator(const SuperOperator& op)
    : chain_(op.chain()), dim_(op.chain().dim()), dl_(dim_, 0.0), dr_(dim_, 0.0) {
    std::ptrdiff_t oa = 0, ob = 0;
    std::vector<double> fa, fb;
    for (const auto& t : op.terms()) {
        if (!as_shift(t.A, dim_, oa, fa) || !as_shift(t.B, dim_, ob, fb)) {
            generic_.push_back(t);
            continue;
        }
        if (oa == 0 && ob == 0 && is_identity(ob, fb)) {
            for (std::size_t r = 0; r < dim_; ++r) dl_[r] += t.coef * fa[r];
            continue;
        }
        if (oa == 0 && ob == 0 && is_identity(oa, fa)) {
            for (std::size_t c = 0; c < dim_; ++c) dr_[c] += t.coef * fb[c];
            continue;
        }
        auto same = std::find_if(shifts_.begin(), shifts_.end(), [&](const Shift& s) {
            return s.oa == oa && s.ob == ob && s.fa == fa && s.fb == fb;
        });
        if (same != shifts_.end()) {
            same->coef += t.coef;
        } else {
            shifts_.push_back({t.coef, oa, ob, fa, fb});
        }
    }

    paired_ = true;
    for (std::size_t i = 0; i < dim_ && paired_; ++i) paired_ = close(dr_[i], std::conj(dl_[i]));
    for (const auto& s : shifts_) {
        if (!paired_) break;
        paired_ = std::any_of(shifts_.begin(), shifts_.end(), [&](const Shift& p) {
            return p.oa == s.ob && p.ob == s.oa && p.fa == s.fb && p.fb == s.fa && close(p.coef, std::conj(s.coef));
        });
    }
    for (const auto& g : generic_) {
        if (!paired_) break;
        paired_ = std::any_of(generic_.begin(), generic_.end(), [&](const SuperTerm& p) {
            return close(p.coef, std::conj(g.coef)) && sparse_equal(p.A, g.B) && sparse_equal(p.B, g.A);
        });
    }
}

void CompiledSuperOperator::apply(const Mat& in, Mat& out, bool hermitian_input, bool include_diagonal) const {
    const auto d = static_cast<std::ptrdiff_t>(dim_);
    if (in.rows() != d || in.cols() != d) throw DimensionMismatch("rho does not match superoperator chain");
    if (hermitian_input && !paired_) throw InvalidArgument("Hermitian fast path needs a Hermiticity-preserving map");
    if (out.rows() != d || out.cols() != d) out.resize(d, d);

    const double* src = reinterpret_cast<const double*>(in.data());
    double* dst = reinterpret_cast<double*>(out.data());

    for (std::ptrdiff_t c = 0; c < d; ++c) {
        const std::ptrdiff_t r0 = hermitian_input ? c : 0;
        double* __restrict oc = dst + 2 * c * d;
        const double* __restrict ic = src + 2 * c * d;
        const cd drc = dr_[static_cast<std::size_t>(c)];
        if (include_diagonal) {
            for (std::ptrdiff_t r = r0; r < d; ++r) {
                const cd w = dl_[static_cast<std::size_t>(r)] + drc;
                const double xr = ic[2 * r], xi = ic[2 * r + 1];
                oc[2 * r] = w.real() * xr - w.imag() * xi;
                oc[2 * r + 1] = w.real() * xi + w.imag() * xr;
            }
        } else {
            std::fill(oc + 2 * r0, oc + 2 * d, 0.0);
        }
        for (const auto& s : shifts_) {
            const double fbc = s.fb[static_cast<std::size_t>(c)];
            if (fbc == 0.0) continue;
            const cd w = s.coef * fbc;
            const double wr = w.real(), wi = w.imag();
            const double* __restrict sc = src + 2 * (c + s.ob) * d + 2 * s.oa;
            const double* __restrict fa = s.fa.data();
            const std::ptrdiff_t lo = std::max(r0, -s.oa);
            const std::ptrdiff_t hi = std::min(d, d - s.oa);
            for (std::ptrdiff_t r = lo; r < hi; ++r) {
                const double f = fa[r];
                const double xr = sc[2 * r], xi = sc[2 * r + 1];
                oc[2 * r] += f * (wr * xr - wi * xi);
                oc[2 * r + 1] += f * (wr * xi + wi * xr);
            }
        }
    }
    if (hermitian_input) mirror_lower(out);
    for (const auto& g : generic_) {
        const Mat left = g.A * in;
        out.noalias() += g.coef * (left * g.B.adjoint());
    }
}

std::size_t rk4_bytes(std::size_t dim) { return 5 * sizeof(cd) * dim * dim; }

void Rk4Workspace::resize(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    stage.resize(d, d);
    acc.resize(d, d);
    k.resize(d, d);
}

void rk4_step(const CompiledSuperOperator& L, Mat& rho, double h, Rk4Workspace& ws, bool hermitian) {
    if (ws.k.rows() != rho.rows()) ws.resize(static_cast<std::size_t>(rho.rows()));
    L.apply(rho, ws.k, hermitian);
    ws.acc = rho + (h / 6.0) * ws.k;
    ws.stage = rho + (h / 2.0) * ws.k;
    L.apply(ws.stage, ws.k, hermitian);
    ws.acc += (h / 3.0) * ws.k;
    ws.stage = rho + (h / 2.0) * ws.k;
    L.apply(ws.stage, ws.k, hermitian);
    ws.acc += (h / 3.0) * ws.k;
    ws.stage = rho + h * ws.k;
    L.apply(ws.stage, ws.k, hermitian);
    rho = ws.acc + (h / 6.0) * ws.k;
}

LawsonFactors::LawsonFactors(const CompiledSuperOperator& L, double step) : h(step) {
    left.reserve(L.dim());
    right.reserve(L.dim());
    for (cd v : L.diagonal_left()) left.push_back(std::exp(0.5 * step * v));
    for (cd v : L.diagonal_right()) right.push_back(std::exp(0.5 * step * v));
}

void lawson_step(const CompiledSuperOperator& L, Mat& rho, const LawsonFactors& E, Rk4Workspace& ws, bool hermitian) {
    const Eigen::Index d = rho.rows();
    if (ws.k.rows() != d) ws.resize(static_cast<std::size_t>(d));
    if (static_cast<Eigen::Index>(E.left.size()) != d) throw DimensionMismatch("Lawson factors do not match rho");
    const double h = E.h;
    const cd* el = E.left.data();
    const cd* er = E.right.data();

    L.apply(rho, ws.k, hermitian, false);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const cd e1 = el[r] * er[c];
            const cd u = rho(r, c), k = ws.k(r, c);
            ws.acc(r, c) = e1 * e1 * (u + (h / 6.0) * k);
            ws.stage(r, c) = e1 * (u + (h / 2.0) * k);
        }
    }
    L.apply(ws.stage, ws.k, hermitian, false);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const cd e1 = el[r] * er[c];
            const cd k = ws.k(r, c);
            ws.acc(r, c) += (h / 3.0) * e1 * k;
            ws.stage(r, c) = e1 * rho(r, c) + (h / 2.0) * k;
        }
    }
    L.apply(ws.stage, ws.k, hermitian, false);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const cd e1 = el[r] * er[c];
            const cd ek = e1 * ws.k(r, c);
            ws.acc(r, c) += (h / 3.0) * ek;
            ws.stage(r, c) = e1 * e1 * rho(r, c) + h * ek;
        }
    }
    L.apply(ws.stage, ws.k, hermitian, false);
    rho = ws.acc + (h / 6.0) * ws.k;
}

FixedEvolution evolve_fixed_liouvillian(const DensityMatrix& rho, const SuperOperator& L, double t_span, double dt,
                                        std::size_t observe_mode) {
    if (!(rho.chain == L.chain())) throw DimensionMismatch("state and Liouvillian live on different chains");
    if (!(dt > 0.0) || t_span < 0.0) throw InvalidArgument("need dt > 0 and t_span >= 0");
    const CompiledSuperOperator compiled(L);
    const bool herm = compiled.hermiticity_paired() && rho.hermiticity_error() < 1e-12;

    std::size_t steps = static_cast<std::size_t>(std::ceil(t_span / dt - 1e-9));
    const double h = steps ? t_span / static_cast<double>(steps) : 0.0;

    FixedEvolution ev;
    ev.final_state = rho;
    Mat& state = ev.final_state.rho;
    if (herm) {
        const Mat adj = state.adjoint();
        state = 0.5 * (state + adj);
    }
    const cd tr0 = state.trace();
    Rk4Workspace ws;
    ev.times.push_back(0.0);
    ev.moments.push_back(mode_moments(state, rho.chain, observe_mode));
    for (std::size_t i = 1; i <= steps; ++i) {
        rk4_step(compiled, state, h, ws, herm);
        const cd tr = state.trace();
        const double t = h * static_cast<double>(i);
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag())) throw NonFiniteValue(t, "density matrix blew up");
        ev.max_trace_drift = std::max(ev.max_trace_drift, std::abs(tr - tr0));
        ev.times.push_back(t);
        ev.moments.push_back(mode_moments(state, rho.chain, observe_mode));
    }
    return ev;
}

}  // namespace delayosc::fock
