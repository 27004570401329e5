#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "delayosc/fock.hpp"

namespace delayosc::fock {

/// coef * A rho B^dag
struct SuperTerm {
    cd coef;
    SpMat A;
    SpMat B;
};

/// Linear map on density matrices kept as a list of sandwich terms. The
/// column-stacked sparse matrix is only materialized on request.
class SuperOperator {
public:
    explicit SuperOperator(ModeChain chain = {});

    const ModeChain& chain() const { return chain_; }
    const std::vector<SuperTerm>& terms() const { return terms_; }

    void add_term(cd coef, SpMat A, SpMat B);
    SuperOperator& operator+=(const SuperOperator& other);
    SuperOperator operator+(const SuperOperator& other) const;
    SuperOperator scaled(cd factor) const;

    /// Reference application through sparse-dense products.
    Mat apply(const Mat& rho) const;
    /// vec(A rho B^dag) = (conj(B) (x) A) vec(rho); d^2 x d^2, tests only.
    SpMat to_sparse() const;

private:
    ModeChain chain_;
    std::vector<SuperTerm> terms_;
};

/// rate * (c rho c^dag - {c^dag c, rho}/2)
SuperOperator dissipator(const ModeChain& chain, const SpMat& c, double rate);
/// -i [H, rho]
SuperOperator hamiltonian(const ModeChain& chain, const SpMat& H);
/// Unidirectional drive of slot j_to by slot j_from:
/// -s (e^{i phi} [a_to^dag, a_from rho] + e^{-i phi} [rho a_from^dag, a_to]).
SuperOperator coupling_term(const ModeChain& chain, std::size_t j_from, std::size_t j_to, double strength,
                            double phi = 0.0);

/// Precomputed form of a SuperOperator for repeated application. Terms whose
/// operators have one real entry per row on a fixed diagonal become strided
/// sweeps over rho; everything else falls back to sparse products.
class CompiledSuperOperator {
public:
    explicit CompiledSuperOperator(const SuperOperator& op);

    const ModeChain& chain() const { return chain_; }
    std::size_t dim() const { return dim_; }
    /// True when every term has a conjugate partner with A and B swapped,
    /// so Hermitian input gives Hermitian output.
    bool hermiticity_paired() const { return paired_; }
    std::size_t shift_terms() const { return shifts_.size(); }
    std::size_t generic_terms() const { return generic_.size(); }

    /// out = L(in). With hermitian_input only the lower triangle is computed
    /// and then mirrored; requires hermiticity_paired().
    void apply(const Mat& in, Mat& out, bool hermitian_input, bool include_diagonal = true) const;

    /// Diagonal part: (L rho)_rc gets (left[r] + right[c]) rho_rc.
    const std::vector<cd>& diagonal_left() const { return dl_; }
    const std::vector<cd>& diagonal_right() const { return dr_; }

private:
    struct Shift {
        cd coef;
        std::ptrdiff_t oa, ob;
        std::vector<double> fa, fb;
    };

    ModeChain chain_;
    std::size_t dim_;
    bool paired_ = false;
    std::vector<cd> dl_, dr_;
    std::vector<Shift> shifts_;
    std::vector<SuperTerm> generic_;
};

/// RK4 buffers for one chain dimension: rho, stage, accumulator, slope, plus
/// one matrix of headroom for observables and growth.
std::size_t rk4_bytes(std::size_t dim);

struct Rk4Workspace {
    Mat stage, acc, k;
    void resize(std::size_t dim);
};

/// One classical RK4 step of d rho/dt = L rho in place.
void rk4_step(const CompiledSuperOperator& L, Mat& rho, double h, Rk4Workspace& ws, bool hermitian);

enum class Integrator { rk4, lawson };

/// exp(h/2 * diagonal) split into row and column factors.
struct LawsonFactors {
    std::vector<cd> left, right;
    double h = 0.0;
    LawsonFactors() = default;
    LawsonFactors(const CompiledSuperOperator& L, double h);
};

/// Integrating-factor RK4: the diagonal part of L is propagated exactly and
/// RK4 only sees the remaining terms. Stable far beyond the plain RK4 step
/// limit set by the fast-decaying top Fock levels; trace is conserved only to
/// the method's truncation error.
void lawson_step(const CompiledSuperOperator& L, Mat& rho, const LawsonFactors& E, Rk4Workspace& ws, bool hermitian);

struct FixedEvolution {
    DensityMatrix final_state;
    std::vector<double> times;
    std::vector<ModeMoments> moments;  // of the observed slot, at every step
    double max_trace_drift = 0.0;
};

/// Integrates rho over t_span with step dt (shrunk so that it divides the
/// span). Throws DimensionMismatch or NonFiniteValue.
FixedEvolution evolve_fixed_liouvillian(const DensityMatrix& rho, const SuperOperator& L, double t_span, double dt,
                                        std::size_t observe_mode = 0);

}  // namespace delayosc::fock
