#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace delayosc::fock {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cd>;

/// n_modes truncated oscillators. Slot j has stride n_trunc^j, so slot 0 is
/// the fastest-varying index and kron(A, B) puts A on the higher slot.
struct ModeChain {
    std::size_t n_modes = 1;
    std::size_t n_trunc = 2;

    std::size_t dim() const;
    std::size_t stride(std::size_t slot) const;
    void validate() const;
    bool operator==(const ModeChain&) const = default;
};

enum class OpKind { annihilate, create, number };

/// Single-mode truncated ladder operator, <n-1|a|n> = sqrt(n).
SpMat ladder(std::size_t n_trunc);
SpMat identity(std::size_t dim);

/// Operator embedded at one tensor slot. Throws IndexOutOfRange.
SpMat mode_op(const ModeChain& chain, std::size_t mode, OpKind kind);

/// Density matrix plus the chain it lives on.
struct DensityMatrix {
    ModeChain chain;
    Mat rho;

    DensityMatrix() = default;
    DensityMatrix(ModeChain c, Mat r);

    cd trace() const { return rho.trace(); }
    double hermiticity_error() const;
    /// Smallest eigenvalue of the Hermitian part; dense solve, test-sized only.
    double min_eigenvalue() const;
};

// Single-mode states on n_trunc levels.
Mat vacuum(std::size_t n_trunc);
Mat fock_state(std::size_t n_trunc, std::size_t n);
/// Truncated coherent state, renormalized to unit trace.
Mat coherent(std::size_t n_trunc, cd alpha);
Vec coherent_ket(std::size_t n_trunc, cd alpha);
/// Geometric (thermal) populations with mean nbar, renormalized after truncation.
Mat thermal(std::size_t n_trunc, double nbar);

/// rho_{n-1} (x) ... (x) rho_0, i.e. factors[j] sits on slot j.
Mat product_state(const std::vector<Mat>& factors);
Mat kron(const Mat& high, const Mat& low);

/// Traces out one slot; the remaining slots keep their order.
Mat partial_trace(const Mat& rho, const ModeChain& chain, std::size_t slot);
/// Reduced single-mode state of one slot.
Mat reduced_state(const Mat& rho, const ModeChain& chain, std::size_t slot);

/// tr(O rho). Throws DimensionMismatch.
cd expectation(const Mat& rho, const SpMat& op);
cd expectation(const DensityMatrix& rho, const SpMat& op);

struct ModeMoments {
    cd a;       // <a>
    cd aa;      // <a a>
    double n;   // <a^dag a>
};

/// First and second moments of one slot, read straight off rho.
ModeMoments mode_moments(const Mat& rho, const ModeChain& chain, std::size_t mode);

struct Quadratures {
    double dX;
    double dP;
};

/// X = (a + a^dag)/sqrt2, P = -i(a - a^dag)/sqrt2.
Quadratures quadratures_from_moments(const ModeMoments& m);
Quadratures quadrature_stats(const DensityMatrix& rho, std::size_t mode);

}  // namespace delayosc::fock
