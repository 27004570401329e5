#include "delayosc/fock.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "delayosc/errors.hpp"

namespace delayosc::fock {

std::size_t ModeChain::dim() const {
    std::size_t d = 1;
    for (std::size_t i = 0; i < n_modes; ++i) d *= n_trunc;
    return d;
}

std::size_t ModeChain::stride(std::size_t slot) const {
    std::size_t s = 1;
    for (std::size_t i = 0; i < slot; ++i) s *= n_trunc;
    return s;
}

void ModeChain::validate() const {
    if (n_modes < 1) throw InvalidArgument("chain needs at least one mode");
    if (n_trunc < 2) throw InvalidArgument("n_trunc must be >= 2");
}

SpMat ladder(std::size_t n_trunc) {
    SpMat a(static_cast<Eigen::Index>(n_trunc), static_cast<Eigen::Index>(n_trunc));
    std::vector<Eigen::Triplet<cd>> t;
    for (std::size_t n = 1; n < n_trunc; ++n) {
        t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(static_cast<double>(n)));
    }
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

SpMat identity(std::size_t dim) {
    SpMat id(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    id.setIdentity();
    return id;
}

SpMat mode_op(const ModeChain& chain, std::size_t mode, OpKind kind) {
    chain.validate();
    if (mode >= chain.n_modes) throw IndexOutOfRange("mode index " + std::to_string(mode) + " out of range");
    const std::size_t d = chain.dim();
    const std::size_t stride = chain.stride(mode);
    const std::size_t nt = chain.n_trunc;
    std::vector<Eigen::Triplet<cd>> t;
    t.reserve(d);
    for (std::size_t idx = 0; idx < d; ++idx) {
        const std::size_t n = (idx / stride) % nt;
        const int col = static_cast<int>(idx);
        switch (kind) {
            case OpKind::annihilate:
                if (n > 0) t.emplace_back(static_cast<int>(idx - stride), col, std::sqrt(static_cast<double>(n)));
                break;
            case OpKind::create:
                if (n + 1 < nt) t.emplace_back(static_cast<int>(idx + stride), col, std::sqrt(static_cast<double>(n + 1)));
                break;
            case OpKind::number:
                if (n > 0) t.emplace_back(col, col, static_cast<double>(n));
                break;
        }
    }
    SpMat op(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    op.setFromTriplets(t.begin(), t.end());
    return op;
}

DensityMatrix::DensityMatrix(ModeChain c, Mat r) : chain(c), rho(std::move(r)) {
    const auto d = static_cast<Eigen::Index>(chain.dim());
    if (rho.rows() != d || rho.cols() != d) throw DimensionMismatch("density matrix does not match chain dimension");
}

double DensityMatrix::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
    const Mat h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Mat vacuum(std::size_t n_trunc) { return fock_state(n_trunc, 0); }

Mat fock_state(std::size_t n_trunc, std::size_t n) {
    if (n >= n_trunc) throw IndexOutOfRange("Fock level beyond truncation");
    const auto d = static_cast<Eigen::Index>(n_trunc);
    Mat rho = Mat::Zero(d, d);
    rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;
    return rho;
}

Vec coherent_ket(std::size_t n_trunc, cd alpha) {
    Vec psi(static_cast<Eigen::Index>(n_trunc));
    cd c = std::exp(-0.5 * std::norm(alpha));
    for (std::size_t n = 0; n < n_trunc; ++n) {
        psi(static_cast<Eigen::Index>(n)) = c;
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    psi.normalize();
    return psi;
}

Mat coherent(std::size_t n_trunc, cd alpha) {
    const Vec psi = coherent_ket(n_trunc, alpha);
    return psi * psi.adjoint();
}

Mat thermal(std::size_t n_trunc, double nbar) {
    if (nbar < 0) throw InvalidArgument("thermal occupation must be >= 0");
    const auto d = static_cast<Eigen::Index>(n_trunc);
    Mat rho = Mat::Zero(d, d);
    const double q = nbar / (1.0 + nbar);
    double p = 1.0, total = 0.0;
    for (Eigen::Index n = 0; n < d; ++n) {
        rho(n, n) = p;
        total += p;
        p *= q;
    }
    return rho / total;
}

Mat kron(const Mat& high, const Mat& low) {
    const Eigen::Index lr = low.rows(), lc = low.cols();
    Mat out(high.rows() * lr, high.cols() * lc);
    for (Eigen::Index j = 0; j < high.cols(); ++j)
        for (Eigen::Index i = 0; i < high.rows(); ++i) out.block(i * lr, j * lc, lr, lc) = high(i, j) * low;
    return out;
}

Mat product_state(const std::vector<Mat>& factors) {
    if (factors.empty()) throw InvalidArgument("product of zero factors");
    Mat out = factors.front();
    for (std::size_t j = 1; j < factors.size(); ++j) out = kron(factors[j], out);
    return out;
}

Mat partial_trace(const Mat& rho, const ModeChain& chain, std::size_t slot) {
    if (slot >= chain.n_modes) throw IndexOutOfRange("slot out of range");
    if (chain.n_modes == 1) throw InvalidArgument("cannot trace out the only mode");
    const std::size_t d = chain.dim();
    if (static_cast<std::size_t>(rho.rows()) != d) throw DimensionMismatch("rho does not match chain");
    const std::size_t nt = chain.n_trunc;
    const std::size_t lo = chain.stride(slot);
    const std::size_t hi = d / (lo * nt);
    const std::size_t dr = lo * hi;
    Mat out = Mat::Zero(static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dr));
    // index = h*lo*nt + k*lo + l  ->  reduced index h*lo + l
    for (std::size_t hc = 0; hc < hi; ++hc)
        for (std::size_t lc = 0; lc < lo; ++lc)
            for (std::size_t hr = 0; hr < hi; ++hr)
                for (std::size_t lr = 0; lr < lo; ++lr) {
                    cd s{0.0};
                    for (std::size_t k = 0; k < nt; ++k) {
                        s += rho(static_cast<Eigen::Index>(hr * lo * nt + k * lo + lr),
                                 static_cast<Eigen::Index>(hc * lo * nt + k * lo + lc));
                    }
                    out(static_cast<Eigen::Index>(hr * lo + lr), static_cast<Eigen::Index>(hc * lo + lc)) = s;
                }
    return out;
}

Mat reduced_state(const Mat& rho, const ModeChain& chain, std::size_t slot) {
    if (slot >= chain.n_modes) throw IndexOutOfRange("slot out of range");
    const std::size_t d = chain.dim();
    if (static_cast<std::size_t>(rho.rows()) != d) throw DimensionMismatch("rho does not match chain");
    const std::size_t nt = chain.n_trunc;
    const std::size_t stride = chain.stride(slot);
    Mat out = Mat::Zero(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt));
    // Sum over every index of the other slots: rows/cols that agree off this slot.
    for (std::size_t base = 0; base < d; ++base) {
        if ((base / stride) % nt != 0) continue;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < nt; ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    rho(static_cast<Eigen::Index>(base + i * stride), static_cast<Eigen::Index>(base + j * stride));
    }
    return out;
}

cd expectation(const Mat& rho, const SpMat& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols() || rho.rows() != rho.cols())
        throw DimensionMismatch("operator and density matrix dimensions differ");
    cd s{0.0};
    for (Eigen::Index k = 0; k < op.outerSize(); ++k)
        for (SpMat::InnerIterator it(op, k); it; ++it) s += it.value() * rho(it.col(), it.row());
    return s;
}

cd expectation(const DensityMatrix& rho, const SpMat& op) { return expectation(rho.rho, op); }

ModeMoments mode_moments(const Mat& rho, const ModeChain& chain, std::size_t mode) {
    if (mode >= chain.n_modes) throw IndexOutOfRange("mode index out of range");
    const std::size_t d = chain.dim();
    if (static_cast<std::size_t>(rho.rows()) != d || static_cast<std::size_t>(rho.cols()) != d)
        throw DimensionMismatch("rho does not match chain");
    const std::size_t s = chain.stride(mode);
    const std::size_t nt = chain.n_trunc;
    ModeMoments m{0.0, 0.0, 0.0};
    for (std::size_t l = 0; l < d; ++l) {
        const std::size_t n = (l / s) % nt;
        if (n == 0) continue;
        const auto li = static_cast<Eigen::Index>(l);
        const double dn = static_cast<double>(n);
        m.n += dn * rho(li, li).real();
        m.a += std::sqrt(dn) * rho(li, static_cast<Eigen::Index>(l - s));
        if (n >= 2) m.aa += std::sqrt(dn * (dn - 1.0)) * rho(li, static_cast<Eigen::Index>(l - 2 * s));
    }
    return m;
}

Quadratures quadratures_from_moments(const ModeMoments& m) {
    // Uses [a, a^dag] = 1, which keeps the vacuum exact under truncation.
    const double x2 = 0.5 * (2.0 * m.aa.real() + 2.0 * m.n + 1.0);
    const double p2 = 0.5 * (2.0 * m.n + 1.0 - 2.0 * m.aa.real());
    const double x = std::sqrt(2.0) * m.a.real();
    const double p = std::sqrt(2.0) * m.a.imag();
    return {std::sqrt(std::max(0.0, x2 - x * x)), std::sqrt(std::max(0.0, p2 - p * p))};
}

Quadratures quadrature_stats(const DensityMatrix& rho, std::size_t mode) {
    return quadratures_from_moments(mode_moments(rho.rho, rho.chain, mode));
}

}  // namespace delayosc::fock
