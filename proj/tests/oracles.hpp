#pragma once
// Independent reference computations for the tests. Nothing here calls into
// the library's numerics; only plain Eigen dense algebra and textbook formulas.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Dense = Eigen::MatrixXcd;

/// Truncated annihilation operator built entry by entry.
inline Dense ladder(int n) {
    Dense a = Dense::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline Dense kron(const Dense& A, const Dense& B) {
    Dense out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

/// Operator on `mode` of an n_modes chain; slot 0 is the fastest index, so
/// the full operator is I x ... x op x ... x I with slot 0 rightmost.
inline Dense embed(const Dense& op, int mode, int n_modes) {
    const Eigen::Index n = op.rows();
    Dense out = Dense::Identity(1, 1);
    for (int slot = n_modes - 1; slot >= 0; --slot) out = kron(out, slot == mode ? op : Dense::Identity(n, n));
    return out;
}

/// |alpha> from its series, normalized on the truncated space.
inline Dense coherent_dm(int n, cd alpha) {
    Eigen::VectorXcd v(n);
    double fact = 1.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) fact *= k;
        v(k) = std::pow(alpha, k) / std::sqrt(fact);
    }
    v /= v.norm();
    return v * v.adjoint();
}

inline Dense thermal_dm(int n, double nbar) {
    Dense r = Dense::Zero(n, n);
    double z = 0.0;
    for (int k = 0; k < n; ++k) z += std::pow(nbar / (1.0 + nbar), k);
    for (int k = 0; k < n; ++k) r(k, k) = std::pow(nbar / (1.0 + nbar), k) / z;
    return r;
}

/// D[c] rho applied directly.
inline Dense lindblad(const Dense& c, const Dense& rho) {
    const Dense cd_ = c.adjoint();
    return c * rho * cd_ - 0.5 * (cd_ * c * rho + rho * cd_ * c);
}

/// Classical RK4 on a dense generator with a tiny step; slow but obviously right.
inline Dense evolve(const std::function<Dense(const Dense&)>& L, Dense rho, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Dense k1 = L(rho);
        const Dense k2 = L(rho + 0.5 * h * k1);
        const Dense k3 = L(rho + 0.5 * h * k2);
        const Dense k4 = L(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

/// Real root of z - a - b exp(-z) on [lo, hi] by bisection (sign change required).
inline double bisect_real_root(double a, double b, double lo, double hi) {
    auto f = [&](double z) { return z - a - b * std::exp(-z); };
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Forward Euler with a very fine step for x' = a x + b x(t - tau) - g x^3,
/// zero history; only low accuracy (~step) but independent of the library.
inline std::vector<cd> euler_dde(cd a, cd b, double g, double tau, cd x0, double horizon, int per_tau) {
    const double h = tau / per_tau;
    const int n = static_cast<int>(std::lround(horizon / h));
    std::vector<cd> x(n + 1);
    x[0] = x0;
    for (int i = 0; i < n; ++i) {
        const cd delayed = i - per_tau >= 0 ? x[i - per_tau] : cd(0.0);
        x[i + 1] = x[i] + h * (a * x[i] + b * delayed - g * x[i] * x[i] * x[i]);
    }
    return x;
}

/// Local maxima of |x| (index, value) after index `from`.
inline std::vector<std::pair<std::size_t, double>> peaks(const std::vector<double>& v, std::size_t from) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = std::max<std::size_t>(from, 1); i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) out.push_back({i, v[i]});
    return out;
}

/// Vertex of the parabola through three samples, for sub-grid peak times and values.
inline std::pair<double, double> refine_peak(double t1, double t2, double t3, double y1, double y2, double y3) {
    const double h = t2 - t1;
    const double denom = y1 - 2.0 * y2 + y3;
    if (denom == 0.0) return {t2, y2};
    const double d = 0.5 * (y1 - y3) / denom;
    return {t2 + d * h, y2 - 0.25 * (y1 - y3) * d};
}

}  // namespace oracle
