#include "delayosc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delayosc/errors.hpp"

namespace delayosc::stability {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRootTol = 1e-12;
constexpr int kPolishIter = 100;

bool finite(cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cd polish(cd z, cd ap, cd bp) {
    for (int it = 0; it < kPolishIter; ++it) {
        const cd e = bp * std::exp(-z);
        const cd g = z - ap - e;
        // Absolute tolerance, but rounding in bp*exp(-z) scales with |z| on far branches.
        if (std::abs(g) < 0.25 * kRootTol * std::max(1.0, std::abs(z) / 8.0)) return z;
        const cd step = g / (1.0 + e);
        z -= step;
        if (!finite(z)) break;
        if (std::abs(step) < 1e-16 * std::abs(z)) {
            if (std::abs(characteristic_residual(z, ap, bp)) < kRootTol * std::max(1.0, std::abs(z) / 8.0))
                return z;
        }
    }
    throw ConvergenceFailure("characteristic root did not converge in 100 Newton iterations");
}

}  // namespace

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::oscillatory_boundary: return "oscillatory_boundary";
        case Stability::unstable: return "unstable";
    }
    return "unknown";
}

CurveSample c_curve_point(double theta) {
    const double s = std::sin(theta);
    return {theta, theta * std::cos(theta) / s, -theta / s};
}

StabilityCurve c_curve(int j, std::size_t n_samples) {
    if (j < 0) throw InvalidArgument("branch index must be >= 0");
    if (n_samples < 2) throw InvalidArgument("need at least two samples");
    StabilityCurve curve;
    curve.branch = j;
    curve.samples.reserve(n_samples);
    const double n1 = static_cast<double>(n_samples + 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double theta = kPi * (j + static_cast<double>(i + 1) / n1);
        curve.samples.push_back(c_curve_point(theta));
    }
    return curve;
}

CriticalDelay critical_delay(double alpha, double beta) {
    if (std::abs(beta) <= std::abs(alpha)) {
        throw NoOscillation("critical delay needs |beta| > |alpha|");
    }
    if (beta >= 0.0) {
        throw NoOscillation("positive delayed feedback never crosses C_0");
    }
    const double omega = std::sqrt(beta * beta - alpha * alpha);
    const double phase = std::acos(-alpha / beta);
    return {phase / omega, omega};
}

cd characteristic_residual(cd z, cd alpha_prime, cd beta_prime) {
    return z - alpha_prime - beta_prime * std::exp(-z);
}

std::vector<cd> characteristic_roots(cd alpha_prime, cd beta_prime, int k_branches) {
    if (k_branches < 1) throw InvalidArgument("k_branches must be >= 1");
    if (beta_prime == cd(0.0)) return {alpha_prime};

    const cd log_arg = std::log(beta_prime) - alpha_prime;
    std::vector<cd> roots;
    for (int k = -k_branches; k < k_branches; ++k) {
        cd w = lambert_w_log(log_arg, k);
        if (!finite(w)) {
            const cd t = log_arg + cd(0.0, 2.0 * kPi * k);
            w = t - std::log(t);
        }
        const cd z = polish(alpha_prime + w, alpha_prime, beta_prime);
        const bool dup = std::any_of(roots.begin(), roots.end(), [&](cd r) {
            return std::abs(r - z) < 1e-9 * std::max(1.0, std::abs(z));
        });
        if (!dup) roots.push_back(z);
    }
    std::sort(roots.begin(), roots.end(), [](cd a, cd b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return roots;
}

Stability classify_stability(double alpha_prime, double beta_prime, double tol) {
    const auto roots = characteristic_roots(alpha_prime, beta_prime, 4);
    const double lead = roots.front().real();
    if (lead < -tol) return Stability::stable;
    if (lead <= tol) return Stability::oscillatory_boundary;
    return Stability::unstable;
}

}  // namespace delayosc::stability
