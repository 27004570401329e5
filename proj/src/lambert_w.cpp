#include <cmath>
#include <numbers>

#include "delayosc/errors.hpp"
#include "delayosc/stability.hpp"

namespace delayosc::stability {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxIter = 64;

cd halley(cd z, cd w) {
    for (int it = 0; it < kMaxIter; ++it) {
        const cd ew = std::exp(w);
        const cd f = w * ew - z;
        const cd wp1 = w + 1.0;
        if (std::abs(wp1) < 1e-300) break;
        const cd step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// Newton on w + log w = L, the log form of w e^w = z on branch k.
cd log_newton(cd target, cd w) {
    for (int it = 0; it < kMaxIter; ++it) {
        const cd f = w + std::log(w) - target;
        const cd step = f / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

cd principal_direct(cd z) {
    const cd branch_offset = kE * z + 1.0;
    // left of the origin a real log seed cannot leave the real axis
    if (std::abs(branch_offset) < 0.3 || (z.real() < 0.0 && std::abs(branch_offset) < 1.5)) {
        const cd p = std::sqrt(2.0 * branch_offset);
        return halley(z, -1.0 + p - p * p / 3.0);
    }
    if (std::abs(1.0 + z) > 0.3) return halley(z, std::log(1.0 + z));
    const cd l = std::log(z);
    return halley(z, l - std::log(l));
}

}  // namespace

cd lambert_w(cd z, int k) {
    if (z == cd(0.0)) {
        if (k == 0) return 0.0;
        throw InvalidArgument("Lambert W is singular at 0 off the principal branch");
    }
    const cd branch_offset = kE * z + 1.0;
    const bool near_branch_point = std::abs(branch_offset) < 0.3;

    if (k == 0 && (near_branch_point || std::abs(z) < 2.0)) return principal_direct(z);
    if (k == -1 && near_branch_point && z.imag() <= 0.0) {
        const cd p = std::sqrt(2.0 * branch_offset);
        return halley(z, -1.0 - p - p * p / 3.0);
    }
    // real W_{-1} on (-1/e, 0): the log form lands on the wrong sheet here
    if (k == -1 && z.imag() == 0.0 && z.real() < 0.0 && z.real() > -1.0 / kE) {
        const double l1 = std::log(-z.real());
        return halley(z, l1 - std::log(-l1));
    }
    return lambert_w_log(std::log(z), k);
}

cd lambert_w_log(cd log_z, int k) {
    const cd target = log_z + cd(0.0, kTwoPi * k);
    // Principal branch for modest |z| is better served by the direct form.
    if (k == 0 && std::real(log_z) < 0.7) return principal_direct(std::exp(log_z));
    cd seed = target - std::log(target);
    if (std::abs(seed) < 1e-3) seed = target;
    return log_newton(target, seed);
}

}  // namespace delayosc::stability
