#pragma once

#include <complex>
#include <string>
#include <vector>

namespace delayosc::stability {

using cd = std::complex<double>;

struct CurveSample {
    double theta;
    double alpha_prime;
    double beta_prime;
};

/// Samples of the pure-oscillation boundary C_j, theta in (j pi, (j+1) pi).
struct StabilityCurve {
    int branch = 0;
    std::vector<CurveSample> samples;
};

struct CriticalDelay {
    double tau_cr;
    double omega_tau;
};

enum class Stability { stable, oscillatory_boundary, unstable };

std::string to_string(Stability s);

/// Lambert W on branch k, by Halley/Newton from the usual asymptotic seeds.
/// Accuracy is only what a Newton seed needs (~1e-12 relative in practice).
cd lambert_w(cd z, int k = 0);
/// Same, taking log(z) so that huge arguments never leave double range.
cd lambert_w_log(cd log_z, int k = 0);

CurveSample c_curve_point(double theta);
StabilityCurve c_curve(int j, std::size_t n_samples);

/// alpha, beta real rates. Throws NoOscillation when |beta| <= |alpha| or
/// beta >= 0 (the imaginary-axis crossing then is not on C_0).
CriticalDelay critical_delay(double alpha, double beta);

/// z - alpha' - beta' exp(-z)
cd characteristic_residual(cd z, cd alpha_prime, cd beta_prime);

/// Roots from Lambert-W branches -k_branches .. k_branches-1, Newton-polished,
/// de-duplicated and sorted by descending real part.
std::vector<cd> characteristic_roots(cd alpha_prime, cd beta_prime, int k_branches = 4);

inline constexpr double kBoundaryTol = 1e-8;

Stability classify_stability(double alpha_prime, double beta_prime, double tol = kBoundaryTol);

}  // namespace delayosc::stability
