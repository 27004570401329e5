#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace delayosc::dde {

using cd = std::complex<double>;

/// Past values x(t), t < 0, as a sum of exponentials amplitude * exp(rate * t).
///
/// A term flagged `scales_with_x0` multiplies its amplitude by the initial
/// value, which is how `exponential(rate)` reads x(t) = x0 * exp(rate * t).
/// Sums of histories are kept as concatenated terms so that superposition of
/// solutions can be checked exactly.
struct HistoryTerm {
    cd amplitude{0.0};
    cd rate{0.0};
    bool scales_with_x0 = false;
};

class HistorySpec {
public:
    static HistorySpec zero() { return {}; }
    static HistorySpec constant(cd value);
    /// x(t) = x0 exp(rate t); rate must have a positive real part.
    static HistorySpec exponential(cd rate);

    cd value(double t, cd x0) const;
    bool is_zero() const { return terms_.empty(); }
    const std::vector<HistoryTerm>& terms() const { return terms_; }

    HistorySpec operator+(const HistorySpec& other) const;
    /// Multiplies every term by exp(shift * t); used by the detuning gauge.
    HistorySpec modulated(cd shift) const;

    std::string describe() const;

private:
    std::vector<HistoryTerm> terms_;
};

/// x'(t) = (i omega + alpha) x(t) + beta x(t - tau) - gamma_non x(t)^3
struct DdeProblem {
    cd alpha{-1.0};
    cd beta{0.0};
    double omega = 0.0;
    double gamma_non = 0.0;
    double tau = 1.0;
    HistorySpec history;
    cd x0{1.0};
    double horizon = 1.0;
    double dt = 1e-3;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<cd> values;

    std::size_t size() const { return times.size(); }
    double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Number of integrator steps per delay interval: the requested dt is
/// shrunk so that tau is an integer number of steps.
std::size_t steps_per_delay(double tau, double dt);

/// Method of steps with classical RK4 inside each delay segment. Delayed
/// arguments at stage midpoints come from cubic Hermite interpolation of the
/// stored previous segment; segment endpoints use that segment's own samples.
///
/// Throws NonFiniteValue once |x| exceeds 1e12.
Trajectory integrate_dde(const DdeProblem& problem);

/// Removes the detuning by the gauge x~(t) = exp(-i omega t) x(t): the
/// returned problem has omega = 0 and beta exp(-i omega tau).
DdeProblem rescale_detuned(const DdeProblem& problem);

/// Multiplies a trajectory of the rescaled problem back by exp(i omega t).
Trajectory undo_detuning(const Trajectory& rescaled, double omega);

inline constexpr double kOverflowThreshold = 1e12;

/// Columns: t, re_x, im_x.
void write_csv(std::ostream& os, const Trajectory& tr);

}  // namespace delayosc::dde
