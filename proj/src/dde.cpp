#include "delayosc/dde.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "delayosc/errors.hpp"
#include "delayosc/timeseries.hpp"

namespace delayosc::dde {

HistorySpec HistorySpec::constant(cd value) {
    HistorySpec h;
    h.terms_.push_back({value, 0.0, false});
    return h;
}

HistorySpec HistorySpec::exponential(cd rate) {
    if (!(rate.real() > 0.0)) {
        throw InvalidArgument("exponential history needs a rate with positive real part");
    }
    HistorySpec h;
    h.terms_.push_back({1.0, rate, true});
    return h;
}

cd HistorySpec::value(double t, cd x0) const {
    cd sum{0.0};
    for (const auto& term : terms_) {
        const cd amp = term.scales_with_x0 ? term.amplitude * x0 : term.amplitude;
        sum += amp * std::exp(term.rate * t);
    }
    return sum;
}

HistorySpec HistorySpec::operator+(const HistorySpec& other) const {
    HistorySpec h = *this;
    h.terms_.insert(h.terms_.end(), other.terms_.begin(), other.terms_.end());
    return h;
}

HistorySpec HistorySpec::modulated(cd shift) const {
    HistorySpec h = *this;
    for (auto& term : h.terms_) term.rate += shift;
    return h;
}

std::string HistorySpec::describe() const {
    if (terms_.empty()) return "zero";
    std::ostringstream os;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (i) os << " + ";
        os << (t.scales_with_x0 ? "x0*" : "") << t.amplitude << "*exp(" << t.rate << "*t)";
    }
    return os.str();
}

void DdeProblem::validate() const {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (dt > tau) throw InvalidArgument("dt must not exceed tau");
    if (!(gamma_non >= 0.0)) throw InvalidArgument("gamma_non must be non-negative");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    for (const auto& term : history.terms()) {
        if (term.scales_with_x0 && !(term.rate.real() > 0.0)) {
            throw InvalidArgument("exponential history needs a rate with positive real part");
        }
    }
}

std::size_t steps_per_delay(double tau, double dt) {
    const double ratio = tau / dt;
    auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    return n == 0 ? 1 : n;
}

namespace {

struct Rhs {
    cd linear;
    cd beta;
    double gamma;
    cd operator()(cd x, cd delayed) const {
        return linear * x + beta * delayed - gamma * x * x * x;
    }
};

void check_finite(cd x, double t) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || std::abs(x) > kOverflowThreshold) {
        throw NonFiniteValue(t, "DDE solution left the representable range");
    }
}

}  // namespace

Trajectory integrate_dde(const DdeProblem& problem) {
    problem.validate();

    const std::size_t n = steps_per_delay(problem.tau, problem.dt);
    const double h = problem.tau / static_cast<double>(n);
    auto total = static_cast<std::size_t>(std::llround(problem.horizon / h));
    if (total == 0) total = 1;
    const std::size_t segments = (total + n - 1) / n;

    const Rhs rhs{cd(0.0, problem.omega) + problem.alpha, problem.beta, problem.gamma_non};

    Trajectory out;
    out.times.resize(total + 1);
    out.values.resize(total + 1);
    for (std::size_t i = 0; i <= total; ++i) out.times[i] = static_cast<double>(i) * h;
    out.values[0] = problem.x0;

    // Derivatives seen from inside each segment, endpoints included; a
    // boundary sample carries a different one-sided derivative per segment.
    std::vector<cd> deriv(segments * (n + 1));
    auto seg_deriv = [&](std::size_t s, std::size_t l) -> cd& { return deriv[s * (n + 1) + l]; };

    auto delayed_at = [&](std::size_t s, std::size_t l) -> cd {
        if (s == 0) return problem.history.value(static_cast<double>(l) * h - problem.tau, problem.x0);
        return out.values[(s - 1) * n + l];
    };
    auto delayed_mid = [&](std::size_t s, std::size_t l) -> cd {
        if (s == 0) {
            return problem.history.value((static_cast<double>(l) + 0.5) * h - problem.tau, problem.x0);
        }
        const std::size_t j = (s - 1) * n + l;
        const cd x0 = out.values[j];
        const cd x1 = out.values[j + 1];
        return 0.5 * (x0 + x1) + (h / 8.0) * (seg_deriv(s - 1, l) - seg_deriv(s - 1, l + 1));
    };

    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t s = i / n;
        const std::size_t l = i % n;
        const cd x = out.values[i];
        const cd d0 = delayed_at(s, l);
        const cd dm = delayed_mid(s, l);
        const cd d1 = delayed_at(s, l + 1);

        const cd k1 = rhs(x, d0);
        if (l == 0 || i == 0) seg_deriv(s, l) = k1;
        const cd k2 = rhs(x + 0.5 * h * k1, dm);
        const cd k3 = rhs(x + 0.5 * h * k2, dm);
        const cd k4 = rhs(x + h * k3, d1);
        const cd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(next, out.times[i + 1]);
        out.values[i + 1] = next;
        seg_deriv(s, l + 1) = rhs(next, d1);
    }
    return out;
}

DdeProblem rescale_detuned(const DdeProblem& problem) {
    if (problem.omega == 0.0) return problem;
    DdeProblem p = problem;
    p.beta = problem.beta * std::exp(cd(0.0, -problem.omega * problem.tau));
    p.history = problem.history.modulated(cd(0.0, -problem.omega));
    p.omega = 0.0;
    return p;
}

Trajectory undo_detuning(const Trajectory& rescaled, double omega) {
    Trajectory out = rescaled;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values[i] *= std::exp(cd(0.0, omega * out.times[i]));
    }
    return out;
}

void write_csv(std::ostream& os, const Trajectory& tr) {
    os << "t,re_x,im_x\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        os << format_number(tr.times[i]) << ',' << format_number(tr.values[i].real()) << ','
           << format_number(tr.values[i].imag()) << '\n';
    }
}

}  // namespace delayosc::dde
