#include <algorithm>
#include <cstdio>
#include <sstream>

#include "delayosc/errors.hpp"
#include "delayosc/moments.hpp"

namespace delayosc::moments {

namespace {

double binomial(std::uint32_t n, std::uint32_t k) {
    double r = 1.0;
    for (std::uint32_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

double factorial(std::uint32_t n) {
    double r = 1.0;
    for (std::uint32_t i = 2; i <= n; ++i) r *= static_cast<double>(i);
    return r;
}

// a^dag^p1 a^q1 a^dag^p2 a^q2 on one mode, normal ordered.
std::vector<std::pair<double, ModePower>> mode_product(const ModePower& x, const ModePower& y) {
    std::vector<std::pair<double, ModePower>> out;
    const std::uint32_t kmax = std::min(x.q, y.p);
    for (std::uint32_t k = 0; k <= kmax; ++k) {
        const double c = binomial(x.q, k) * binomial(y.p, k) * factorial(k);
        out.push_back({c, {x.mode, x.p + y.p - k, x.q + y.q - k}});
    }
    return out;
}

std::string format_coef(cd c) {
    char buf[64];
    if (c.imag() == 0.0) {
        std::snprintf(buf, sizeof buf, "%.12g", c.real());
    } else {
        std::snprintf(buf, sizeof buf, "(%.12g%+.12gi)", c.real(), c.imag());
    }
    return buf;
}

void accumulate(OpPoly& poly, const OperatorWord& w, cd c) {
    if (c == cd(0.0)) return;
    auto [it, inserted] = poly.try_emplace(w, c);
    if (!inserted) {
        it->second += c;
        if (it->second == cd(0.0)) poly.erase(it);
    }
}

}  // namespace

OperatorWord::OperatorWord(std::vector<ModePower> powers) {
    std::sort(powers.begin(), powers.end(), [](const ModePower& a, const ModePower& b) { return a.mode < b.mode; });
    for (const auto& mp : powers) {
        if (mp.p == 0 && mp.q == 0) continue;
        if (!powers_.empty() && powers_.back().mode == mp.mode)
            throw InvalidArgument("operator word lists mode " + std::to_string(mp.mode) + " twice");
        powers_.push_back(mp);
    }
}

std::uint32_t OperatorWord::order() const {
    std::uint32_t n = 0;
    for (const auto& mp : powers_) n += mp.p + mp.q;
    return n;
}

int OperatorWord::imbalance() const {
    int n = 0;
    for (const auto& mp : powers_) n += static_cast<int>(mp.p) - static_cast<int>(mp.q);
    return n;
}

OperatorWord OperatorWord::dagger() const {
    OperatorWord w;
    w.powers_ = powers_;
    for (auto& mp : w.powers_) std::swap(mp.p, mp.q);
    return w;
}

std::vector<Ladder> OperatorWord::letters() const {
    std::vector<Ladder> out;
    for (const auto& mp : powers_) {
        for (std::uint32_t i = 0; i < mp.p; ++i) out.push_back({mp.mode, true});
        for (std::uint32_t i = 0; i < mp.q; ++i) out.push_back({mp.mode, false});
    }
    return out;
}

OperatorWord OperatorWord::subword(std::uint64_t mask) const {
    std::vector<ModePower> sub;
    std::uint32_t bit = 0;
    for (const auto& mp : powers_) {
        ModePower s{mp.mode, 0, 0};
        for (std::uint32_t i = 0; i < mp.p; ++i, ++bit)
            if (mask >> bit & 1U) ++s.p;
        for (std::uint32_t i = 0; i < mp.q; ++i, ++bit)
            if (mask >> bit & 1U) ++s.q;
        if (s.p || s.q) sub.push_back(s);
    }
    OperatorWord w;
    w.powers_ = std::move(sub);
    return w;
}

std::pair<OperatorWord, OperatorWord> OperatorWord::split_mode(std::uint32_t mode) const {
    OperatorWord on, off;
    for (const auto& mp : powers_) (mp.mode == mode ? on : off).powers_.push_back(mp);
    return {on, off};
}

bool OperatorWord::involves(std::uint32_t mode) const {
    return std::any_of(powers_.begin(), powers_.end(), [&](const ModePower& mp) { return mp.mode == mode; });
}

std::string OperatorWord::to_string() const {
    if (powers_.empty()) return "1";
    std::string s;
    for (const auto& l : letters()) {
        s += "a" + std::to_string(l.mode);
        if (l.dagger) s += "†";
    }
    return s;
}

OpPoly multiply(const OperatorWord& x, const OperatorWord& y) {
    // Modes on different slots commute, so the product factorizes per mode.
    std::vector<std::vector<std::pair<double, ModePower>>> choices;
    const auto& xp = x.powers();
    const auto& yp = y.powers();
    std::size_t i = 0, j = 0;
    while (i < xp.size() || j < yp.size()) {
        if (j == yp.size() || (i < xp.size() && xp[i].mode < yp[j].mode)) {
            choices.push_back({{1.0, xp[i++]}});
        } else if (i == xp.size() || yp[j].mode < xp[i].mode) {
            choices.push_back({{1.0, yp[j++]}});
        } else {
            choices.push_back(mode_product(xp[i++], yp[j++]));
        }
    }
    OpPoly out;
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
        double c = 1.0;
        std::vector<ModePower> powers;
        for (std::size_t m = 0; m < choices.size(); ++m) {
            c *= choices[m][pick[m]].first;
            powers.push_back(choices[m][pick[m]].second);
        }
        accumulate(out, OperatorWord(std::move(powers)), c);
        std::size_t m = 0;
        while (m < choices.size() && ++pick[m] == choices[m].size()) pick[m++] = 0;
        if (m == choices.size()) break;
    }
    return out;
}

OpPoly multiply(const OpPoly& x, const OpPoly& y) {
    OpPoly out;
    for (const auto& [wx, cx] : x)
        for (const auto& [wy, cy] : y)
            for (const auto& [w, c] : multiply(wx, wy)) accumulate(out, w, cx * cy * c);
    return out;
}

OpPoly normal_order(const std::vector<Ladder>& product) {
    OpPoly poly{{OperatorWord{}, 1.0}};
    for (const auto& l : product) {
        const OperatorWord w = l.dagger ? OperatorWord::create(l.mode) : OperatorWord::annihilate(l.mode);
        poly = multiply(poly, OpPoly{{w, 1.0}});
    }
    return poly;
}

OpPoly dagger(const OpPoly& x) {
    OpPoly out;
    for (const auto& [w, c] : x) accumulate(out, w.dagger(), std::conj(c));
    return out;
}

std::string to_string(const OpPoly& x) {
    if (x.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [w, c] : x) {
        if (!first) s += " + ";
        first = false;
        s += format_coef(c) + "*" + w.to_string();
    }
    return s;
}

MomentPolynomial MomentPolynomial::constant(cd c) {
    MomentPolynomial p;
    p.add({}, c);
    return p;
}

MomentPolynomial MomentPolynomial::of(const OperatorWord& w, cd coef) {
    MomentPolynomial p;
    p.add({w}, coef);
    return p;
}

MomentPolynomial MomentPolynomial::linear(const OpPoly& x) {
    MomentPolynomial p;
    for (const auto& [w, c] : x) p.add({w}, c);
    return p;
}

void MomentPolynomial::add(Monomial m, cd coef) {
    if (coef == cd(0.0)) return;
    m.erase(std::remove_if(m.begin(), m.end(), [](const OperatorWord& w) { return w.is_identity(); }), m.end());
    std::sort(m.begin(), m.end());
    auto [it, inserted] = terms_.try_emplace(std::move(m), coef);
    if (!inserted) {
        it->second += coef;
        if (std::abs(it->second) < 1e-13) terms_.erase(it);
    }
}

MomentPolynomial& MomentPolynomial::operator+=(const MomentPolynomial& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
}

MomentPolynomial MomentPolynomial::operator*(const MomentPolynomial& o) const {
    MomentPolynomial out;
    for (const auto& [m1, c1] : terms_)
        for (const auto& [m2, c2] : o.terms_) {
            Monomial m = m1;
            m.insert(m.end(), m2.begin(), m2.end());
            out.add(std::move(m), c1 * c2);
        }
    return out;
}

MomentPolynomial MomentPolynomial::scaled(cd c) const {
    MomentPolynomial out;
    for (const auto& [m, v] : terms_) out.add(m, v * c);
    return out;
}

std::uint32_t MomentPolynomial::max_word_order() const {
    std::uint32_t n = 0;
    for (const auto& [m, c] : terms_)
        for (const auto& w : m) n = std::max(n, w.order());
    return n;
}

MomentPolynomial MomentPolynomial::substitute(const std::function<MomentPolynomial(const OperatorWord&)>& sub) const {
    MomentPolynomial out;
    for (const auto& [m, c] : terms_) {
        MomentPolynomial prod = constant(c);
        for (const auto& w : m) prod = prod * sub(w);
        out += prod;
    }
    return out;
}

cd MomentPolynomial::evaluate(const std::function<cd(const OperatorWord&)>& value) const {
    cd sum{0.0};
    for (const auto& [m, c] : terms_) {
        cd prod = c;
        for (const auto& w : m) prod *= value(w);
        sum += prod;
    }
    return sum;
}

std::string MomentPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) s += " + ";
        first = false;
        s += format_coef(c);
        for (const auto& w : m) s += "*<" + w.to_string() + ">";
    }
    return s;
}

}  // namespace delayosc::moments
