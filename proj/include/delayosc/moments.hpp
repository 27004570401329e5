#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "delayosc/cascade.hpp"
#include "delayosc/timeseries.hpp"

namespace delayosc::moments {

using cd = std::complex<double>;

struct Ladder {
    std::uint32_t mode;
    bool dagger;
};

/// a_mode^dag^p a_mode^q
struct ModePower {
    std::uint32_t mode;
    std::uint32_t p;
    std::uint32_t q;
    auto operator<=>(const ModePower&) const = default;
};

/// Normal-ordered product over modes in ascending index. The empty word is
/// the identity.
class OperatorWord {
public:
    OperatorWord() = default;
    /// Powers may come in any order; zero powers are dropped, repeated modes rejected.
    explicit OperatorWord(std::vector<ModePower> powers);

    static OperatorWord annihilate(std::uint32_t mode) { return OperatorWord({{mode, 0, 1}}); }
    static OperatorWord create(std::uint32_t mode) { return OperatorWord({{mode, 1, 0}}); }

    const std::vector<ModePower>& powers() const { return powers_; }
    std::uint32_t order() const;
    bool is_identity() const { return powers_.empty(); }
    /// Daggers minus bares.
    int imbalance() const;
    OperatorWord dagger() const;
    /// The individual ladder operators, left to right.
    std::vector<Ladder> letters() const;
    /// Sub-word made of the letters selected by `mask` (bit i = letter i).
    OperatorWord subword(std::uint64_t mask) const;
    /// Splits off the factors acting on one mode.
    std::pair<OperatorWord, OperatorWord> split_mode(std::uint32_t mode) const;
    bool involves(std::uint32_t mode) const;

    std::string to_string() const;

    auto operator<=>(const OperatorWord&) const = default;

private:
    std::vector<ModePower> powers_;
};

using OpPoly = std::map<OperatorWord, cd>;

OpPoly normal_order(const std::vector<Ladder>& product);
OpPoly multiply(const OperatorWord& x, const OperatorWord& y);
OpPoly multiply(const OpPoly& x, const OpPoly& y);
OpPoly dagger(const OpPoly& x);
std::string to_string(const OpPoly& x);

/// Sorted multiset of non-identity words: one product of expectation values.
using Monomial = std::vector<OperatorWord>;

/// Sum of coefficient * product of <word> terms.
class MomentPolynomial {
public:
    MomentPolynomial() = default;
    static MomentPolynomial constant(cd c);
    /// <w>, with <1> folded into the constant term.
    static MomentPolynomial of(const OperatorWord& w, cd coef = 1.0);
    static MomentPolynomial linear(const OpPoly& x);

    void add(Monomial m, cd coef);
    MomentPolynomial& operator+=(const MomentPolynomial& o);
    MomentPolynomial operator*(const MomentPolynomial& o) const;
    MomentPolynomial scaled(cd c) const;

    const std::map<Monomial, cd>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::uint32_t max_word_order() const;
    /// Replaces each word by `sub(word)`.
    MomentPolynomial substitute(const std::function<MomentPolynomial(const OperatorWord&)>& sub) const;
    cd evaluate(const std::function<cd(const OperatorWord&)>& value) const;
    std::string to_string() const;

    bool operator==(const MomentPolynomial&) const = default;

private:
    std::map<Monomial, cd> terms_;
};

/// <X_1...X_n> with every joint cumulant above order k set to zero, written
/// in moments of order <= k. Words of order <= k come back unchanged.
MomentPolynomial cumulant_expand(const OperatorWord& word, std::uint32_t k);

/// Memoizing form for repeated use at a fixed k.
class CumulantExpander {
public:
    explicit CumulantExpander(std::uint32_t k);
    std::uint32_t k() const { return k_; }
    const MomentPolynomial& expand(const OperatorWord& word);

private:
    std::uint32_t k_;
    std::map<OperatorWord, MomentPolynomial> cache_;
};

/// coef * A rho B^dag with symbolic A, B.
struct SymbolicTerm {
    cd coef;
    OpPoly A;
    OpPoly B;
};

/// Same generator as cascade::build_interval_liouvillian, in symbols.
std::vector<SymbolicTerm> symbolic_generator(const cascade::CascadeParams& p, std::size_t m);

/// L^dag(O) = sum coef B^dag O A, normal ordered.
OpPoly adjoint_action(const std::vector<SymbolicTerm>& generator, const OperatorWord& word);

/// d<word>/dt before closure.
MomentPolynomial adjoint_derivative(const cascade::CascadeParams& p, std::size_t m, const OperatorWord& word);

/// Canonical member of {w, w^dag}; `conjugated` tells whether w is the dagger of it.
struct Representative {
    OperatorWord word;
    bool conjugated;
};
Representative representative(const OperatorWord& w);

class MomentSystem {
public:
    std::size_t interval() const { return m_; }
    std::uint32_t order() const { return k_; }
    const std::vector<OperatorWord>& keys() const { return keys_; }
    const std::vector<MomentPolynomial>& rhs() const { return rhs_; }
    std::size_t size() const { return keys_.size(); }
    std::size_t monomial_count() const;

    bool tracks(const OperatorWord& w) const;
    /// Index of the representative of w, or npos.
    std::size_t index_of(const OperatorWord& w) const;
    /// <w> from the state vector, conjugating as needed; <1> = 1.
    cd value(const OperatorWord& w, const std::vector<cd>& state) const;

    /// dstate/dt
    void derivative(const std::vector<cd>& state, std::vector<cd>& out) const;

    /// One line per equation: "d<word>/dt = ...".
    std::string listing() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    friend MomentSystem generate_moment_system(const cascade::CascadeParams&, std::size_t, std::uint32_t, std::size_t);
    void compile();

    struct Factor {
        std::uint32_t index;
        bool conj;
    };
    struct Term {
        cd coef;
        std::uint32_t begin, end;  // into factors_
    };

    std::size_t m_ = 0;
    std::uint32_t k_ = 1;
    std::vector<OperatorWord> keys_;
    std::map<OperatorWord, std::size_t> index_;
    std::vector<MomentPolynomial> rhs_;
    std::vector<std::uint32_t> row_begin_;
    std::vector<Term> terms_;
    std::vector<Factor> factors_;
};

inline constexpr std::size_t kDefaultWordBudget = 20000;

/// Seeds <a_j> for every age (plus <a_0^dag a_0> and <a_0 a_0> when k >= 2),
/// closes at order k and iterates until no new word appears.
/// Throws ClosureDiverged past `word_budget` tracked moments.
MomentSystem generate_moment_system(const cascade::CascadeParams& p, std::size_t m, std::uint32_t k,
                                    std::size_t word_budget = kDefaultWordBudget);

/// <a^dag^p a^q> of the single-mode initial state.
using SingleModeMoments = std::function<cd(std::uint32_t p, std::uint32_t q)>;
SingleModeMoments coherent_moments(cd alpha);
/// Read off a (truncated) density matrix.
SingleModeMoments state_moments(const fock::Mat& rho);

struct MomentOptions {
    std::size_t m_max = 0;
    std::uint32_t k = 1;
    double dt = 1e-2;
    std::size_t word_budget = kDefaultWordBudget;
};

struct MomentRun {
    TimeSeries series;
    std::vector<std::size_t> equation_counts;  // per interval
    MomentSystem last_system;
    std::vector<cd> final_state;
};

/// Piecewise RK4 over [0, (m_max+1) tau]. At each boundary persisting
/// moments carry over, words touching the fresh copy factorize against its
/// initial moments, and anything else untracked is rebuilt by cumulant
/// expansion of the previous state.
MomentRun integrate_moment_system(const cascade::CascadeParams& p, const SingleModeMoments& initial,
                                  const MomentOptions& opt);

}  // namespace delayosc::moments
