#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "theta/tensor.hpp"

namespace theta {

/// Exact coefficients.
using Rational = mpq_class;

/// Variable id: the packed (vectorization-order) position of the tensor entry.
/// Id 0 is x_{11...1}, the greatest variable.
using Var = std::uint32_t;

/// Monomial stored as the ascending multiset of its variables, e.g. x_0^2 x_5 = {0, 0, 5}.
class Monomial {
public:
    Monomial() = default;
    explicit Monomial(std::vector<Var> vars);
    static Monomial variable(Var v) { return Monomial(std::vector<Var>{v}); }

    [[nodiscard]] std::size_t degree() const noexcept { return vars_.size(); }
    [[nodiscard]] bool is_one() const noexcept { return vars_.empty(); }
    [[nodiscard]] const std::vector<Var>& vars() const noexcept { return vars_; }
    [[nodiscard]] int exponent(Var v) const;

    [[nodiscard]] bool divides(const Monomial& other) const;
    /// this / divisor; requires divisor.divides(*this).
    [[nodiscard]] Monomial quotient(const Monomial& divisor) const;
    [[nodiscard]] Monomial lcm(const Monomial& other) const;
    [[nodiscard]] bool coprime(const Monomial& other) const;

    friend Monomial operator*(const Monomial& a, const Monomial& b);
    friend bool operator==(const Monomial&, const Monomial&) = default;

    [[nodiscard]] std::size_t hash() const noexcept;

private:
    std::vector<Var> vars_;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const noexcept { return m.hash(); }
};

/// Graded reverse lexicographic order over the variable agreement x_{1..11} > x_{1..12} > ... :
/// higher total degree wins; on ties a > b iff the rightmost nonzero entry of
/// (exponents(a) - exponents(b)) is negative.
std::strong_ordering grevlex_cmp(const Monomial& a, const Monomial& b);

/// Strict-weak "greater" predicate for descending containers.
struct GrevlexGreater {
    bool operator()(const Monomial& a, const Monomial& b) const { return grevlex_cmp(a, b) > 0; }
};

struct Term {
    Rational coef;
    Monomial mono;
};

/// Sparse polynomial with exact rational coefficients; terms strictly descending in grevlex,
/// no zero coefficients.
class Polynomial {
public:
    Polynomial() = default;
    /// Normalizes: sorts, merges duplicate monomials, drops zeros.
    static Polynomial from_terms(std::vector<Term> terms);
    static Polynomial constant(const Rational& c);
    static Polynomial monomial(const Monomial& m, const Rational& c = 1);

    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] std::size_t degree() const;

    /// LT, LM, LC; the polynomial must be nonzero.
    [[nodiscard]] const Term& leading_term() const;
    [[nodiscard]] const Monomial& leading_monomial() const { return leading_term().mono; }
    [[nodiscard]] const Rational& leading_coef() const { return leading_term().coef; }

    [[nodiscard]] Polynomial scaled(const Rational& c) const;
    [[nodiscard]] Polynomial times(const Rational& c, const Monomial& m) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a) { return a.scaled(-1); }
    friend bool operator==(const Polynomial& a, const Polynomial& b);

    /// Evaluates at a point given by values indexed by variable id.
    [[nodiscard]] double evaluate(std::span<const double> point) const;

private:
    std::vector<Term> terms_;
};

/// `c*x[a1,...,ad]*x[b1,...,bd]` terms joined by " + " / " - ", grevlex-sorted.
std::string to_string(const Polynomial& p, const Dims& dims);
std::string to_string(const Monomial& m, const Dims& dims);
/// Inverse of to_string; also accepts `x[..]^k` and omitted unit coefficients.
Polynomial parse_polynomial(std::string_view text, const Dims& dims);

/// x_alpha as a monomial.
Monomial variable(const Dims& dims, const MultiIndex& alpha);
/// x_alpha * x_beta.
Monomial product(const Dims& dims, const MultiIndex& alpha, const MultiIndex& beta);

} // namespace theta
