#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "theta/polynomial.hpp"

namespace theta {

/// (lcm/LT(f))*f - (lcm/LT(g))*g.
Polynomial s_polynomial(const Polynomial& f, const Polynomial& g);

/// One elimination step of the division algorithm: the leading term of the running
/// dividend was cancelled by `quotient_term * G[divisor]`.
struct DivisionStep {
    std::size_t divisor = 0;
    Term quotient_term;
};

struct DivisionResult {
    std::vector<Polynomial> quotients; // one per divisor
    Polynomial remainder;
    std::vector<DivisionStep> steps;
};

/// Multivariate division; divisors are tried in sequence order.
DivisionResult divide(const Polynomial& f, std::span<const Polynomial> divisors);

/// Finds, for a monomial, the first divisor (in sequence order) whose leading monomial divides it.
/// Quadratic and linear leading monomials are looked up by hashing sub-multisets.
class LeadIndex {
public:
    LeadIndex() = default;
    explicit LeadIndex(std::span<const Polynomial> basis);
    [[nodiscard]] std::optional<std::size_t> find(const Monomial& m) const;

private:
    std::unordered_map<Monomial, std::size_t, MonomialHash> small_;
    std::vector<std::pair<Monomial, std::size_t>> other_;
    std::optional<std::size_t> constant_;
};

/// Full reduction of f by `basis` (every term, not only the leading one).
Polynomial reduce(const Polynomial& f, std::span<const Polynomial> basis, const LeadIndex& index);

struct BuchbergerReport {
    bool passes = true;
    std::optional<std::pair<std::size_t, std::size_t>> failing_pair;
    std::size_t pairs_total = 0;
    std::size_t pairs_coprime = 0; // skipped: relatively prime leading monomials
    std::size_t pairs_reduced = 0;
};

/// Buchberger's criterion: every S-polynomial of a non-coprime pair reduces to 0.
/// Indices in the report refer to positions in G as given.
BuchbergerReport buchberger_check(std::span<const Polynomial> G);

/// Monic, and no term of any g_i is divisible by the leading monomial of another element.
bool is_reduced(std::span<const Polynomial> G);

/// A generating set that passed buchberger_check, stored sorted descending by leading monomial.
class GrobnerBasis {
public:
    /// Runs the check; throws InvariantError with the failing pair if G is not a Gröbner basis.
    static GrobnerBasis certify(std::vector<Polynomial> G);

    [[nodiscard]] const std::vector<Polynomial>& elements() const noexcept { return elements_; }
    [[nodiscard]] const BuchbergerReport& report() const noexcept { return report_; }
    [[nodiscard]] Polynomial normal_form(const Polynomial& f) const;
    [[nodiscard]] bool contains(const Polynomial& f) const { return normal_form(f).is_zero(); }
    /// Is m a standard monomial (divisible by no leading monomial)?
    [[nodiscard]] bool is_standard(const Monomial& m) const { return !index_.find(m).has_value(); }

private:
    GrobnerBasis() = default;
    std::vector<Polynomial> elements_;
    LeadIndex index_;
    BuchbergerReport report_;
};

/// Sorts descending by leading monomial (the storage order used by GrobnerBasis).
void sort_by_leading_monomial(std::vector<Polynomial>& G);

} // namespace theta
