#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "theta/grobner.hpp"
#include "theta/polynomial.hpp"
#include "theta/tensor.hpp"

namespace theta {

enum class TensorFormat { Full, Hosvd, TT, Custom };

TensorFormat parse_format(const std::string& text); // "full", "hosvd", "tt"
std::string to_string(TensorFormat format);

struct IdealSpec {
    Dims dims;
    TensorFormat format = TensorFormat::Full;
    /// Row-mode sets of the matricizations, used only by TensorFormat::Custom.
    std::vector<ModeSet> custom;

    [[nodiscard]] std::string key() const;
};

struct GeneratorSet {
    std::vector<Polynomial> minors;
    Polynomial frobenius_poly; // sum of squares minus one

    [[nodiscard]] std::vector<Polynomial> all() const;
};

/// Row-mode sets of the matricizations defining a format: {1},...,{d} for HOSVD,
/// {1},{1,2},...,{1..d-1} for TT, the user list for Custom. Full has none (empty result).
std::vector<ModeSet> format_matricizations(const IdealSpec& spec);

/// All order-two minors of X^S, each monic in its leading term.
std::vector<Polynomial> matricization_minors(const Dims& dims, const ModeSet& row_modes);

Polynomial frobenius_polynomial(const Dims& dims);

/// Full: the minors x_a x_b - x_{a meet b} x_{a join b} indexed by S, M in P_S and T^{S,M}.
/// TT / HOSVD / Custom: all minors of the format's matricizations, deduplicated.
GeneratorSet generators(const IdealSpec& spec);

/// Certified Gröbner basis of the full ideal for these dims (cached; first call runs Buchberger).
std::shared_ptr<const GrobnerBasis> certified_basis(const Dims& dims);

/// Standard monomials of degree <= 2k, sorted by degree and then lexicographically
/// by sorted variable ids, so the constant comes first and the variables follow in
/// vectorization order.
struct ThetaBasis {
    int k = 1;
    std::vector<Monomial> monomials;

    /// Number of basis elements of degree <= j (B_j is a prefix of this list).
    [[nodiscard]] std::size_t count_up_to(std::size_t degree) const;
    [[nodiscard]] std::size_t index_of(const Monomial& m) const; // throws if absent
    [[nodiscard]] bool contains(const Monomial& m) const { return lookup_.count(m) != 0; }

    void build_lookup();

private:
    std::unordered_map<Monomial, std::size_t, MonomialHash> lookup_;
};

ThetaBasis standard_monomials(const IdealSpec& spec, int k);

/// Sparse linear form sum_l c_l y_l over basis positions.
using LinearForm = std::vector<std::pair<std::uint32_t, Rational>>;

struct MomentEntry {
    std::uint32_t row = 0;
    std::uint32_t col = 0; // row <= col
    LinearForm form;
};

/// Combinatorial moment matrix M_{B_k}(y): rows indexed by B_k, entries linear in y over B_{2k}.
struct MomentStructure {
    std::shared_ptr<const ThetaBasis> basis;
    std::size_t dim = 0;  // |B_k|
    std::vector<MomentEntry> entries; // upper triangle, nonzero forms, sorted by (row, col)

    [[nodiscard]] std::size_t num_y() const { return basis->monomials.size(); }
    [[nodiscard]] std::size_t num_linear() const { return basis->count_up_to(1) - 1; }
    [[nodiscard]] Eigen::MatrixXd evaluate(std::span<const double> y) const;
    /// y_l = b_l(X) for every basis monomial (the moment vector of a point).
    [[nodiscard]] std::vector<double> point_moments(const DenseTensor& X) const;
};

bool operator==(const MomentStructure& a, const MomentStructure& b);

/// General construction by normal forms modulo the certified basis.
MomentStructure moment_structure(const IdealSpec& spec, int k);

/// Order-3, level-1 construction assembled family by family (M0, M_ijk, M^2 .. M^9)
/// without any polynomial reduction.
MomentStructure moment_structure_order3_fast(const Dims& dims);

/// Memoized structure per (dims, format, k); uses the order-3 fast path when it applies.
std::shared_ptr<const MomentStructure> cached_moment_structure(const IdealSpec& spec, int k);
std::shared_ptr<const GeneratorSet> cached_generators(const IdealSpec& spec);

/// Max |p(X)| over the spec's generators, including the Frobenius polynomial.
double variety_residual(const IdealSpec& spec, const DenseTensor& X);

/// Rewrites a single matricization minor as a sum of minors of the target family.
/// The sum of the returned pieces equals f exactly.
std::vector<Polynomial> decompose_minor(const Polynomial& f, const Dims& dims, TensorFormat target);

} // namespace theta
