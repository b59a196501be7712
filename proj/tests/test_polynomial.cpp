#include <gtest/gtest.h>

#include "theta/errors.hpp"
#include "theta/polynomial.hpp"
#include "theta/rng.hpp"

using namespace theta;

namespace {

Monomial random_monomial(Rng& rng, int max_degree, Var nvars) {
    std::vector<Var> vars(rng.next_u64() % static_cast<std::uint64_t>(max_degree + 1));
    for (auto& v : vars) {
        v = static_cast<Var>(rng.next_u64() % nvars);
    }
    return Monomial(std::move(vars));
}

// Exponent-vector definition, independent of the multiset shortcut in grevlex_cmp.
int reference_grevlex(const Monomial& a, const Monomial& b, Var nvars) {
    if (a.degree() != b.degree()) {
        return a.degree() > b.degree() ? 1 : -1;
    }
    for (Var v = nvars; v-- > 0;) {
        const int diff = a.exponent(v) - b.exponent(v);
        if (diff != 0) {
            return diff < 0 ? 1 : -1;
        }
    }
    return 0;
}

} // namespace

TEST(Grevlex, SquareOfFirstVariableWins) {
    const Dims dims{2, 2, 2};
    const auto x111 = variable(dims, {1, 1, 1});
    const auto x112 = variable(dims, {1, 1, 2});
    EXPECT_TRUE(grevlex_cmp(x111 * x111, x111 * x112) > 0);
    EXPECT_TRUE(grevlex_cmp(x111, x112) > 0);
    EXPECT_TRUE(grevlex_cmp(x111, x111 * x112) < 0);
}

TEST(Grevlex, MinorLeadsWithIncomparablePair) {
    const Dims dims{3, 3, 3, 3};
    const auto a = MultiIndex::from_digits("1212");
    const auto b = MultiIndex::from_digits("2123");
    auto [lo, hi] = meet_join(a, b);
    EXPECT_TRUE(grevlex_cmp(product(dims, a, b), product(dims, lo, hi)) > 0);

    const Dims m{3, 3};
    // x_il x_kj leads x_ij x_kl for i<k, j<l
    for (int i = 1; i <= 3; ++i) {
        for (int k = i + 1; k <= 3; ++k) {
            for (int j = 1; j <= 3; ++j) {
                for (int l = j + 1; l <= 3; ++l) {
                    EXPECT_TRUE(grevlex_cmp(product(m, {i, l}, {k, j}), product(m, {i, j}, {k, l})) > 0);
                }
            }
        }
    }
}

TEST(Grevlex, AgreesWithExponentDefinition) {
    Rng rng(1);
    constexpr Var nvars = 6;
    for (int trial = 0; trial < 3000; ++trial) {
        const auto a = random_monomial(rng, 4, nvars);
        const auto b = random_monomial(rng, 4, nvars);
        const auto got = grevlex_cmp(a, b);
        const int want = reference_grevlex(a, b, nvars);
        EXPECT_EQ(got > 0, want > 0);
        EXPECT_EQ(got == 0, want == 0);
    }
}

TEST(Grevlex, TotalMultiplicativeGraded) {
    Rng rng(2);
    constexpr Var nvars = 8;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_monomial(rng, 3, nvars);
        const auto b = random_monomial(rng, 3, nvars);
        const auto c = random_monomial(rng, 3, nvars);
        const auto ab = grevlex_cmp(a, b);
        EXPECT_EQ(ab == 0, a == b);
        EXPECT_TRUE(grevlex_cmp(b, a) == (0 <=> ab));
        EXPECT_TRUE(grevlex_cmp(a * c, b * c) == ab);
        if (a.degree() > b.degree()) {
            EXPECT_TRUE(ab > 0);
        }
        if (ab > 0 && grevlex_cmp(b, c) > 0) {
            EXPECT_TRUE(grevlex_cmp(a, c) > 0);
        }
    }
}

TEST(Monomial, DivisibilityAndLcm) {
    const Monomial a({0, 0, 3});
    const Monomial b({0, 3});
    EXPECT_TRUE(b.divides(a));
    EXPECT_FALSE(a.divides(b));
    EXPECT_EQ(a.quotient(b), Monomial({0}));
    EXPECT_EQ(a.lcm(Monomial({3, 3, 5})), Monomial({0, 0, 3, 3, 5}));
    EXPECT_TRUE(a.coprime(Monomial({1, 2})));
    EXPECT_FALSE(a.coprime(Monomial({3})));
    EXPECT_EQ(a.exponent(0), 2);
    EXPECT_THROW((void)b.quotient(a), InvariantError);
}

TEST(Polynomial, NormalizationAndArithmetic) {
    const Monomial x({0}), y({1});
    const auto p = Polynomial::from_terms({{1, y}, {2, x}, {-1, y}, {Rational(1, 2), Monomial()}});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.leading_monomial(), x);
    EXPECT_EQ(p.leading_coef(), 2);
    EXPECT_TRUE((p - p).is_zero());
    const auto sq = p * p;
    EXPECT_EQ(sq.size(), 3u);
    EXPECT_EQ(sq.leading_coef(), 4);
    EXPECT_EQ(sq.terms().back().coef, Rational(1, 4));
    EXPECT_THROW((void)Polynomial().leading_term(), InputError);
    const std::vector<double> point{2.0, 5.0};
    EXPECT_DOUBLE_EQ(sq.evaluate(point), 4.5 * 4.5);
}

TEST(Polynomial, TermsStaySorted) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Term> a, b;
        for (int i = 0; i < 6; ++i) {
            a.push_back({static_cast<long>(rng.next_u64() % 7) - 3, random_monomial(rng, 3, 5)});
            b.push_back({static_cast<long>(rng.next_u64() % 7) - 3, random_monomial(rng, 3, 5)});
        }
        const auto p = Polynomial::from_terms(a);
        const auto q = Polynomial::from_terms(b);
        for (const auto& r : {p + q, p - q, p * q}) {
            for (std::size_t i = 1; i < r.size(); ++i) {
                EXPECT_TRUE(grevlex_cmp(r.terms()[i - 1].mono, r.terms()[i].mono) > 0);
            }
            for (const auto& t : r.terms()) {
                EXPECT_NE(t.coef, 0);
            }
        }
        EXPECT_EQ((p + q) - q, p);
    }
}

TEST(PolynomialText, PrintFormat) {
    const Dims dims{2, 2};
    const auto f = Polynomial::from_terms({{1, product(dims, {1, 2}, {2, 1})}, {-1, product(dims, {1, 1}, {2, 2})}});
    EXPECT_EQ(to_string(f, dims), "1*x[1,2]*x[2,1] - 1*x[1,1]*x[2,2]");
    EXPECT_EQ(to_string(Polynomial(), dims), "0");
    const auto g = Polynomial::from_terms({{Rational(-3, 2), product(dims, {1, 1}, {1, 1})}, {7, Monomial()}});
    EXPECT_EQ(to_string(g, dims), "-3/2*x[1,1]*x[1,1] + 7");
}

TEST(PolynomialText, RoundTrip) {
    const Dims dims{2, 3, 2};
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Term> terms;
        for (int i = 0; i < 5; ++i) {
            terms.push_back({Rational(static_cast<long>(rng.next_u64() % 11) - 5, 1 + rng.next_u64() % 4),
                             random_monomial(rng, 3, static_cast<Var>(dims.numel()))});
        }
        const auto p = Polynomial::from_terms(terms);
        EXPECT_EQ(parse_polynomial(to_string(p, dims), dims), p);
    }
}

TEST(PolynomialText, ParserExtrasAndErrors) {
    const Dims dims{2, 2};
    const auto p = parse_polynomial("x[1,1]^2 - 1", dims);
    EXPECT_EQ(p, Polynomial::from_terms({{1, product(dims, {1, 1}, {1, 1})}, {-1, Monomial()}}));
    EXPECT_TRUE(parse_polynomial("0", dims).is_zero());
    EXPECT_THROW(parse_polynomial("1*x[3,1]", dims), InputError);
    EXPECT_THROW(parse_polynomial("1*x[1,1] 2", dims), InputError);
    EXPECT_THROW(parse_polynomial("", dims), InputError);
    EXPECT_THROW(parse_polynomial("1/0", dims), InputError);
}
