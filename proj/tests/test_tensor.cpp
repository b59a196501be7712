#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "theta/errors.hpp"
#include "theta/rng.hpp"
#include "theta/tensor.hpp"

using namespace theta;

namespace {

DenseTensor from_entries(const Dims& dims, std::initializer_list<MultiIndex> ones) {
    DenseTensor t(dims);
    for (const auto& idx : ones) {
        t.at(idx) = 1.0;
    }
    return t;
}

} // namespace

TEST(MeetJoin, Examples) {
    auto [lo, hi] = meet_join(MultiIndex::from_digits("1212"), MultiIndex::from_digits("2123"));
    EXPECT_EQ(lo, MultiIndex::from_digits("1112"));
    EXPECT_EQ(hi, MultiIndex::from_digits("2223"));

    auto [lo2, hi2] = meet_join(MultiIndex{1, 2}, MultiIndex{2, 1});
    EXPECT_EQ(lo2, (MultiIndex{1, 1}));
    EXPECT_EQ(hi2, (MultiIndex{2, 2}));

    const MultiIndex a{3, 1, 2};
    auto [lo3, hi3] = meet_join(a, a);
    EXPECT_EQ(lo3, a);
    EXPECT_EQ(hi3, a);

    EXPECT_THROW(meet_join(MultiIndex{1, 2}, MultiIndex{1, 2, 3}), InputError);
}

TEST(Dims, ParseAndValidate) {
    EXPECT_EQ(Dims::parse("2,2,3"), (Dims{2, 2, 3}));
    EXPECT_EQ(Dims::parse("2x2x3").numel(), 12u);
    EXPECT_THROW(Dims({4}), InputError);
    EXPECT_THROW(Dims({2, 0}), InputError);
    EXPECT_THROW(Dims::parse("2,,3"), InputError);
}

TEST(Pack, LastIndexFastest) {
    const Dims dims{2, 3, 4};
    // f(i,j,k) = (i-1) n2 n3 + (j-1) n3 + k, 1-based
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 3; ++j) {
            for (int k = 1; k <= 4; ++k) {
                const std::size_t expected = static_cast<std::size_t>((i - 1) * 12 + (j - 1) * 4 + k - 1);
                EXPECT_EQ(pack(dims, MultiIndex{i, j, k}), expected);
                EXPECT_EQ(unpack(dims, expected), (MultiIndex{i, j, k}));
            }
        }
    }
    EXPECT_THROW(pack(dims, MultiIndex{3, 1, 1}), InputError);
}

TEST(Matricize, SingleEntryPlacement) {
    const Dims dims{2, 2, 2};
    const auto t = from_entries(dims, {MultiIndex{2, 1, 2}});
    const auto m = matricize(t, {2});
    ASSERT_EQ(m.matrix.rows(), 2);
    ASSERT_EQ(m.matrix.cols(), 4);
    // Brute-force bijection: row = j, column packs (i, k) last-fastest.
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            for (int k = 1; k <= 2; ++k) {
                EXPECT_EQ(m.matrix(j - 1, (i - 1) * 2 + (k - 1)), t.at(MultiIndex{i, j, k}));
            }
        }
    }
    EXPECT_EQ(m.matrix(0, 3), 1.0);
    EXPECT_EQ(m.matrix.sum(), 1.0);
}

TEST(Matricize, RejectsBadModes) {
    const DenseTensor t(Dims{2, 2, 2});
    EXPECT_THROW(matricize(t, {}), InputError);
    EXPECT_THROW(matricize(t, {4}), InputError);
    EXPECT_THROW(matricize(t, {1, 1}), InputError);
}

TEST(Matricize, RankOneOuterProduct) {
    const std::vector<double> u{1.0, -2.0}, v{0.5, 3.0, 1.0}, w{2.0, -1.0};
    const auto t = outer_product({u, v, w});
    const auto m = matricize(t, {1});
    const auto sv = singular_values(m.matrix);
    EXPECT_GT(sv(0), 1.0);
    EXPECT_LT(sv(1), 1e-12);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) {
            EXPECT_DOUBLE_EQ(m.matrix(r, c), u[static_cast<std::size_t>(r)] * v[static_cast<std::size_t>(c / 2)] *
                                                 w[static_cast<std::size_t>(c % 2)]);
        }
    }
}

TEST(Matricize, TransposeOfThirdUnfoldingIsPrefixMatricization) {
    const auto t = random_low_rank(Dims{2, 3, 4}, 2, 11);
    const auto a = matricize(t, {3}).matrix;
    const auto b = matricize(t, {1, 2}).matrix;
    EXPECT_EQ((Eigen::MatrixXd(a.transpose()) - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Matricize, FrobeniusPreserved) {
    const auto t = random_low_rank(Dims{2, 3, 2, 2}, 3, 5);
    const double f = frobenius(t);
    for (ModeSet s : {ModeSet{1}, ModeSet{2}, ModeSet{4}, ModeSet{1, 3}, ModeSet{2, 4}, ModeSet{3, 1, 2}}) {
        EXPECT_NEAR(matricize(t, s).matrix.norm(), f, 1e-12 * f);
    }
}

TEST(Table2, UnfoldingNuclearNorms) {
    const Dims dims{2, 2, 2};
    const double r2 = std::sqrt(2.0);
    struct Row {
        DenseTensor t;
        double n1, n2, n3;
    };
    const std::vector<Row> rows{
        {from_entries(dims, {MultiIndex{1, 1, 1}, MultiIndex{2, 2, 2}}), 2, 2, 2},
        {from_entries(dims, {MultiIndex{1, 1, 1}, MultiIndex{2, 2, 1}}), 2, 2, r2},
        {from_entries(dims, {MultiIndex{1, 1, 1}, MultiIndex{2, 1, 2}}), 2, r2, 2},
        {from_entries(dims, {MultiIndex{1, 1, 1}, MultiIndex{1, 2, 2}}), r2, 2, 2},
        {from_entries(dims, {MultiIndex{1, 1, 1}, MultiIndex{2, 2, 1}, MultiIndex{1, 2, 2}}), r2 + 1, r2 + 1, r2 + 1},
    };
    for (const auto& row : rows) {
        EXPECT_NEAR(svd_nuclear(matricize(row.t, {1}).matrix), row.n1, 1e-10);
        EXPECT_NEAR(svd_nuclear(matricize(row.t, {2}).matrix), row.n2, 1e-10);
        EXPECT_NEAR(svd_nuclear(matricize(row.t, {3}).matrix), row.n3, 1e-10);
    }
    EXPECT_NEAR(frobenius(rows[0].t), r2, 1e-15);
}

TEST(SvdNuclear, IdentityAndNonFinite) {
    EXPECT_NEAR(svd_nuclear(Eigen::MatrixXd::Identity(2, 2)), 2.0, 1e-14);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 1) = std::nan("");
    EXPECT_THROW(svd_nuclear(bad), InputError);
}

TEST(SvdNuclear, MatchesJacobiGramOracle) {
    Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd m(4, 5);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = rng.normal();
        }
        const double expected = oracle::gram_nuclear(m);
        EXPECT_NEAR(svd_nuclear(m), expected, 1e-10 * expected);
    }
}

TEST(Frobenius, Basics) {
    EXPECT_EQ(frobenius(DenseTensor(Dims{2, 3})), 0.0);
    const std::vector<double> u{3.0, 4.0}, v{1.0, 0.0, 0.0}, w{0.6, 0.8};
    EXPECT_NEAR(frobenius(outer_product({u, v, w})), 5.0, 1e-14);
}

TEST(RandomLowRank, DeterministicAndRankOne) {
    const Dims dims{3, 2, 4};
    const auto a = random_low_rank(dims, 1, 99);
    const auto b = random_low_rank(dims, 1, 99);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(random_low_rank(dims, 1, 100).values(), a.values());
    for (ModeSet s : {ModeSet{1}, ModeSet{2}, ModeSet{3}}) {
        const auto sv = singular_values(matricize(a, s).matrix);
        EXPECT_LT(sv(1), 1e-12 * sv(0));
    }
}

TEST(RandomLowRank, GenericRankTwo) {
    const Dims dims{3, 3, 4};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t = random_low_rank(dims, 2, seed);
        for (ModeSet s : {ModeSet{1}, ModeSet{2}, ModeSet{3}, ModeSet{1, 2}}) {
            const auto sv = singular_values(matricize(t, s).matrix);
            EXPECT_GT(sv(1), 1e-8 * sv(0));
            if (sv.size() > 2) {
                EXPECT_LT(sv(2), 1e-10 * sv(0));
            }
        }
    }
    EXPECT_THROW(random_low_rank(dims, 0, 1), InputError);
}

TEST(RandomUnitRankOne, UnitNorm) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        EXPECT_NEAR(frobenius(random_unit_rank_one(Dims{2, 3, 2}, seed)), 1.0, 1e-14);
    }
}

TEST(TensorJson, RoundTripAndRejects) {
    const auto t = random_low_rank(Dims{2, 2, 3}, 1, 3);
    const auto back = tensor_from_json(tensor_to_json(t));
    EXPECT_EQ(back.dims(), t.dims());
    EXPECT_EQ(back.values(), t.values());
    EXPECT_THROW(tensor_from_json(nlohmann::json{{"dims", {2, 2}}, {"values", {1.0, 2.0}}}), InputError);
    EXPECT_THROW(tensor_from_json(nlohmann::json{{"dims", {2, 2}}}), InputError);
}

TEST(Rng, SeedDerivationIsStable) {
    EXPECT_EQ(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
    EXPECT_NE(derive_seed(7, 3, 1), derive_seed(7, 1, 3));
    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.normal(), b.normal());
    }
}
