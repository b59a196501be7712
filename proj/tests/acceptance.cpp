// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "theta/grobner.hpp"
#include "theta/ideal.hpp"
#include "theta/recovery.hpp"
#include "theta/rng.hpp"
#include "theta/theta_norm.hpp"

using namespace theta;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) {
                detail << "failed: ";
            }
            detail << what << "; ";
            pass = false;
        }
    }
};

IdealSpec full(const Dims& dims) {
    return IdealSpec{dims, TensorFormat::Full, {}};
}

Polynomial hibi_minor(const Dims& dims, const MultiIndex& a, const MultiIndex& b) {
    const auto [lo, hi] = meet_join(a, b);
    Polynomial f = Polynomial::from_terms({{1, product(dims, a, b)}, {-1, product(dims, lo, hi)}});
    return f.scaled(Rational(1) / f.leading_coef());
}

Monomial mono(const Dims& dims, std::initializer_list<const char*> digits) {
    std::vector<Var> vars;
    for (const char* d : digits) {
        vars.push_back(static_cast<Var>(pack(dims, MultiIndex::from_digits(d))));
    }
    std::sort(vars.begin(), vars.end());
    return Monomial(vars);
}

DenseTensor gaussian_tensor(const Dims& dims, std::uint64_t seed) {
    Rng rng(seed);
    DenseTensor X(dims);
    for (auto& v : X.values()) {
        v = rng.normal();
    }
    return X;
}

// 1. Buchberger certification of the full generating sets.
Verdict criterion1() {
    Verdict v;
    const auto start = Clock::now();
    for (const Dims& dims : {Dims{2, 2}, Dims{2, 3}, Dims{3, 3}, Dims{2, 2, 2}, Dims{2, 2, 3}, Dims{2, 2, 2, 2}}) {
        std::vector<Polynomial> G = generators(full(dims)).all();
        sort_by_leading_monomial(G);
        const auto report = buchberger_check(G);
        v.require(report.passes, "Buchberger criterion at " + dims.to_string());
        v.require(is_reduced(G), "reducedness at " + dims.to_string());
        v.detail << dims.to_string() << ": " << G.size() << " polys, " << report.pairs_reduced << " S-pairs reduced; ";
    }
    const double secs = since(start);
    v.require(secs < 60.0, "runtime over 60 s");
    v.detail << std::fixed << std::setprecision(2) << secs << " s";
    return v;
}

// 2. The order-four worked S-polynomial.
Verdict criterion2() {
    Verdict v;
    const Dims dims{3, 3, 3, 3};
    auto d = [](const char* s) { return MultiIndex::from_digits(s); };
    const Polynomial f1 = hibi_minor(dims, d("1212"), d("2123"));
    const Polynomial f2 = hibi_minor(dims, d("3311"), d("2123"));
    const Polynomial s = s_polynomial(f1, f2);
    const Polynomial expected = Polynomial::from_terms(
        {{-1, mono(dims, {"1112", "2223", "3311"})}, {1, mono(dims, {"1212", "2111", "3323"})}});
    v.require(s == expected, "S-polynomial is " + to_string(s, dims));
    const auto G = generators(full(dims)).all();
    const auto division = divide(s, G);
    v.require(division.remainder.is_zero(), "remainder " + to_string(division.remainder, dims));
    v.detail << "S = " << to_string(s, dims) << "; remainder 0 after " << division.steps.size()
             << " division steps over " << G.size() << " generators";
    return v;
}

// 3. TT and HOSVD ideals equal the full ideal.
Verdict criterion3() {
    Verdict v;
    for (const Dims& dims : {Dims{2, 2, 2}, Dims{2, 2, 2, 2}}) {
        const auto basis = certified_basis(dims);
        std::size_t reduced = 0, expanded = 0;
        for (auto format : {TensorFormat::TT, TensorFormat::Hosvd}) {
            const auto family = generators(IdealSpec{dims, format, {}}).minors;
            std::set<std::string> names;
            for (const auto& g : family) {
                v.require(basis->normal_form(g).is_zero(), to_string(format) + " generator outside the full ideal");
                names.insert(to_string(g, dims));
                ++reduced;
            }
            for (const auto& f : generators(full(dims)).minors) {
                const auto pieces = decompose_minor(f, dims, format);
                Polynomial sum;
                for (const auto& p : pieces) {
                    v.require(names.count(to_string(p.scaled(Rational(1) / p.leading_coef()), dims)) == 1,
                              "piece outside the " + to_string(format) + " family");
                    sum = sum + p;
                }
                v.require(sum == f, "re-expansion differs for " + to_string(f, dims));
                ++expanded;
            }
        }
        v.detail << dims.to_string() << ": " << reduced << " reductions, " << expanded << " re-expansions; ";
    }
    return v;
}

// 4. Moment structures.
Verdict criterion4() {
    Verdict v;
    const auto ms = moment_structure(full(Dims{2, 2}), 1);
    // Basis order: 1, x11, x12, x21, x22, then y1..y8 at positions 5..12.
    auto y = [](int i) { return static_cast<std::uint32_t>(i == 0 ? 0 : 4 + i); };
    using F = LinearForm;
    const std::map<std::pair<std::uint32_t, std::uint32_t>, F> want{
        {{0, 0}, F{{y(0), 1}}},
        {{0, 1}, F{{1, 1}}},
        {{0, 2}, F{{2, 1}}},
        {{0, 3}, F{{3, 1}}},
        {{0, 4}, F{{4, 1}}},
        {{1, 1}, F{{y(0), 1}, {y(4), -1}, {y(6), -1}, {y(8), -1}}},
        {{1, 2}, F{{y(1), 1}}},
        {{1, 3}, F{{y(2), 1}}},
        {{1, 4}, F{{y(3), 1}}},
        {{2, 2}, F{{y(4), 1}}},
        {{2, 3}, F{{y(3), 1}}},
        {{2, 4}, F{{y(5), 1}}},
        {{3, 3}, F{{y(6), 1}}},
        {{3, 4}, F{{y(7), 1}}},
        {{4, 4}, F{{y(8), 1}}},
    };
    v.require(ms.dim == 5 && ms.num_y() == 13, "2x2 sizes");
    v.require(ms.entries.size() == want.size(), "2x2 entry count");
    for (const auto& e : ms.entries) {
        const auto it = want.find({e.row, e.col});
        v.require(it != want.end() && it->second == e.form,
                  "2x2 entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
    }
    v.detail << "2x2 matrix matches entry-for-entry; ";
    for (const Dims& dims : {Dims{2, 2, 2}, Dims{2, 2, 3}, Dims{2, 3, 2}, Dims{3, 2, 2}, Dims{3, 3, 3}, Dims{2, 3, 4}}) {
        const bool same = moment_structure(full(dims), 1) == moment_structure_order3_fast(dims);
        v.require(same, "fast path differs at " + dims.to_string());
        v.detail << dims.to_string() << (same ? " equal; " : " DIFFERENT; ");
    }
    return v;
}

// 5. Matrix exactness.
Verdict criterion5() {
    Verdict v;
    const auto start = Clock::now();
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
        Rng rng(derive_seed(5, static_cast<std::uint64_t>(i)));
        const int m = 2 + static_cast<int>(rng.next_u64() % 4);
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        DenseTensor X(Dims{m, n});
        for (auto& x : X.values()) {
            x = rng.normal();
        }
        const Eigen::MatrixXd M = matricize(X, {1}).matrix;
        const double nuclear = oracle::gram_nuclear(M);
        try {
            const double theta = theta_norm(X, full(X.dims()), 1).value;
            const double err = std::abs(theta - nuclear) / (1.0 + nuclear);
            worst = std::max(worst, err);
            v.require(err <= 1e-5, "instance " + std::to_string(i) + " (" + X.dims().to_string() + ")");
        } catch (const std::exception& e) {
            v.require(false, std::string("solver: ") + e.what());
        }
    }
    const double secs = since(start);
    v.require(secs < 300.0, "runtime over 5 min");
    v.detail << "25 matrices, worst |theta1 - nuclear| / (1 + nuclear) = " << std::scientific << std::setprecision(2)
             << worst << ", " << std::fixed << secs << " s";
    return v;
}

// 6. The five 2x2x2 reference tensors.
Verdict criterion6() {
    Verdict v;
    const Dims dims{2, 2, 2};
    struct Case {
        std::vector<MultiIndex> ones;
        double theta;
        std::array<double, 3> unfoldings;
    };
    const double r2 = std::sqrt(2.0);
    const std::vector<Case> cases = {
        {{{1, 1, 1}, {2, 2, 2}}, 2.0, {2.0, 2.0, 2.0}},
        {{{1, 1, 1}, {2, 2, 1}}, 2.0, {2.0, 2.0, r2}},
        {{{1, 1, 1}, {2, 1, 2}}, 2.0, {2.0, r2, 2.0}},
        {{{1, 1, 1}, {1, 2, 2}}, 2.0, {r2, 2.0, 2.0}},
        {{{1, 1, 1}, {2, 2, 1}, {1, 2, 2}}, 3.0, {r2 + 1, r2 + 1, r2 + 1}},
    };
    int index = 0;
    for (const auto& c : cases) {
        ++index;
        DenseTensor X(dims);
        for (const auto& a : c.ones) {
            X.at(a) = 1.0;
        }
        try {
            const double theta = theta_norm(X, full(dims), 1).value;
            v.require(std::abs(theta - c.theta) <= 1e-4, "theta1 of tensor " + std::to_string(index));
            v.detail << "T" << index << ": theta1 " << std::setprecision(8) << theta << ", unfoldings";
        } catch (const std::exception& e) {
            v.require(false, std::string("solver: ") + e.what());
        }
        for (int mode = 1; mode <= 3; ++mode) {
            const double nuc = svd_nuclear(matricize(X, {mode}).matrix);
            v.require(std::abs(nuc - c.unfoldings[static_cast<std::size_t>(mode - 1)]) <= 1e-8,
                      "unfolding " + std::to_string(mode) + " of tensor " + std::to_string(index));
            v.detail << ' ' << std::setprecision(6) << nuc;
        }
        v.detail << "; ";
    }
    return v;
}

// 7. Norm properties on seeded instances.
Verdict criterion7() {
    Verdict v;
    const auto start = Clock::now();
    const double tol = 1e-5;
    std::map<std::string, int> checks;
    auto check = [&](bool ok, const std::string& name, const std::string& where) {
        ++checks[name];
        v.require(ok, name + " at " + where);
    };
    for (const Dims& dims : {Dims{2, 2, 2}, Dims{2, 2, 3}}) {
        const IdealSpec spec = full(dims);
        for (std::uint64_t i = 0; i < 20; ++i) {
            const std::string where = dims.to_string() + " #" + std::to_string(i);
            try {
                const DenseTensor X = gaussian_tensor(dims, derive_seed(7, i, 1));
                const DenseTensor Y = gaussian_tensor(dims, derive_seed(7, i, 2));
                const double tx = theta_norm(X, spec, 1).value;
                const double ty = theta_norm(Y, spec, 1).value;
                Rng rng(derive_seed(7, i, 3));
                const double c = 4.0 * rng.uniform() - 2.0;
                const double tcx = theta_norm(c * X, spec, 1).value;
                check(std::abs(tcx - std::abs(c) * tx) <= tol * std::abs(c) * tx, "homogeneity", where);
                const double txy = theta_norm(X + Y, spec, 1).value;
                check(txy <= (tx + ty) * (1 + tol), "triangle", where);
                check(frobenius(X) <= tx * (1 + tol), "frobenius-lower", where);

                // Explicit decomposition with unit factors: theta1 <= sum |c_i|.
                DenseTensor Z(dims);
                double weight = 0.0;
                for (std::uint64_t term = 0; term < 3; ++term) {
                    const double ci = rng.normal();
                    Z += ci * random_unit_rank_one(dims, derive_seed(7, i, 10 + term));
                    weight += std::abs(ci);
                }
                check(theta_norm(Z, spec, 1).value <= weight * (1 + tol), "decomposition-upper", where);

                const double t2 = theta_norm(X, spec, 2).value;
                check(tx <= t2 * (1 + tol), "nested", where);

                for (auto format : {TensorFormat::TT, TensorFormat::Hosvd}) {
                    const double tf = theta_norm(X, IdealSpec{dims, format, {}}, 1).value;
                    check(std::abs(tf - tx) <= tol * tx, "format-" + to_string(format), where);
                }
            } catch (const std::exception& e) {
                v.require(false, where + ": " + e.what());
            }
        }
    }
    for (const auto& [name, count] : checks) {
        v.detail << name << " x" << count << "; ";
    }
    v.detail << std::fixed << std::setprecision(1) << since(start) << " s";
    return v;
}

// 8. Recovery phase behavior.
Verdict criterion8() {
    Verdict v;
    const auto start = Clock::now();
    struct Case {
        Dims dims;
        int rank;
        int m0;
        int m1;
    };
    const std::vector<Case> cases = {{Dims{2, 2, 3}, 1, 4, 12}, {Dims{3, 3, 3}, 1, 6, 19}, {Dims{4, 4, 4}, 2, 26, 56}};
    const int slack = 2;
    for (const auto& c : cases) {
        ExperimentConfig cfg;
        cfg.dims = c.dims;
        cfg.rank = c.rank;
        cfg.trials = 50;
        cfg.seed = 1;
        cfg.solver = recovery_settings();
        const int N = static_cast<int>(c.dims.numel());
        std::set<int> ms;
        for (int m = std::max(1, c.m0 - slack); m <= c.m0 + slack; ++m) {
            ms.insert(m);
        }
        for (int m = c.m1 - slack; m <= c.m1 + slack; ++m) {
            ms.insert(m);
        }
        ms.insert(N);
        cfg.m_values.assign(ms.begin(), ms.end());
        const RecoveryStats stats = run_experiment(cfg);
        std::map<int, double> rate;
        for (const auto& r : stats.records) {
            rate[r.m] = r.success_rate;
        }
        const std::string name = c.dims.to_string() + " r" + std::to_string(c.rank);
        std::optional<int> lo, hi;
        for (int m = std::max(1, c.m0 - slack); m <= c.m0 + slack; ++m) {
            if (rate[m] == 0.0) {
                lo = m;
            }
        }
        for (int m = c.m1 + slack; m >= c.m1 - slack; --m) {
            if (rate[m] == 1.0) {
                hi = m;
            }
        }
        v.require(lo.has_value(), name + ": no m within m0 +- 2 with zero successes");
        v.require(hi.has_value(), name + ": no m within m1 +- 2 with full success");
        v.require(rate[N] == 1.0, name + ": full measurement did not recover every instance");
        // Monotone in m up to two binomial standard errors.
        for (auto a = rate.begin(); a != rate.end(); ++a) {
            for (auto b = std::next(a); b != rate.end(); ++b) {
                const double se = std::sqrt((a->second * (1 - a->second) + b->second * (1 - b->second)) / cfg.trials);
                v.require(b->second >= a->second - 2 * se - 1e-12,
                          name + ": rate drops from m=" + std::to_string(a->first) + " to m=" + std::to_string(b->first));
            }
        }
        v.detail << name << " m0 " << (lo ? std::to_string(*lo) : "none") << " (ref " << c.m0 << "), m1 "
                 << (hi ? std::to_string(*hi) : "none") << " (ref " << c.m1 << "), rates";
        for (const auto& [m, r] : rate) {
            v.detail << ' ' << m << ':' << r;
        }
        v.detail << "; ";
    }
    const double secs = since(start);
    v.require(secs < 45 * 60.0, "runtime over 45 min");
    v.detail << std::fixed << std::setprecision(1) << secs << " s";
    return v;
}

// 9. Variety points give PSD moment matrices.
Verdict criterion9() {
    Verdict v;
    const std::vector<Dims> all = {Dims{2, 2, 2}, Dims{2, 2, 3}, Dims{3, 3, 3}, Dims{2, 2, 2, 2}};
    double worst_residual = 0.0, worst_eig = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const Dims& dims = all[i % all.size()];
        const IdealSpec spec = full(dims);
        const DenseTensor X = random_unit_rank_one(dims, derive_seed(9, i));
        const double residual = variety_residual(spec, X);
        const auto ms = cached_moment_structure(spec, 1);
        const Eigen::MatrixXd M = ms->evaluate(ms->point_moments(X));
        const double eig = oracle::jacobi_eigenvalues(M).front();
        worst_residual = std::max(worst_residual, residual);
        worst_eig = std::min(worst_eig, eig);
        v.require(residual < 1e-12, "variety residual at instance " + std::to_string(i));
        v.require(eig >= -1e-10, "negative eigenvalue at instance " + std::to_string(i));
    }
    v.detail << "100 tensors over 2x2x2, 2x2x3, 3x3x3, 2x2x2x2; max residual " << std::scientific
             << std::setprecision(2) << worst_residual << ", min eigenvalue " << worst_eig;
    return v;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Groebner certification", criterion1}, {"worked S-polynomial", criterion2},
        {"ideal equality across formats", criterion3}, {"moment structure", criterion4},
        {"matrix exactness", criterion5}, {"2x2x2 reference tensors", criterion6},
        {"norm properties", criterion7}, {"recovery phase behavior", criterion8},
        {"variety points and PSD moments", criterion9},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i + 1);
        if (!selected.empty() && selected.count(number) == 0) {
            continue;
        }
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        failures += v.pass ? 0 : 1;
        std::cout << "criterion " << number << " [" << criteria[i].first << "]: " << (v.pass ? "PASS" : "FAIL")
                  << " -- " << v.detail.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
