#include "theta/ideal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>

#include "theta/errors.hpp"

namespace theta {

TensorFormat parse_format(const std::string& text) {
    std::string lower;
    for (char ch : text) {
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    if (lower == "full") {
        return TensorFormat::Full;
    }
    if (lower == "hosvd" || lower == "tucker") {
        return TensorFormat::Hosvd;
    }
    if (lower == "tt") {
        return TensorFormat::TT;
    }
    if (lower == "custom") {
        return TensorFormat::Custom;
    }
    throw InputError("unknown tensor format '" + text + "' (expected full, hosvd or tt)");
}

std::string to_string(TensorFormat format) {
    switch (format) {
    case TensorFormat::Full:
        return "full";
    case TensorFormat::Hosvd:
        return "hosvd";
    case TensorFormat::TT:
        return "tt";
    case TensorFormat::Custom:
        return "custom";
    }
    return "?";
}

std::string IdealSpec::key() const {
    std::string out = dims.to_string() + "/" + to_string(format);
    if (format == TensorFormat::Custom) {
        for (const auto& s : custom) {
            out += "/";
            for (int m : s) {
                out += std::to_string(m) + ",";
            }
        }
    }
    return out;
}

std::vector<Polynomial> GeneratorSet::all() const {
    std::vector<Polynomial> out = minors;
    out.push_back(frobenius_poly);
    return out;
}

namespace {

using ModeMask = std::uint32_t;

ModeMask mask_of(const ModeSet& modes) {
    ModeMask m = 0;
    for (int mode : modes) {
        m |= ModeMask{1} << (mode - 1);
    }
    return m;
}

void validate_modes(const Dims& dims, const ModeSet& modes) {
    const int d = static_cast<int>(dims.order());
    if (modes.empty()) {
        throw InputError("matricization with no row modes");
    }
    std::set<int> seen;
    for (int mode : modes) {
        if (mode < 1 || mode > d) {
            throw InputError("matricization mode " + std::to_string(mode) + " out of range");
        }
        if (!seen.insert(mode).second) {
            throw InputError("matricization mode " + std::to_string(mode) + " repeated");
        }
    }
    if (static_cast<int>(modes.size()) == d) {
        throw InputError("matricization must use a proper subset of the modes");
    }
}

// Custom mode lists are accepted only when they contain (up to complement) every
// single-mode unfolding or every prefix matricization, i.e. when their minor ideal
// is known to equal the full ideal.
void validate_custom(const Dims& dims, const std::vector<ModeSet>& sets) {
    if (sets.empty()) {
        throw InputError("custom format needs at least one matricization");
    }
    const int d = static_cast<int>(dims.order());
    const ModeMask all = (ModeMask{1} << d) - 1;
    std::set<ModeMask> have;
    for (const auto& s : sets) {
        validate_modes(dims, s);
        const ModeMask m = mask_of(s);
        have.insert(std::min(m, all ^ m));
    }
    auto covers = [&](const std::vector<ModeMask>& needed) {
        return std::all_of(needed.begin(), needed.end(),
                           [&](ModeMask m) { return have.count(std::min(m, all ^ m)) != 0; });
    };
    std::vector<ModeMask> singles, prefixes;
    for (int i = 0; i < d; ++i) {
        singles.push_back(ModeMask{1} << i);
    }
    for (int k = 1; k < d; ++k) {
        prefixes.push_back((ModeMask{1} << k) - 1);
    }
    if (!covers(singles) && !covers(prefixes)) {
        throw InputError("custom matricization list must include every single-mode unfolding or every "
                         "prefix matricization (up to complement)");
    }
}

Var var_of(const Dims& dims, const MultiIndex& a) {
    return static_cast<Var>(pack(dims, a));
}

Polynomial binomial(const Monomial& lead, const Monomial& trail) {
    return Polynomial::from_terms({{1, lead}, {-1, trail}});
}

// Monic version: leading coefficient +1.
Polynomial monic(const Polynomial& p) {
    return p.scaled(Rational(1) / p.leading_coef());
}

std::string binomial_key(const Polynomial& p) {
    std::string key;
    for (const auto& t : p.terms()) {
        for (Var v : t.mono.vars()) {
            key += std::to_string(v) + ".";
        }
        key += "|";
    }
    return key;
}

// Swap the coordinates listed in `mask` between a and b.
std::pair<MultiIndex, MultiIndex> swap_modes(const MultiIndex& a, const MultiIndex& b, ModeMask mask) {
    MultiIndex x = a, y = b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask & (ModeMask{1} << i)) {
            std::swap(x[i], y[i]);
        }
    }
    return {x, y};
}

} // namespace

std::vector<ModeSet> format_matricizations(const IdealSpec& spec) {
    const int d = static_cast<int>(spec.dims.order());
    std::vector<ModeSet> out;
    switch (spec.format) {
    case TensorFormat::Full:
        break;
    case TensorFormat::Hosvd:
        for (int i = 1; i <= d; ++i) {
            out.push_back({i});
        }
        break;
    case TensorFormat::TT:
        for (int k = 1; k < d; ++k) {
            ModeSet s;
            for (int i = 1; i <= k; ++i) {
                s.push_back(i);
            }
            out.push_back(s);
        }
        break;
    case TensorFormat::Custom:
        validate_custom(spec.dims, spec.custom);
        out = spec.custom;
        break;
    }
    return out;
}

std::vector<Polynomial> matricization_minors(const Dims& dims, const ModeSet& row_modes) {
    validate_modes(dims, row_modes);
    const ModeMask mask = mask_of(row_modes);
    std::vector<Polynomial> out;
    std::set<std::string> seen;
    // A minor is fixed by two entries a, b that differ in some row mode and in some
    // column mode; its other diagonal swaps the row-mode coordinates.
    for (std::size_t pa = 0; pa < dims.numel(); ++pa) {
        const MultiIndex a = unpack(dims, pa);
        for (std::size_t pb = pa + 1; pb < dims.numel(); ++pb) {
            const MultiIndex b = unpack(dims, pb);
            bool row_differs = false, col_differs = false;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i] != b[i]) {
                    ((mask >> i) & 1U ? row_differs : col_differs) = true;
                }
            }
            if (!row_differs || !col_differs) {
                continue;
            }
            const auto [c, e] = swap_modes(a, b, mask);
            const Monomial m1({var_of(dims, a), var_of(dims, b)});
            const Monomial m2({var_of(dims, c), var_of(dims, e)});
            Polynomial p = monic(Polynomial::from_terms({{1, m1}, {-1, m2}}));
            if (seen.insert(binomial_key(p)).second) {
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

Polynomial frobenius_polynomial(const Dims& dims) {
    std::vector<Term> terms;
    for (std::size_t v = 0; v < dims.numel(); ++v) {
        terms.push_back({1, Monomial({static_cast<Var>(v), static_cast<Var>(v)})});
    }
    terms.push_back({-1, Monomial()});
    return Polynomial::from_terms(std::move(terms));
}

namespace {

std::vector<Polynomial> full_minors(const Dims& dims) {
    const int d = static_cast<int>(dims.order());
    if (d > 20) {
        throw InputError("tensor order too large");
    }
    std::vector<Polynomial> out;
    for (ModeMask S = 1; S < (ModeMask{1} << d); ++S) {
        const int size = std::popcount(S);
        if (size < 2) {
            continue;
        }
        const int e_s = std::countr_zero(S); // min S, 0-based
        for (ModeMask M = S; M != 0; M = (M - 1) & S) {
            const int msize = std::popcount(M);
            const bool allowed = 2 * msize < size || (2 * msize == size && ((M >> e_s) & 1U));
            if (!allowed) {
                continue;
            }
            // Enumerate (alpha, beta): equal off S, alpha > beta on M, alpha < beta on S \ M.
            std::function<void(int, MultiIndex&, MultiIndex&)> rec = [&](int i, MultiIndex& a, MultiIndex& b) {
                if (i == d) {
                    auto [meet, join] = meet_join(a, b);
                    out.push_back(binomial(product(dims, a, b), product(dims, meet, join)));
                    return;
                }
                const int n = dims.extent(static_cast<std::size_t>(i + 1));
                const auto ui = static_cast<std::size_t>(i);
                if (!((S >> i) & 1U)) {
                    for (int v = 1; v <= n; ++v) {
                        a[ui] = b[ui] = v;
                        rec(i + 1, a, b);
                    }
                    return;
                }
                const bool greater = (M >> i) & 1U;
                for (int u = 1; u <= n; ++u) {
                    for (int v = u + 1; v <= n; ++v) {
                        a[ui] = greater ? v : u;
                        b[ui] = greater ? u : v;
                        rec(i + 1, a, b);
                    }
                }
            };
            MultiIndex a(std::vector<int>(static_cast<std::size_t>(d), 1));
            MultiIndex b = a;
            rec(0, a, b);
        }
    }
    return out;
}

} // namespace

GeneratorSet generators(const IdealSpec& spec) {
    GeneratorSet out;
    out.frobenius_poly = frobenius_polynomial(spec.dims);
    if (spec.format == TensorFormat::Full) {
        out.minors = full_minors(spec.dims);
        return out;
    }
    std::set<std::string> seen;
    for (const auto& modes : format_matricizations(spec)) {
        for (auto& p : matricization_minors(spec.dims, modes)) {
            if (seen.insert(binomial_key(p)).second) {
                out.minors.push_back(std::move(p));
            }
        }
    }
    return out;
}

namespace {

template <class T>
class MemoCache {
public:
    std::shared_ptr<const T> get(const std::string& key, const std::function<T()>& build) {
        {
            std::shared_lock lock(mutex_);
            if (auto it = items_.find(key); it != items_.end()) {
                return it->second;
            }
        }
        auto value = std::make_shared<const T>(build());
        std::unique_lock lock(mutex_);
        return items_.try_emplace(key, std::move(value)).first->second;
    }

private:
    std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const T>> items_;
};

MemoCache<GrobnerBasis>& basis_cache() {
    static MemoCache<GrobnerBasis> cache;
    return cache;
}
MemoCache<GeneratorSet>& generator_cache() {
    static MemoCache<GeneratorSet> cache;
    return cache;
}
MemoCache<MomentStructure>& moment_cache() {
    static MemoCache<MomentStructure> cache;
    return cache;
}

} // namespace

std::shared_ptr<const GeneratorSet> cached_generators(const IdealSpec& spec) {
    return generator_cache().get(spec.key(), [&] { return generators(spec); });
}

std::shared_ptr<const GrobnerBasis> certified_basis(const Dims& dims) {
    return basis_cache().get(dims.to_string(), [&] {
        return GrobnerBasis::certify(generators(IdealSpec{dims, TensorFormat::Full, {}}).all());
    });
}

std::size_t ThetaBasis::count_up_to(std::size_t degree) const {
    return static_cast<std::size_t>(
        std::partition_point(monomials.begin(), monomials.end(),
                             [&](const Monomial& m) { return m.degree() <= degree; }) -
        monomials.begin());
}

std::size_t ThetaBasis::index_of(const Monomial& m) const {
    auto it = lookup_.find(m);
    if (it == lookup_.end()) {
        throw InvariantError("monomial outside the theta basis");
    }
    return it->second;
}

void ThetaBasis::build_lookup() {
    std::sort(monomials.begin(), monomials.end(), [](const Monomial& a, const Monomial& b) {
        if (a.degree() != b.degree()) {
            return a.degree() < b.degree();
        }
        return a.vars() < b.vars();
    });
    lookup_.clear();
    for (std::size_t i = 0; i < monomials.size(); ++i) {
        lookup_.emplace(monomials[i], i);
    }
}

ThetaBasis standard_monomials(const IdealSpec& spec, int k) {
    if (k < 1) {
        throw InputError("theta level k must be at least 1");
    }
    // The theta basis depends only on the ideal, which is the same for every format.
    if (spec.format == TensorFormat::Custom) {
        validate_custom(spec.dims, spec.custom);
    }
    const auto basis = certified_basis(spec.dims);
    const auto nvars = static_cast<Var>(spec.dims.numel());
    const std::size_t max_degree = 2 * static_cast<std::size_t>(k);
    ThetaBasis out;
    out.k = k;
    out.monomials.push_back(Monomial());
    std::vector<Var> vars;
    std::function<void(Var)> extend = [&](Var start) {
        if (vars.size() == max_degree) {
            return;
        }
        for (Var v = start; v < nvars; ++v) {
            vars.push_back(v);
            Monomial m(vars);
            // Divisibility is inherited by multiples, so a non-standard prefix is pruned.
            if (basis->is_standard(m)) {
                out.monomials.push_back(std::move(m));
                extend(v);
            }
            vars.pop_back();
        }
    };
    extend(0);
    out.build_lookup();
    return out;
}

Eigen::MatrixXd MomentStructure::evaluate(std::span<const double> y) const {
    if (y.size() != num_y()) {
        throw InputError("moment vector has the wrong length");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& e : entries) {
        double value = 0.0;
        for (const auto& [l, c] : e.form) {
            value += c.get_d() * y[l];
        }
        out(e.row, e.col) = value;
        out(e.col, e.row) = value;
    }
    return out;
}

std::vector<double> MomentStructure::point_moments(const DenseTensor& X) const {
    if (X.values().size() + 1 != basis->count_up_to(1)) {
        throw InputError("tensor size does not match the moment structure");
    }
    std::vector<double> y;
    y.reserve(num_y());
    for (const auto& m : basis->monomials) {
        double value = 1.0;
        for (Var v : m.vars()) {
            value *= X.values()[v];
        }
        y.push_back(value);
    }
    return y;
}

bool operator==(const MomentStructure& a, const MomentStructure& b) {
    if (a.dim != b.dim || a.entries.size() != b.entries.size() || a.basis->monomials != b.basis->monomials) {
        return false;
    }
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const auto& x = a.entries[i];
        const auto& y = b.entries[i];
        if (x.row != y.row || x.col != y.col || x.form != y.form) {
            return false;
        }
    }
    return true;
}

namespace {

using FormAccumulator = std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<std::uint32_t, Rational>>;

std::vector<MomentEntry> finish_entries(const FormAccumulator& acc) {
    std::vector<MomentEntry> out;
    for (const auto& [pos, form] : acc) {
        MomentEntry e{pos.first, pos.second, {}};
        for (const auto& [l, c] : form) {
            if (c != 0) {
                e.form.emplace_back(l, c);
            }
        }
        if (!e.form.empty()) {
            out.push_back(std::move(e));
        }
    }
    return out;
}

} // namespace

MomentStructure moment_structure(const IdealSpec& spec, int k) {
    auto basis = std::make_shared<ThetaBasis>(standard_monomials(spec, k));
    const auto grobner = certified_basis(spec.dims);
    MomentStructure out;
    out.dim = basis->count_up_to(static_cast<std::size_t>(k));
    FormAccumulator acc;
    for (std::uint32_t i = 0; i < out.dim; ++i) {
        for (std::uint32_t j = i; j < out.dim; ++j) {
            const auto nf =
                grobner->normal_form(Polynomial::monomial(basis->monomials[i] * basis->monomials[j]));
            auto& form = acc[{i, j}];
            for (const auto& t : nf.terms()) {
                if (!basis->contains(t.mono)) {
                    throw InvariantError("reduced product escapes the span of the theta basis");
                }
                form[static_cast<std::uint32_t>(basis->index_of(t.mono))] += t.coef;
            }
        }
    }
    out.entries = finish_entries(acc);
    out.basis = std::move(basis);
    return out;
}

MomentStructure moment_structure_order3_fast(const Dims& dims) {
    if (dims.order() != 3) {
        throw InputError("the explicit moment structure requires an order-3 tensor");
    }
    const int n1 = dims.extent(1), n2 = dims.extent(2), n3 = dims.extent(3);
    // Basis: 1, the variables, and the comparable pairs except x_111^2.
    auto basis = std::make_shared<ThetaBasis>();
    basis->k = 1;
    basis->monomials.push_back(Monomial());
    const auto nvars = static_cast<Var>(dims.numel());
    for (Var v = 0; v < nvars; ++v) {
        basis->monomials.push_back(Monomial::variable(v));
    }
    for (Var a = 0; a < nvars; ++a) {
        const MultiIndex ia = unpack(dims, a);
        for (Var b = a; b < nvars; ++b) {
            if ((a == 0 && b == 0) || !ia.precedes(unpack(dims, b))) {
                continue;
            }
            basis->monomials.push_back(Monomial({a, b}));
        }
    }
    basis->build_lookup();

    // f(i,j,k) as a 0-based matrix position: constant row is 0, x_ijk sits at 1 + pack.
    auto f = [&](int i, int j, int k) {
        return static_cast<std::uint32_t>(1 + ((i - 1) * n2 + (j - 1)) * n3 + (k - 1));
    };
    auto y = [&](int i, int j, int k, int i2, int j2, int k2) {
        return static_cast<std::uint32_t>(basis->index_of(Monomial({f(i, j, k) - 1, f(i2, j2, k2) - 1})));
    };
    FormAccumulator acc;
    auto put = [&](std::uint32_t r, std::uint32_t c, std::uint32_t l, const Rational& value) {
        acc[{std::min(r, c), std::max(r, c)}][l] += value;
    };

    // M0: t at (1,1) and (2,2)
    put(0, 0, 0, 1);
    put(1, 1, 0, 1);
    for (int i = 1; i <= n1; ++i) {
        for (int j = 1; j <= n2; ++j) {
            for (int k = 1; k <= n3; ++k) {
                // M_ijk
                put(0, f(i, j, k), f(i, j, k), 1);
                // M^2: squares other than x_111^2
                if (i != 1 || j != 1 || k != 1) {
                    const auto l = y(i, j, k, i, j, k);
                    put(1, 1, l, -1);
                    put(f(i, j, k), f(i, j, k), l, 1);
                }
            }
        }
    }
    for (int i = 1; i <= n1; ++i) {
        for (int i2 = i; i2 <= n1; ++i2) {
            for (int j = 1; j <= n2; ++j) {
                for (int j2 = j; j2 <= n2; ++j2) {
                    for (int k = 1; k <= n3; ++k) {
                        for (int k2 = k; k2 <= n3; ++k2) {
                            const int changed = (i != i2) + (j != j2) + (k != k2);
                            if (changed == 0) {
                                continue;
                            }
                            const auto l = y(i, j, k, i2, j2, k2);
                            if (changed == 1) {
                                // M^7, M^8, M^9
                                put(f(i, j, k), f(i2, j2, k2), l, 1);
                            } else if (changed == 2 && i == i2) {
                                // M^3
                                put(f(i, j, k), f(i, j2, k2), l, 1);
                                put(f(i, j, k2), f(i, j2, k), l, 1);
                            } else if (changed == 2 && j == j2) {
                                // M^5
                                put(f(i, j, k), f(i2, j, k2), l, 1);
                                put(f(i, j, k2), f(i2, j, k), l, 1);
                            } else if (changed == 2) {
                                // M^6
                                put(f(i, j, k), f(i2, j2, k), l, 1);
                                put(f(i, j2, k), f(i2, j, k), l, 1);
                            } else {
                                // M^4
                                put(f(i, j, k), f(i2, j2, k2), l, 1);
                                put(f(i, j2, k), f(i2, j, k2), l, 1);
                                put(f(i, j2, k2), f(i2, j, k), l, 1);
                                put(f(i, j, k2), f(i2, j2, k), l, 1);
                            }
                        }
                    }
                }
            }
        }
    }
    MomentStructure out;
    out.dim = 1 + dims.numel();
    out.entries = finish_entries(acc);
    out.basis = std::move(basis);
    return out;
}

std::shared_ptr<const MomentStructure> cached_moment_structure(const IdealSpec& spec, int k) {
    if (spec.format == TensorFormat::Custom) {
        validate_custom(spec.dims, spec.custom);
    }
    // All formats share the same ideal, hence the same structure.
    const std::string key = spec.dims.to_string() + "/k" + std::to_string(k);
    return moment_cache().get(key, [&] {
        if (spec.dims.order() == 3 && k == 1) {
            return moment_structure_order3_fast(spec.dims);
        }
        return moment_structure(IdealSpec{spec.dims, TensorFormat::Full, {}}, k);
    });
}

double variety_residual(const IdealSpec& spec, const DenseTensor& X) {
    if (!(X.dims() == spec.dims)) {
        throw InputError("tensor dims do not match the ideal");
    }
    const auto gens = cached_generators(spec);
    double worst = std::abs(gens->frobenius_poly.evaluate(X.values()));
    for (const auto& p : gens->minors) {
        worst = std::max(worst, std::abs(p.evaluate(X.values())));
    }
    return worst;
}

std::vector<Polynomial> decompose_minor(const Polynomial& f, const Dims& dims, TensorFormat target) {
    if (target != TensorFormat::TT && target != TensorFormat::Hosvd) {
        throw InputError("decomposition target must be TT or HOSVD");
    }
    if (f.size() != 2 || f.terms()[0].mono.degree() != 2 || f.terms()[1].mono.degree() != 2 ||
        f.terms()[0].coef != -f.terms()[1].coef) {
        throw InputError("not a two-term matricization minor");
    }
    const Rational c = f.terms()[0].coef;
    const auto& lead = f.terms()[0].mono.vars();
    const auto& trail = f.terms()[1].mono.vars();
    const MultiIndex p = unpack(dims, lead[0]);
    const MultiIndex q = unpack(dims, lead[1]);
    const int d = static_cast<int>(dims.order());

    // Find the swapped modes tau with {p^tau, q^tau} = trailing pair.
    ModeMask differ = 0;
    for (int i = 0; i < d; ++i) {
        if (p[static_cast<std::size_t>(i)] != q[static_cast<std::size_t>(i)]) {
            differ |= ModeMask{1} << i;
        }
    }
    auto pair_monomial = [&](const MultiIndex& a, const MultiIndex& b) {
        return Monomial({var_of(dims, a), var_of(dims, b)});
    };
    std::optional<ModeMask> tau;
    for (ModeMask t = differ; t != 0; t = (t - 1) & differ) {
        if (t == differ) {
            continue;
        }
        const auto [a, b] = swap_modes(p, q, t);
        if (pair_monomial(a, b).vars() == trail) {
            tau = t;
            break;
        }
    }
    if (!tau) {
        throw InputError("not a matricization minor: the trailing term is not a swap of the leading term");
    }

    const ModeMask all = (ModeMask{1} << d) - 1;
    auto in_target = [&](ModeMask t) {
        const ModeMask a = t & differ;
        const ModeMask b = differ & ~t;
        for (ModeMask s : {a, b}) {
            if (target == TensorFormat::Hosvd && std::popcount(s) == 1) {
                return true;
            }
            if (target == TensorFormat::TT) {
                for (int k = 1; k < d; ++k) {
                    if (s == (differ & ((ModeMask{1} << k) - 1))) {
                        return true;
                    }
                }
            }
        }
        return false;
    };
    if (in_target(*tau)) {
        return {f};
    }

    std::vector<Polynomial> pieces;
    MultiIndex a = p, b = q;
    auto step = [&](ModeMask swap) {
        auto [a2, b2] = swap_modes(a, b, swap);
        const Monomial from = pair_monomial(a, b);
        const Monomial to = pair_monomial(a2, b2);
        if (!(from == to)) {
            pieces.push_back(Polynomial::from_terms({{c, from}, {-c, to}}));
        }
        a = std::move(a2);
        b = std::move(b2);
    };
    for (int i = 0; i < d; ++i) {
        if (!((*tau >> i) & 1U)) {
            continue;
        }
        if (target == TensorFormat::Hosvd) {
            step(ModeMask{1} << i);
        } else if (i == d - 1) {
            // Swapping the last mode is the same as swapping every other mode.
            step(all >> 1);
        } else {
            step((ModeMask{2} << i) - 1); // prefix 1..i+1
            if (i > 0) {
                step((ModeMask{1} << i) - 1); // prefix 1..i
            }
        }
    }
    Polynomial sum;
    for (const auto& g : pieces) {
        sum = sum + g;
    }
    if (!(sum == f)) {
        throw InvariantError("minor decomposition does not re-expand to the input");
    }
    return pieces;
}

} // namespace theta
