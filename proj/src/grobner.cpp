#include "theta/grobner.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "theta/errors.hpp"

namespace theta {

namespace {

using Worklist = std::map<Monomial, Rational, GrevlexGreater>;

void accumulate(Worklist& work, const Monomial& m, const Rational& c) {
    auto [it, inserted] = work.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) {
            work.erase(it);
        }
    }
}

void accumulate(Worklist& work, const Polynomial& p, const Rational& c, const Monomial& shift) {
    for (const auto& t : p.terms()) {
        accumulate(work, t.mono * shift, t.coef * c);
    }
}

Worklist to_worklist(const Polynomial& f) {
    Worklist work;
    for (const auto& t : f.terms()) {
        work.emplace(t.mono, t.coef);
    }
    return work;
}

} // namespace

Polynomial s_polynomial(const Polynomial& f, const Polynomial& g) {
    if (f.is_zero() || g.is_zero()) {
        throw InputError("S-polynomial of a zero polynomial");
    }
    const Monomial lcm = f.leading_monomial().lcm(g.leading_monomial());
    const Polynomial a = f.times(Rational(1) / f.leading_coef(), lcm.quotient(f.leading_monomial()));
    const Polynomial b = g.times(Rational(1) / g.leading_coef(), lcm.quotient(g.leading_monomial()));
    return a - b;
}

DivisionResult divide(const Polynomial& f, std::span<const Polynomial> divisors) {
    for (const auto& g : divisors) {
        if (g.is_zero()) {
            throw InputError("division by the zero polynomial");
        }
    }
    DivisionResult out;
    std::vector<std::vector<Term>> quotients(divisors.size());
    std::vector<Term> remainder;
    Worklist work = to_worklist(f);
    while (!work.empty()) {
        const auto lead = work.begin();
        const Monomial m = lead->first;
        const Rational c = lead->second;
        bool divided = false;
        for (std::size_t i = 0; i < divisors.size(); ++i) {
            const auto& g = divisors[i];
            if (g.leading_monomial().divides(m)) {
                Term q{c / g.leading_coef(), m.quotient(g.leading_monomial())};
                accumulate(work, g, -q.coef, q.mono);
                quotients[i].push_back(q);
                out.steps.push_back({i, std::move(q)});
                divided = true;
                break;
            }
        }
        if (!divided) {
            remainder.push_back({c, m});
            work.erase(lead);
        }
    }
    for (auto& q : quotients) {
        out.quotients.push_back(Polynomial::from_terms(std::move(q)));
    }
    out.remainder = Polynomial::from_terms(std::move(remainder));
    return out;
}

LeadIndex::LeadIndex(std::span<const Polynomial> basis) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].is_zero()) {
            throw InputError("zero polynomial in a basis");
        }
        const Monomial& lm = basis[i].leading_monomial();
        if (lm.degree() == 0) {
            if (!constant_) {
                constant_ = i;
            }
        } else if (lm.degree() <= 2) {
            small_.try_emplace(lm, i);
        } else {
            other_.emplace_back(lm, i);
        }
    }
}

std::optional<std::size_t> LeadIndex::find(const Monomial& m) const {
    std::optional<std::size_t> best = constant_;
    auto consider = [&](std::size_t i) {
        if (!best || i < *best) {
            best = i;
        }
    };
    const auto& v = m.vars();
    if (!small_.empty()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0 && v[i] == v[i - 1]) {
                continue;
            }
            if (auto it = small_.find(Monomial::variable(v[i])); it != small_.end()) {
                consider(it->second);
            }
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                if (j > i + 1 && v[j] == v[j - 1]) {
                    continue;
                }
                if (auto it = small_.find(Monomial({v[i], v[j]})); it != small_.end()) {
                    consider(it->second);
                }
            }
        }
    }
    for (const auto& [lm, i] : other_) {
        if (best && *best < i) {
            break;
        }
        if (lm.divides(m)) {
            consider(i);
            break;
        }
    }
    return best;
}

Polynomial reduce(const Polynomial& f, std::span<const Polynomial> basis, const LeadIndex& index) {
    std::vector<Term> remainder;
    Worklist work = to_worklist(f);
    while (!work.empty()) {
        const auto lead = work.begin();
        const Monomial m = lead->first;
        const Rational c = lead->second;
        if (const auto i = index.find(m)) {
            const auto& g = basis[*i];
            accumulate(work, g, -c / g.leading_coef(), m.quotient(g.leading_monomial()));
        } else {
            remainder.push_back({c, m});
            work.erase(lead);
        }
    }
    return Polynomial::from_terms(std::move(remainder));
}

BuchbergerReport buchberger_check(std::span<const Polynomial> G) {
    BuchbergerReport report;
    const LeadIndex index(G);
    for (std::size_t i = 0; i < G.size(); ++i) {
        for (std::size_t j = i + 1; j < G.size(); ++j) {
            ++report.pairs_total;
            if (G[i].leading_monomial().coprime(G[j].leading_monomial())) {
                ++report.pairs_coprime;
                continue;
            }
            ++report.pairs_reduced;
            if (!reduce(s_polynomial(G[i], G[j]), G, index).is_zero()) {
                report.passes = false;
                report.failing_pair = std::make_pair(i, j);
                return report;
            }
        }
    }
    return report;
}

bool is_reduced(std::span<const Polynomial> G) {
    for (const auto& g : G) {
        if (g.is_zero() || g.leading_coef() != 1) {
            return false;
        }
    }
    for (std::size_t i = 0; i < G.size(); ++i) {
        for (std::size_t j = 0; j < G.size(); ++j) {
            if (i == j) {
                continue;
            }
            const Monomial& lm = G[j].leading_monomial();
            for (const auto& t : G[i].terms()) {
                if (lm.divides(t.mono)) {
                    return false;
                }
            }
        }
    }
    return true;
}

void sort_by_leading_monomial(std::vector<Polynomial>& G) {
    std::stable_sort(G.begin(), G.end(), [](const Polynomial& a, const Polynomial& b) {
        return grevlex_cmp(a.leading_monomial(), b.leading_monomial()) > 0;
    });
}

GrobnerBasis GrobnerBasis::certify(std::vector<Polynomial> G) {
    for (const auto& g : G) {
        if (g.is_zero()) {
            throw InputError("zero polynomial in a basis");
        }
    }
    sort_by_leading_monomial(G);
    GrobnerBasis out;
    out.report_ = buchberger_check(G);
    if (!out.report_.passes) {
        const auto [i, j] = *out.report_.failing_pair;
        throw InvariantError("not a Groebner basis: S-polynomial of elements " + std::to_string(i) + " and " +
                             std::to_string(j) + " does not reduce to zero");
    }
    out.elements_ = std::move(G);
    out.index_ = LeadIndex(out.elements_);
    return out;
}

Polynomial GrobnerBasis::normal_form(const Polynomial& f) const {
    return reduce(f, elements_, index_);
}

} // namespace theta
