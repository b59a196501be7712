#include "theta/polynomial.hpp"

#include <algorithm>
#include <cctype>

#include "theta/errors.hpp"

namespace theta {

Monomial::Monomial(std::vector<Var> vars) : vars_(std::move(vars)) {
    std::sort(vars_.begin(), vars_.end());
}

int Monomial::exponent(Var v) const {
    const auto [lo, hi] = std::equal_range(vars_.begin(), vars_.end(), v);
    return static_cast<int>(hi - lo);
}

bool Monomial::divides(const Monomial& other) const {
    return std::includes(other.vars_.begin(), other.vars_.end(), vars_.begin(), vars_.end());
}

Monomial Monomial::quotient(const Monomial& divisor) const {
    if (divisor.vars_.size() > vars_.size()) {
        throw InvariantError("monomial quotient by a non-divisor");
    }
    Monomial out;
    out.vars_.reserve(vars_.size() - divisor.vars_.size());
    std::set_difference(vars_.begin(), vars_.end(), divisor.vars_.begin(), divisor.vars_.end(),
                        std::back_inserter(out.vars_));
    if (out.vars_.size() + divisor.vars_.size() != vars_.size()) {
        throw InvariantError("monomial quotient by a non-divisor");
    }
    return out;
}

Monomial Monomial::lcm(const Monomial& other) const {
    Monomial out;
    std::set_union(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(), std::back_inserter(out.vars_));
    return out;
}

bool Monomial::coprime(const Monomial& other) const {
    auto a = vars_.begin();
    auto b = other.vars_.begin();
    while (a != vars_.end() && b != other.vars_.end()) {
        if (*a == *b) {
            return false;
        }
        if (*a < *b) {
            ++a;
        } else {
            ++b;
        }
    }
    return true;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.vars_.reserve(a.vars_.size() + b.vars_.size());
    std::merge(a.vars_.begin(), a.vars_.end(), b.vars_.begin(), b.vars_.end(), std::back_inserter(out.vars_));
    return out;
}

std::size_t Monomial::hash() const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Var v : vars_) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::strong_ordering grevlex_cmp(const Monomial& a, const Monomial& b) {
    const auto& va = a.vars();
    const auto& vb = b.vars();
    if (va.size() != vb.size()) {
        return va.size() <=> vb.size();
    }
    // Scan both multisets from their largest variable down. At the first position
    // where they differ, the monomial holding the larger variable id has the larger
    // exponent at the rightmost differing variable, so it is the smaller one.
    for (std::size_t i = va.size(); i-- > 0;) {
        if (va[i] != vb[i]) {
            return va[i] > vb[i] ? std::strong_ordering::less : std::strong_ordering::greater;
        }
    }
    return std::strong_ordering::equal;
}

Polynomial Polynomial::from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& x, const Term& y) { return grevlex_cmp(x.mono, y.mono) > 0; });
    Polynomial out;
    for (auto& t : terms) {
        t.coef.canonicalize();
        if (!out.terms_.empty() && out.terms_.back().mono == t.mono) {
            out.terms_.back().coef += t.coef;
        } else {
            if (!out.terms_.empty() && out.terms_.back().coef == 0) {
                out.terms_.pop_back();
            }
            out.terms_.push_back(std::move(t));
        }
    }
    if (!out.terms_.empty() && out.terms_.back().coef == 0) {
        out.terms_.pop_back();
    }
    return out;
}

Polynomial Polynomial::constant(const Rational& c) {
    return monomial(Monomial(), c);
}

Polynomial Polynomial::monomial(const Monomial& m, const Rational& c) {
    Polynomial out;
    if (c != 0) {
        out.terms_.push_back({c, m});
        out.terms_.back().coef.canonicalize();
    }
    return out;
}

std::size_t Polynomial::degree() const {
    return terms_.empty() ? 0 : terms_.front().mono.degree();
}

const Term& Polynomial::leading_term() const {
    if (terms_.empty()) {
        throw InputError("leading term of the zero polynomial");
    }
    return terms_.front();
}

Polynomial Polynomial::scaled(const Rational& c) const {
    if (c == 0) {
        return {};
    }
    Polynomial out = *this;
    for (auto& t : out.terms_) {
        t.coef *= c;
    }
    return out;
}

Polynomial Polynomial::times(const Rational& c, const Monomial& m) const {
    if (c == 0) {
        return {};
    }
    Polynomial out;
    out.terms_.reserve(terms_.size());
    // grevlex is multiplicative, so the order is preserved.
    for (const auto& t : terms_) {
        out.terms_.push_back({t.coef * c, t.mono * m});
    }
    return out;
}

namespace {

Polynomial merge(const Polynomial& a, const Polynomial& b, const Rational& sign) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    while (ia != a.terms().end() || ib != b.terms().end()) {
        if (ib == b.terms().end()) {
            out.push_back(*ia++);
            continue;
        }
        if (ia == a.terms().end()) {
            out.push_back({ib->coef * sign, ib->mono});
            ++ib;
            continue;
        }
        const auto cmp = grevlex_cmp(ia->mono, ib->mono);
        if (cmp > 0) {
            out.push_back(*ia++);
        } else if (cmp < 0) {
            out.push_back({ib->coef * sign, ib->mono});
            ++ib;
        } else {
            Rational c = ia->coef + ib->coef * sign;
            if (c != 0) {
                out.push_back({std::move(c), ia->mono});
            }
            ++ia;
            ++ib;
        }
    }
    // Already sorted and merged; from_terms is a no-op reorder here.
    return Polynomial::from_terms(std::move(out));
}

} // namespace

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    return merge(a, b, 1);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    return merge(a, b, -1);
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<Term> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a.terms()) {
        for (const auto& y : b.terms()) {
            out.push_back({x.coef * y.coef, x.mono * y.mono});
        }
    }
    return Polynomial::from_terms(std::move(out));
}

bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.terms()[i].coef != b.terms()[i].coef || !(a.terms()[i].mono == b.terms()[i].mono)) {
            return false;
        }
    }
    return true;
}

double Polynomial::evaluate(std::span<const double> point) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
        double value = t.coef.get_d();
        for (Var v : t.mono.vars()) {
            value *= point[v];
        }
        sum += value;
    }
    return sum;
}

Monomial variable(const Dims& dims, const MultiIndex& alpha) {
    return Monomial::variable(static_cast<Var>(pack(dims, alpha)));
}

Monomial product(const Dims& dims, const MultiIndex& alpha, const MultiIndex& beta) {
    return Monomial({static_cast<Var>(pack(dims, alpha)), static_cast<Var>(pack(dims, beta))});
}

std::string to_string(const Monomial& m, const Dims& dims) {
    std::string out;
    for (std::size_t i = 0; i < m.vars().size(); ++i) {
        if (i > 0) {
            out += '*';
        }
        out += 'x' + unpack(dims, m.vars()[i]).to_string();
    }
    return out;
}

std::string to_string(const Polynomial& p, const Dims& dims) {
    if (p.is_zero()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& t : p.terms()) {
        const bool negative = t.coef < 0;
        const Rational magnitude = abs(t.coef);
        if (first) {
            out += negative ? "-" : "";
        } else {
            out += negative ? " - " : " + ";
        }
        out += magnitude.get_str();
        if (!t.mono.is_one()) {
            out += '*' + to_string(t.mono, dims);
        }
        first = false;
    }
    return out;
}

namespace {

class PolynomialParser {
public:
    PolynomialParser(std::string_view text, const Dims& dims) : text_(text), dims_(dims) {}

    Polynomial parse() {
        std::vector<Term> terms;
        skip_space();
        if (peek() == '0' && rest_is_zero()) {
            return {};
        }
        bool first = true;
        while (true) {
            skip_space();
            if (at_end()) {
                break;
            }
            int sign = 1;
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1 : 1;
                ++pos_;
                skip_space();
            } else if (!first) {
                fail("expected '+' or '-'");
            }
            terms.push_back(parse_term(sign));
            first = false;
        }
        if (terms.empty()) {
            fail("empty polynomial");
        }
        return Polynomial::from_terms(std::move(terms));
    }

private:
    Term parse_term(int sign) {
        Rational coef = 1;
        std::vector<Var> vars;
        bool need_factor = true;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            coef = parse_rational();
            skip_space();
            need_factor = false;
            if (peek() != '*') {
                return {coef * sign, Monomial()};
            }
            ++pos_;
            skip_space();
            need_factor = true;
        }
        while (need_factor) {
            const Var v = parse_variable();
            int power = 1;
            skip_space();
            if (peek() == '^') {
                ++pos_;
                power = static_cast<int>(parse_unsigned());
                if (power < 1) {
                    fail("exponent must be positive");
                }
                skip_space();
            }
            for (int i = 0; i < power; ++i) {
                vars.push_back(v);
            }
            need_factor = false;
            if (peek() == '*') {
                ++pos_;
                skip_space();
                need_factor = true;
            }
        }
        return {coef * sign, Monomial(std::move(vars))};
    }

    Var parse_variable() {
        if (peek() != 'x') {
            fail("expected variable 'x['");
        }
        ++pos_;
        skip_space();
        if (peek() != '[') {
            fail("expected '['");
        }
        ++pos_;
        std::vector<int> entries;
        while (true) {
            skip_space();
            entries.push_back(static_cast<int>(parse_unsigned()));
            skip_space();
            if (peek() == ',') {
                ++pos_;
            } else if (peek() == ']') {
                ++pos_;
                break;
            } else {
                fail("expected ',' or ']'");
            }
        }
        MultiIndex index(std::move(entries));
        if (!index.valid_for(dims_)) {
            fail("variable index " + index.to_string() + " out of range");
        }
        return static_cast<Var>(pack(dims_, index));
    }

    Rational parse_rational() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '/')) {
            ++pos_;
        }
        Rational value;
        try {
            value = Rational(std::string(text_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            fail("bad coefficient");
        }
        if (value.get_den() == 0) {
            fail("zero denominator");
        }
        value.canonicalize();
        return value;
    }

    unsigned long parse_unsigned() {
        const std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            ++pos_;
        }
        if (start == pos_) {
            fail("expected a number");
        }
        return std::stoul(std::string(text_.substr(start, pos_ - start)));
    }

    bool rest_is_zero() const {
        std::size_t p = pos_ + 1;
        while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) {
            ++p;
        }
        return p == text_.size();
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("polynomial parse error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }
    [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
    [[nodiscard]] char peek() const { return at_end() ? '\0' : text_[pos_]; }

    std::string_view text_;
    const Dims& dims_;
    std::size_t pos_ = 0;
};

} // namespace

Polynomial parse_polynomial(std::string_view text, const Dims& dims) {
    return PolynomialParser(text, dims).parse();
}

} // namespace theta
