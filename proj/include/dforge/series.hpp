#ifndef DFORGE_SERIES_HPP
#define DFORGE_SERIES_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/interval.hpp>
#include <dforge/rational.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

// Polynomial in the auxiliary variable x with Coefficient entries, stored
// densely by degree with no trailing zeros. Degree 0 in the univariate case.
using XPoly = std::vector<Coefficient>;

namespace xpoly
{

inline void trim(XPoly &p)
{
    while (!p.empty() && p.back().is_zero()) {
        p.pop_back();
    }
}

inline bool is_zero(const XPoly &p)
{
    return std::all_of(p.begin(), p.end(), [](const Coefficient &c) { return c.is_zero(); });
}

inline XPoly constant(Coefficient c)
{
    XPoly p;
    if (!c.is_zero()) {
        p.push_back(std::move(c));
    }
    return p;
}

inline XPoly monomial(unsigned degree, Coefficient c)
{
    XPoly p;
    if (!c.is_zero()) {
        p.resize(degree + 1);
        p[degree] = std::move(c);
    }
    return p;
}

// Degree of a nonzero polynomial; -1 for zero.
inline long degree(const XPoly &p)
{
    for (std::size_t i = p.size(); i-- > 0;) {
        if (!p[i].is_zero()) {
            return static_cast<long>(i);
        }
    }
    return -1;
}

inline XPoly add(const XPoly &a, const XPoly &b)
{
    XPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] += b[i];
    }
    trim(r);
    return r;
}

inline XPoly neg(XPoly a)
{
    for (auto &c : a) {
        c = -c;
    }
    return a;
}

inline XPoly sub(const XPoly &a, const XPoly &b)
{
    return add(a, neg(b));
}

inline XPoly mul(const XPoly &a, const XPoly &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    XPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) {
            continue;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!b[j].is_zero()) {
                r[i + j] += a[i] * b[j];
            }
        }
    }
    trim(r);
    return r;
}

inline XPoly scale(const XPoly &a, const Coefficient &c)
{
    XPoly r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = a[i] * c;
    }
    trim(r);
    return r;
}

// d/dx
inline XPoly derivative(const XPoly &a)
{
    if (a.size() <= 1) {
        return {};
    }
    XPoly r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) {
        r[i - 1] = Rational(static_cast<long>(i)) * a[i];
    }
    trim(r);
    return r;
}

// x d/dx
inline XPoly euler(const XPoly &a)
{
    XPoly r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = Rational(static_cast<long>(i)) * a[i];
    }
    trim(r);
    return r;
}

// p(x + h) for rational h.
inline XPoly taylor_shift(const XPoly &p, const Rational &h)
{
    if (h == 0 || p.empty()) {
        return p;
    }
    XPoly r;
    XPoly base{Coefficient(h), Coefficient(1)};
    XPoly power{Coefficient(1)};
    for (const auto &c : p) {
        r = add(r, scale(power, c));
        power = mul(power, base);
    }
    return r;
}

inline std::string to_string(const XPoly &p)
{
    if (is_zero(p)) {
        return "0";
    }
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].is_zero()) {
            continue;
        }
        if (!out.empty()) {
            out += " + ";
        }
        std::string c = p[i].to_string();
        if (i == 0) {
            out += c;
        } else {
            if (c != "1") {
                out += "(" + c + ")*";
            }
            out += i == 1 ? "x" : "x^" + std::to_string(i);
        }
    }
    return out;
}

} // namespace xpoly

struct Term {
    Exponent exponent;
    XPoly coeff;

    friend bool operator==(const Term &, const Term &) = default;
};

// Truncated generalized Dirichlet series  sum_i c_i(x) exp(-lambda_i s).
//
// Terms are kept sorted strictly increasing by the numeric value of the
// exponent. `truncation()` is the bound T up to which the series is known
// exactly: terms with exponent > T are unknown. An empty optional means the
// series is an exact finite sum (no unknown tail).
//
// If two distinct exponents could not be separated at the working precision,
// the structural order was used and precision_tie() reports it; the flag
// propagates through every operation.
class FormalSeries
{
public:
    using Bound = std::optional<Exponent>;

    FormalSeries(BasisPtr basis, Bound truncation) : m_basis(std::move(basis)), m_trunc(std::move(truncation))
    {
        if (!m_basis) {
            throw Error(ErrorCode::BadBasis, "null basis");
        }
        if (m_trunc) {
            m_trunc->check_basis(*m_basis);
        }
    }

    // Canonical series from an arbitrary term list: equal exponents are merged by
    // addition, zeros pruned, terms sorted. Throws BadBasis for unknown symbols and
    // BadBound for exponents beyond the truncation.
    static FormalSeries make(BasisPtr basis, std::vector<Term> terms, Bound truncation)
    {
        FormalSeries out(std::move(basis), std::move(truncation));
        Accumulator acc;
        for (auto &t : terms) {
            t.exponent.check_basis(*out.m_basis);
            acc.add(std::move(t.exponent), t.coeff);
        }
        bool tie = false;
        if (out.m_trunc) {
            for (const auto &[e, c] : acc.map) {
                if (xpoly::is_zero(c)) {
                    continue;
                }
                auto cmp = compare(e, *out.m_trunc, *out.m_basis);
                tie = tie || cmp.tie;
                if (cmp.sign > 0) {
                    throw Error(ErrorCode::BadBound,
                                "term exponent " + e.to_string() + " exceeds truncation " + out.m_trunc->to_string());
                }
            }
        }
        out.adopt(std::move(acc), tie);
        return out;
    }

    static FormalSeries constant(BasisPtr basis, const Coefficient &c)
    {
        FormalSeries out(std::move(basis), std::nullopt);
        if (!c.is_zero()) {
            out.m_terms.push_back({Exponent(), xpoly::constant(c)});
        }
        return out;
    }

    static FormalSeries zero(BasisPtr basis, Bound truncation = std::nullopt)
    {
        return FormalSeries(std::move(basis), std::move(truncation));
    }

    const BasisPtr &basis() const
    {
        return m_basis;
    }
    const std::vector<Term> &terms() const
    {
        return m_terms;
    }
    const Bound &truncation() const
    {
        return m_trunc;
    }
    bool is_exact() const
    {
        return !m_trunc.has_value();
    }
    bool precision_tie() const
    {
        return m_tie;
    }
    // No stored terms: the series vanishes up to its truncation (or identically
    // when exact).
    bool is_zero() const
    {
        return m_terms.empty();
    }
    std::size_t size() const
    {
        return m_terms.size();
    }

    // Least-exponent stored term. std::nullopt means the series is zero up to
    // truncation() (identically zero when is_exact()).
    std::optional<Term> leading_term() const
    {
        if (m_terms.empty()) {
            return std::nullopt;
        }
        return m_terms.front();
    }

    // Largest x-degree among the coefficients (0 for univariate series).
    long x_degree() const
    {
        long d = 0;
        for (const auto &t : m_terms) {
            d = std::max(d, xpoly::degree(t.coeff));
        }
        return d;
    }

    XPoly coefficient_at(const Exponent &e) const
    {
        for (const auto &t : m_terms) {
            if (t.exponent == e) {
                return t.coeff;
            }
        }
        return {};
    }

    // Coefficient of a univariate term.
    static const Coefficient &scalar(const Term &t)
    {
        static const Coefficient zero;
        if (t.coeff.size() > 1) {
            throw Error(ErrorCode::DegenerateInput, "bivariate term where a univariate one was expected");
        }
        return t.coeff.empty() ? zero : t.coeff[0];
    }

    friend bool operator==(const FormalSeries &a, const FormalSeries &b)
    {
        return same_basis(a, b) && a.m_terms == b.m_terms && a.m_trunc == b.m_trunc;
    }

    // ---- arithmetic -------------------------------------------------------

    friend FormalSeries operator+(const FormalSeries &a, const FormalSeries &b)
    {
        require_same_basis(a, b);
        bool tie = a.m_tie || b.m_tie;
        Bound t = min_bound(a.m_trunc, b.m_trunc, *a.m_basis, tie);
        Accumulator acc;
        for (const auto &x : a.m_terms) {
            acc.add(x.exponent, x.coeff);
        }
        for (const auto &x : b.m_terms) {
            acc.add(x.exponent, x.coeff);
        }
        return finish(a.m_basis, std::move(acc), std::move(t), tie);
    }

    friend FormalSeries operator-(const FormalSeries &a)
    {
        FormalSeries r = a;
        for (auto &t : r.m_terms) {
            t.coeff = xpoly::neg(std::move(t.coeff));
        }
        return r;
    }

    friend FormalSeries operator-(const FormalSeries &a, const FormalSeries &b)
    {
        return a + (-b);
    }

    // Cauchy product. The result is known up to
    //   min(T_a + lead(b), T_b + lead(a)),
    // where lead() of a series without terms is its truncation.
    friend FormalSeries operator*(const FormalSeries &a, const FormalSeries &b)
    {
        require_same_basis(a, b);
        bool tie = a.m_tie || b.m_tie;
        Bound t;
        if ((a.is_exact() && a.is_zero()) || (b.is_exact() && b.is_zero())) {
            return FormalSeries(a.m_basis, std::nullopt);
        }
        if (a.m_trunc) {
            t = *a.m_trunc + b.lead_or_bound();
        }
        if (b.m_trunc) {
            Bound tb = *b.m_trunc + a.lead_or_bound();
            t = min_bound(t, tb, *a.m_basis, tie);
        }
        Accumulator acc;
        for (const auto &x : a.m_terms) {
            for (const auto &y : b.m_terms) {
                acc.add(x.exponent + y.exponent, xpoly::mul(x.coeff, y.coeff));
            }
        }
        return finish(a.m_basis, std::move(acc), std::move(t), tie);
    }

    FormalSeries scaled(const Coefficient &c) const
    {
        if (c.is_zero()) {
            FormalSeries r(m_basis, m_trunc);
            r.m_tie = m_tie;
            return r;
        }
        FormalSeries r = *this;
        for (auto &t : r.m_terms) {
            t.coeff = xpoly::scale(t.coeff, c);
        }
        return r;
    }

    FormalSeries pow(unsigned e) const
    {
        FormalSeries r = constant(m_basis, Coefficient(1));
        for (unsigned i = 0; i < e; ++i) {
            r = r * *this;
        }
        return r;
    }

    // k-th derivative in s: each coefficient is multiplied by (-lambda)^k, the
    // exponent read as an exact polynomial in its symbols.
    FormalSeries differentiate_s(unsigned k = 1) const
    {
        if (k == 0) {
            return *this;
        }
        FormalSeries r(m_basis, m_trunc);
        r.m_tie = m_tie;
        for (const auto &t : m_terms) {
            Coefficient factor = Coefficient::from_exponent(-t.exponent).pow(k);
            XPoly c = xpoly::scale(t.coeff, factor);
            if (!xpoly::is_zero(c)) {
                r.m_terms.push_back({t.exponent, std::move(c)});
            }
        }
        return r;
    }

    // s -> s + h: each coefficient gains the multiplier E(h*lambda) = exp(-lambda h).
    FormalSeries shift_s(const Rational &h) const
    {
        if (h == 0) {
            return *this;
        }
        FormalSeries r = *this;
        for (auto &t : r.m_terms) {
            if (!t.exponent.is_zero()) {
                t.coeff = xpoly::scale(t.coeff, Coefficient::multiplier(h * t.exponent));
            }
        }
        return r;
    }

    // Drop terms beyond `bound`; BadBound if it exceeds the current truncation.
    FormalSeries truncate(const Exponent &bound) const
    {
        bound.check_basis(*m_basis);
        bool tie = m_tie;
        if (m_trunc) {
            auto cmp = compare(bound, *m_trunc, *m_basis);
            tie = tie || cmp.tie;
            if (cmp.sign > 0) {
                throw Error(ErrorCode::BadBound,
                            "truncation " + bound.to_string() + " exceeds known bound " + m_trunc->to_string());
            }
        }
        FormalSeries r(m_basis, bound);
        r.m_tie = tie;
        for (const auto &t : m_terms) {
            auto cmp = compare(t.exponent, bound, *m_basis);
            r.m_tie = r.m_tie || cmp.tie;
            if (cmp.sign <= 0) {
                r.m_terms.push_back(t);
            }
        }
        return r;
    }

    // First `count` terms as an exact finite sum.
    FormalSeries prefix(std::size_t count) const
    {
        FormalSeries r(m_basis, std::nullopt);
        r.m_tie = m_tie;
        count = std::min(count, m_terms.size());
        r.m_terms.assign(m_terms.begin(), m_terms.begin() + static_cast<std::ptrdiff_t>(count));
        return r;
    }

    // Same terms, new truncation bound (no validity check; for building series
    // whose known horizon is established elsewhere).
    FormalSeries with_truncation(Bound t) const
    {
        FormalSeries r = *this;
        r.m_trunc = std::move(t);
        return r;
    }

    // Apply a map to every coefficient polynomial (exponents unchanged).
    template <typename F>
    FormalSeries map_coefficients(F &&f) const
    {
        FormalSeries r(m_basis, m_trunc);
        r.m_tie = m_tie;
        for (const auto &t : m_terms) {
            XPoly c = f(t.exponent, t.coeff);
            xpoly::trim(c);
            if (!xpoly::is_zero(c)) {
                r.m_terms.push_back({t.exponent, std::move(c)});
            }
        }
        return r;
    }

    std::string to_string() const
    {
        std::string out;
        for (const auto &t : m_terms) {
            if (!out.empty()) {
                out += " + ";
            }
            out += "(" + xpoly::to_string(t.coeff) + ")*e^{-(" + t.exponent.to_string() + ")s}";
        }
        if (out.empty()) {
            out = "0";
        }
        out += m_trunc ? " + O(e^{-(" + m_trunc->to_string() + ")s})" : "";
        return out;
    }

    static bool same_basis(const FormalSeries &a, const FormalSeries &b)
    {
        return a.m_basis == b.m_basis || *a.m_basis == *b.m_basis;
    }

    // Numeric minimum of two bounds (empty = +infinity).
    static Bound min_bound(const Bound &a, const Bound &b, const SymbolBasis &basis, bool &tie)
    {
        if (!a) {
            return b;
        }
        if (!b) {
            return a;
        }
        auto cmp = compare(*a, *b, basis);
        tie = tie || cmp.tie;
        return cmp.sign <= 0 ? a : b;
    }

private:
    struct Accumulator {
        std::map<Exponent, XPoly, ExponentLess> map;

        void add(Exponent e, const XPoly &c)
        {
            if (xpoly::is_zero(c)) {
                return;
            }
            auto [it, inserted] = map.try_emplace(std::move(e), c);
            if (!inserted) {
                it->second = xpoly::add(it->second, c);
            }
        }
    };

    Exponent lead_or_bound() const
    {
        return m_terms.empty() ? *m_trunc : m_terms.front().exponent;
    }

    static void require_same_basis(const FormalSeries &a, const FormalSeries &b)
    {
        if (!same_basis(a, b)) {
            throw Error(ErrorCode::BasisMismatch, "series over different symbol bases");
        }
    }

    static FormalSeries finish(BasisPtr basis, Accumulator acc, Bound trunc, bool tie)
    {
        FormalSeries out(std::move(basis), std::move(trunc));
        if (out.m_trunc) {
            for (auto it = acc.map.begin(); it != acc.map.end();) {
                auto cmp = compare(it->first, *out.m_trunc, *out.m_basis);
                tie = tie || cmp.tie;
                it = cmp.sign > 0 ? acc.map.erase(it) : std::next(it);
            }
        }
        out.adopt(std::move(acc), tie);
        return out;
    }

    // Sort the merged terms by numeric value of the exponent. Sorting uses the
    // lower endpoints of the enclosures (a total order); overlapping neighbours
    // are flagged as a precision tie.
    void adopt(Accumulator acc, bool tie)
    {
        struct Keyed {
            Interval value;
            Term term;
        };
        std::vector<Keyed> keyed;
        keyed.reserve(acc.map.size());
        for (auto &[e, c] : acc.map) {
            xpoly::trim(c);
            if (xpoly::is_zero(c)) {
                continue;
            }
            Interval v = e.numeric(*m_basis);
            keyed.push_back({std::move(v), Term{e, std::move(c)}});
        }
        std::sort(keyed.begin(), keyed.end(), [](const Keyed &a, const Keyed &b) {
            int c = mpfr_cmp(a.value.lo().get(), b.value.lo().get());
            if (c != 0) {
                return c < 0;
            }
            return structurally_less(a.term.exponent, b.term.exponent);
        });
        for (std::size_t i = 0; i + 1 < keyed.size(); ++i) {
            if (!keyed[i].value.certainly_less(keyed[i + 1].value)) {
                tie = true;
            }
        }
        m_terms.clear();
        m_terms.reserve(keyed.size());
        for (auto &k : keyed) {
            m_terms.push_back(std::move(k.term));
        }
        m_tie = m_tie || tie;
    }

    BasisPtr m_basis;
    std::vector<Term> m_terms;
    Bound m_trunc;
    bool m_tie = false;
};

// Free-function spellings of the series operations.
inline FormalSeries make_series(BasisPtr basis, std::vector<Term> terms, FormalSeries::Bound truncation)
{
    return FormalSeries::make(std::move(basis), std::move(terms), std::move(truncation));
}
inline FormalSeries series_mul(const FormalSeries &a, const FormalSeries &b)
{
    return a * b;
}
inline FormalSeries differentiate_s(const FormalSeries &a, unsigned k)
{
    return a.differentiate_s(k);
}
inline FormalSeries shift_s(const FormalSeries &a, const Rational &h)
{
    return a.shift_s(h);
}
inline std::optional<Term> leading_term(const FormalSeries &a)
{
    return a.leading_term();
}
inline FormalSeries truncate(const FormalSeries &a, const Exponent &bound)
{
    return a.truncate(bound);
}

} // namespace dforge

#endif
