#ifndef DFORGE_FORMAL_EVAL_HPP
#define DFORGE_FORMAL_EVAL_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/diff_poly.hpp>
#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/interval.hpp>
#include <dforge/lattice.hpp>
#include <dforge/series.hpp>

namespace dforge
{

enum class Verdict { ZeroUpToT, NonzeroWithLeading };

inline std::string_view to_string(Verdict v)
{
    return v == Verdict::ZeroUpToT ? "ZeroUpToT" : "NonzeroWithLeading";
}

// F(phi) rearranged as a series. `horizon` is the bound up to which the
// residual is exact (empty: exact everywhere).
struct Residual {
    FormalSeries series;
    DiffPolynomial equation;
    FormalSeries::Bound horizon;
    Verdict verdict = Verdict::ZeroUpToT;
    std::optional<Term> leading;

    bool is_zero() const
    {
        return verdict == Verdict::ZeroUpToT;
    }
};

namespace detail
{

class SubstitutionCache
{
public:
    explicit SubstitutionCache(const FormalSeries &phi) : m_phi(phi) {}

    const FormalSeries &value(const DiffIndeterminate &z)
    {
        auto it = m_cache.find(z);
        if (it != m_cache.end()) {
            return it->second;
        }
        return m_cache.emplace(z, m_phi.differentiate_s(z.order).shift_s(z.shift)).first->second;
    }

private:
    const FormalSeries &m_phi;
    std::map<DiffIndeterminate, FormalSeries> m_cache;
};

} // namespace detail

// F(phi) with its propagated validity horizon. The horizon follows from series
// arithmetic: sums keep the smaller bound, products min(T_a + lead_b, T_b + lead_a).
inline FormalSeries substitute_series(const DiffPolynomial &F, const FormalSeries &phi)
{
    if (F.x_degree() > 0) {
        throw Error(ErrorCode::ExplicitVariable, "equation depends on x explicitly; eliminate x first");
    }
    if (phi.x_degree() > 0) {
        throw Error(ErrorCode::DegenerateInput, "substitution needs a univariate series");
    }
    detail::SubstitutionCache cache(phi);
    FormalSeries total = FormalSeries::zero(phi.basis());
    for (const auto &[m, c] : F.terms()) {
        FormalSeries prod = FormalSeries::constant(phi.basis(), c);
        for (const auto &[z, k] : m.powers) {
            const FormalSeries &v = cache.value(z);
            for (unsigned i = 0; i < k; ++i) {
                prod = prod * v;
            }
        }
        total = total + prod;
    }
    return total;
}

inline Residual make_residual(FormalSeries series, const DiffPolynomial &F)
{
    Residual r{std::move(series), F, std::nullopt, Verdict::ZeroUpToT, std::nullopt};
    r.horizon = r.series.truncation();
    r.leading = r.series.leading_term();
    r.verdict = r.leading ? Verdict::NonzeroWithLeading : Verdict::ZeroUpToT;
    return r;
}

// Residual of F at phi, valid up to T (default: the largest horizon the inputs
// support). HorizonTooShort reports that maximal safe bound.
inline Residual substitute(const DiffPolynomial &F, const FormalSeries &phi, const FormalSeries::Bound &T = std::nullopt)
{
    FormalSeries s = substitute_series(F, phi);
    if (T) {
        if (s.truncation()) {
            auto cmp = compare(*T, *s.truncation(), *phi.basis());
            if (cmp.sign > 0) {
                throw Error(ErrorCode::HorizonTooShort, "requested horizon " + T->to_string()
                                                            + " exceeds the maximal safe horizon "
                                                            + s.truncation()->to_string());
            }
        }
        s = s.truncate(*T);
    }
    return make_residual(std::move(s), F);
}

// ---- initial terms of the partial derivatives ----------------------------------

class PartialVanishesError : public Error
{
public:
    explicit PartialVanishesError(DiffIndeterminate z)
        : Error(ErrorCode::PartialVanishes,
                "dF/d" + z.to_string() + " vanishes at the series up to the working horizon; "
                                         "restart with that lower-degree equation"),
          m_z(std::move(z))
    {
    }
    const DiffIndeterminate &indeterminate() const
    {
        return m_z;
    }

private:
    DiffIndeterminate m_z;
};

struct InitialTerm {
    Coefficient b;
    Exponent lambda;
};

struct InitialTerms {
    std::map<DiffIndeterminate, InitialTerm> terms;
    Exponent Lambda1;
    std::vector<DiffIndeterminate> argmin;
    bool precision_tie = false;
};

inline InitialTerms initial_terms_of_partials(const DiffPolynomial &F, const FormalSeries &phi)
{
    InitialTerms out;
    bool first = true;
    for (const auto &z : F.indeterminates()) {
        FormalSeries r = substitute_series(F.partial(z), phi);
        auto lead = r.leading_term();
        if (!lead) {
            throw PartialVanishesError(z);
        }
        out.precision_tie = out.precision_tie || r.precision_tie();
        InitialTerm it{FormalSeries::scalar(*lead), lead->exponent};
        if (first) {
            out.Lambda1 = it.lambda;
            out.argmin = {z};
            first = false;
        } else {
            auto cmp = compare(it.lambda, out.Lambda1, *phi.basis());
            out.precision_tie = out.precision_tie || cmp.tie;
            if (cmp.sign < 0) {
                out.Lambda1 = it.lambda;
                out.argmin = {z};
            } else if (cmp.sign == 0) {
                out.argmin.push_back(z);
            }
        }
        out.terms.emplace(z, std::move(it));
    }
    return out;
}

// ---- exponential polynomials -------------------------------------------------------

// c * lambda^t * exp(k * lambda)
struct ExpTerm {
    unsigned t = 0;
    Rational k{0};
    Coefficient c;
};

// L(lambda) = sum c_{t,i} lambda^t exp(lambda k_i); (t, k) pairs unique.
class ExpPolynomial
{
public:
    ExpPolynomial() = default;

    void add(unsigned t, const Rational &k, const Coefficient &c)
    {
        for (auto it = m_terms.begin(); it != m_terms.end(); ++it) {
            if (it->t == t && it->k == k) {
                it->c += c;
                if (it->c.is_zero()) {
                    m_terms.erase(it);
                }
                return;
            }
        }
        if (!c.is_zero()) {
            m_terms.push_back({t, k, c});
        }
    }
    const std::vector<ExpTerm> &terms() const
    {
        return m_terms;
    }
    bool is_zero() const
    {
        return m_terms.empty();
    }
    // Index of the dominant term: maximal k, then maximal t.
    std::size_t lead_index() const
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m_terms.size(); ++i) {
            const auto &a = m_terms[i];
            const auto &b = m_terms[best];
            if (a.k > b.k || (a.k == b.k && a.t > b.t)) {
                best = i;
            }
        }
        return best;
    }

    Interval evaluate(const Rational &lambda, const SymbolBasis &basis) const
    {
        const auto prec = basis.precision();
        Interval sum = Interval::exact(Rational(0), prec);
        for (const auto &term : m_terms) {
            Interval v = term.c.numeric(basis) * Interval::exact(rational_pow(lambda, term.t), prec)
                         * Interval::exact(term.k * lambda, prec).exp();
            sum = sum + v;
        }
        return sum;
    }

    std::string to_string() const
    {
        std::string out;
        for (const auto &term : m_terms) {
            if (!out.empty()) {
                out += " + ";
            }
            out += "(" + term.c.to_string() + ")";
            if (term.t > 0) {
                out += "*l^" + std::to_string(term.t);
            }
            if (term.k != 0) {
                out += "*exp(" + dforge::to_string(term.k) + "*l)";
            }
        }
        return out.empty() ? "0" : out;
    }

private:
    std::vector<ExpTerm> m_terms;
};

struct RootBound {
    Rational B;
    // Start of the region where every ratio |term_j / lead| is non-increasing.
    Rational monotone_from;
    std::size_t lead = 0;
};

namespace detail
{

// Upper end of sum_{j != lead} |c_j| B^{t_j} e^{k_j B} / (|c_lead| B^{t_lead} e^{k_lead B}).
inline BigFloat dominance_ratio(const ExpPolynomial &L, std::size_t lead, const Rational &B,
                                const std::vector<Interval> &abs_c, mpfr_prec_t prec)
{
    const auto &lt = L.terms()[lead];
    Interval sum = Interval::exact(Rational(0), prec);
    for (std::size_t j = 0; j < L.terms().size(); ++j) {
        if (j == lead) {
            continue;
        }
        const auto &tj = L.terms()[j];
        Interval r = abs_c[j] / abs_c[lead];
        r = r * Interval::exact(rational_pow(B, static_cast<long>(tj.t) - static_cast<long>(lt.t)), prec);
        r = r * Interval::exact((tj.k - lt.k) * B, prec).exp();
        sum = sum + r;
    }
    return sum.hi();
}

inline std::vector<Interval> abs_coefficients(const ExpPolynomial &L, const SymbolBasis &basis)
{
    std::vector<Interval> out;
    for (const auto &t : L.terms()) {
        Interval v = t.c.numeric(basis);
        if (v.contains_zero()) {
            throw Error(ErrorCode::PrecisionTie, "coefficient " + t.c.to_string()
                                                     + " cannot be separated from zero at the working precision");
        }
        out.push_back(v.abs());
    }
    return out;
}

inline Rational monotone_start(const ExpPolynomial &L, std::size_t lead)
{
    const auto &lt = L.terms()[lead];
    Rational b0(1);
    for (std::size_t j = 0; j < L.terms().size(); ++j) {
        const auto &tj = L.terms()[j];
        if (j == lead || tj.k == lt.k || tj.t <= lt.t) {
            continue;
        }
        Rational need = Rational(static_cast<long>(tj.t) - static_cast<long>(lt.t)) / (lt.k - tj.k);
        b0 = std::max(b0, need);
    }
    return b0;
}

} // namespace detail

// Rational B such that L has no real root in [B, inf): there the dominant term
// outweighs the sum of absolute values of all others, and each ratio to the
// dominant term is non-increasing.
inline RootBound exp_poly_root_bound(const ExpPolynomial &L, const SymbolBasis &basis)
{
    if (L.is_zero()) {
        throw Error(ErrorCode::DegenerateInput, "root bound of the zero exponential polynomial");
    }
    RootBound out;
    out.lead = L.lead_index();
    if (L.terms().size() == 1) {
        out.B = 0;
        out.monotone_from = 0;
        return out;
    }
    const auto prec = basis.precision();
    const auto abs_c = detail::abs_coefficients(L, basis);
    const Rational b0 = detail::monotone_start(L, out.lead);
    out.monotone_from = b0;
    auto dominated = [&](const Rational &B) {
        BigFloat r = detail::dominance_ratio(L, out.lead, B, abs_c, prec);
        return mpfr_cmp_ui(r.get(), 1) < 0;
    };
    Rational hi = b0;
    int guard = 0;
    while (!dominated(hi)) {
        hi *= 2;
        if (++guard > 4096) {
            throw Error(ErrorCode::PrecisionTie, "dominance not reached; raise the working precision");
        }
    }
    if (hi != b0) {
        Rational lo = b0;
        if (hi / 2 > lo) {
            lo = hi / 2;
        }
        for (int i = 0; i < 20; ++i) {
            Rational mid = (lo + hi) / 2;
            if (dominated(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    out.B = hi;
    return out;
}

// Independent check of a claimed bound: B lies in the monotone region and the
// dominance inequality holds at B in interval arithmetic.
inline bool verify_dominance(const ExpPolynomial &L, const Rational &B, const SymbolBasis &basis)
{
    if (L.is_zero()) {
        return false;
    }
    if (L.terms().size() == 1) {
        return true;
    }
    const std::size_t lead = L.lead_index();
    const auto &lt = L.terms()[lead];
    if (B < 1) {
        return false;
    }
    for (const auto &tj : L.terms()) {
        if (tj.k < lt.k && tj.t > lt.t
            && B * (lt.k - tj.k) < Rational(static_cast<long>(tj.t) - static_cast<long>(lt.t))) {
            return false;
        }
        if (tj.k == lt.k && tj.t > lt.t) {
            return false;
        }
    }
    const auto prec = basis.precision();
    Interval others = Interval::exact(Rational(0), prec);
    Interval leadv = (lt.c.numeric(basis).abs()) * Interval::exact(rational_pow(B, lt.t), prec)
                     * Interval::exact(lt.k * B, prec).exp();
    for (std::size_t j = 0; j < L.terms().size(); ++j) {
        if (j == lead) {
            continue;
        }
        const auto &tj = L.terms()[j];
        others = others
                 + tj.c.numeric(basis).abs() * Interval::exact(rational_pow(B, tj.t), prec)
                       * Interval::exact(tj.k * B, prec).exp();
    }
    return others.certainly_less(leadv);
}

// ---- leading-term threshold -----------------------------------------------------------

struct Prop3Options {
    // Maximum number of restarts with a vanishing partial; default: total degree.
    std::optional<unsigned> max_restarts;
};

struct Prop3Report {
    DiffPolynomial equation;                 // after restarts
    std::vector<DiffIndeterminate> restarts; // partials taken, in order
    InitialTerms initial;
    Exponent Lambda;                         // truncation-stability bound
    std::size_t Lambda_prefix = 0;           // number of leading terms it keeps
    ExpPolynomial L;
    RootBound Lambda2;
    unsigned n = 0;
    Exponent lambda0;
    Interval threshold;
    FormalSeries::Bound horizon;
    std::vector<std::size_t> verified_indices;
    bool precision_tie = false;
};

namespace detail
{

inline bool reproduces_initial_terms(const DiffPolynomial &F, const FormalSeries &prefix, const InitialTerms &init)
{
    for (const auto &[z, it] : init.terms) {
        FormalSeries r = substitute_series(F.partial(z), prefix);
        auto lead = r.leading_term();
        if (!lead || !(lead->exponent == it.lambda) || !(FormalSeries::scalar(*lead) == it.b)) {
            return false;
        }
    }
    return true;
}

} // namespace detail

// Threshold beyond which every exponent of a formal solution must be an integer
// combination of the earlier ones:
//   Lambda + |Lambda1| + |Lambda2| + n |lambda0|,
// then checks that claim on every exponent of phi above it.
inline Prop3Report prop3_threshold(const DiffPolynomial &F0, const FormalSeries &phi, const Prop3Options &opts = {})
{
    const SymbolBasis &basis = *phi.basis();
    const auto prec = basis.precision();
    Residual res = substitute(F0, phi);
    if (!res.is_zero()) {
        throw Error(ErrorCode::NotFormallySatisfied,
                    "series does not satisfy the equation; leading residual term at "
                        + res.leading->exponent.to_string());
    }
    if (F0.total_degree() == 0) {
        throw Error(ErrorCode::DegenerateInput, "equation has no f-indeterminates");
    }
    if (phi.is_zero()) {
        throw Error(ErrorCode::DegenerateInput, "threshold of the zero series");
    }
    Prop3Report rep;
    rep.horizon = res.horizon;
    rep.equation = F0;
    const unsigned cap = opts.max_restarts.value_or(F0.total_degree());
    while (true) {
        try {
            rep.initial = initial_terms_of_partials(rep.equation, phi);
            break;
        } catch (const PartialVanishesError &e) {
            if (rep.restarts.size() >= cap) {
                throw Error(ErrorCode::PartialVanishes,
                            "restart cap of " + std::to_string(cap) + " reached; last: " + e.what());
            }
            rep.restarts.push_back(e.indeterminate());
            rep.equation = rep.equation.partial(e.indeterminate());
        }
    }
    const DiffPolynomial &F = rep.equation;
    rep.precision_tie = phi.precision_tie() || rep.initial.precision_tie;

    // Smallest prefix whose substitution already shows every initial term:
    // doubling, then bisection (the property is monotone in the prefix length).
    const auto &terms = phi.terms();
    auto prefix = [&](std::size_t k) { return phi.truncate(terms[k - 1].exponent); };
    auto ok = [&](std::size_t k) { return detail::reproduces_initial_terms(F, prefix(k), rep.initial); };
    std::size_t hi = 1;
    while (hi < terms.size() && !ok(hi)) {
        hi = std::min(hi * 2, terms.size());
    }
    std::size_t lo = hi / 2;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (ok(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    rep.Lambda_prefix = hi;
    rep.Lambda = terms[hi - 1].exponent;

    for (const auto &z : rep.initial.argmin) {
        const auto &it = rep.initial.terms.at(z);
        Coefficient c = (z.order % 2) ? -it.b : it.b;
        rep.L.add(z.order, -z.shift, c);
    }
    if (rep.L.is_zero()) {
        throw Error(ErrorCode::DegenerateInput, "initial-term exponential polynomial cancels identically");
    }
    rep.Lambda2 = exp_poly_root_bound(rep.L, basis);
    rep.n = F.total_degree();
    rep.lambda0 = terms.front().exponent;

    rep.threshold = rep.Lambda.numeric(basis) + rep.initial.Lambda1.numeric(basis).abs()
                    + Interval::exact(abs(rep.Lambda2.B), prec)
                    + Interval::exact(Rational(rep.n), prec) * rep.lambda0.numeric(basis).abs();

    HermiteLattice earlier;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const Exponent &li = terms[i].exponent;
        if (i > 0 && li.numeric(basis).certainly_greater(rep.threshold)) {
            if (!earlier.contains(li)) {
                throw Error(ErrorCode::VerificationFailed,
                            "exponent #" + std::to_string(i) + " = " + li.to_string()
                                + " is not an integer combination of the earlier exponents");
            }
            rep.verified_indices.push_back(i);
        }
        earlier.insert(li);
    }
    return rep;
}

} // namespace dforge

#endif
