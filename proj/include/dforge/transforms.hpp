#ifndef DFORGE_TRANSFORMS_HPP
#define DFORGE_TRANSFORMS_HPP

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/diff_poly.hpp>
#include <dforge/error.hpp>
#include <dforge/formal_eval.hpp>
#include <dforge/lattice.hpp>
#include <dforge/series.hpp>

namespace dforge
{

// ---- rescaling --------------------------------------------------------------------

namespace detail
{

inline IntVector weight_vector(const Exponent &e, const LatticeBasis &B)
{
    auto w = express(e, B);
    if (!w) {
        throw Error(ErrorCode::NotInLattice, "exponent " + e.to_string() + " is not an integer combination of the basis");
    }
    return *w;
}

template <class Factor>
FormalSeries rescale_by(const FormalSeries &phi, const LatticeBasis &B, Factor &&factor)
{
    std::vector<Term> terms;
    terms.reserve(phi.size());
    for (const auto &t : phi.terms()) {
        const Coefficient k = factor(weight_vector(t.exponent, B));
        terms.push_back({t.exponent, xpoly::scale(t.coeff, k)});
    }
    return FormalSeries::make(phi.basis(), std::move(terms), phi.truncation());
}

inline std::string scalar_symbol(std::size_t k)
{
    return "c#" + std::to_string(k + 1);
}

} // namespace detail

// a_i -> a_i * prod_k c_k^{alpha_i^(k)}, where lambda_i = sum_k alpha_i^(k) omega_k.
inline FormalSeries rescale(const FormalSeries &phi, const LatticeBasis &B, const std::vector<Rational> &c)
{
    if (c.size() != B.rank()) {
        throw Error(ErrorCode::DegenerateInput, "expected " + std::to_string(B.rank()) + " scalars, got "
                                                    + std::to_string(c.size()));
    }
    for (const auto &ck : c) {
        if (ck == 0) {
            throw Error(ErrorCode::ZeroScalar, "rescaling constants must be nonzero");
        }
    }
    return detail::rescale_by(phi, B, [&](const IntVector &w) {
        Rational k(1);
        for (std::size_t i = 0; i < w.size(); ++i) {
            k *= rational_pow(c[i], w[i].get_si());
        }
        return Coefficient(k);
    });
}

// Same with formal scalars c#1..c#mu kept as Laurent symbols.
inline FormalSeries rescale_symbolic(const FormalSeries &phi, const LatticeBasis &B)
{
    return detail::rescale_by(phi, B, [&](const IntVector &w) {
        Coefficient k(1);
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] != 0) {
                k *= Coefficient::symbol(detail::scalar_symbol(i), static_cast<int>(w[i].get_si()));
            }
        }
        return k;
    });
}

struct InvarianceReport {
    std::vector<Rational> scalars;
    FormalSeries::Bound horizon;
    Residual original;
    Residual rescaled;
    // Residual groups (F-monomial, exponent) whose c-weight matched the exponent's
    // weight vector.
    std::size_t homogeneous_groups = 0;
};

// Rescaled series keep satisfying F. Also checks the mechanism: substituting the
// formally rescaled series into each monomial of F yields, at every exponent,
// coefficients carrying exactly c^alpha(exponent).
inline InvarianceReport verify_rescale_invariance(const DiffPolynomial &F, const FormalSeries &phi,
                                                  const LatticeBasis &B, const std::vector<Rational> &c,
                                                  const FormalSeries::Bound &horizon = std::nullopt)
{
    Residual original = substitute(F, phi, horizon);
    if (!original.is_zero()) {
        throw Error(ErrorCode::NotFormallySatisfied, "equation not satisfied before rescaling: leading residual at "
                                                         + original.leading->exponent.to_string());
    }
    const FormalSeries::Bound h = original.horizon;
    Residual rescaled = substitute(F, rescale(phi, B, c), h);
    if (!rescaled.is_zero()) {
        throw Error(ErrorCode::InvarianceViolated, "rescaled residual nonzero at "
                                                       + rescaled.leading->exponent.to_string());
    }
    InvarianceReport rep{c, h, std::move(original), std::move(rescaled), 0};

    const FormalSeries formal = rescale_symbolic(phi, B);
    for (const auto &[m, coeff] : F.terms()) {
        const DiffPolynomial mono = DiffPolynomial::monomial(m, coeff);
        const FormalSeries r = substitute_series(mono, formal);
        for (const auto &t : r.terms()) {
            const IntVector w = detail::weight_vector(t.exponent, B);
            for (const auto &cx : t.coeff) {
                for (const auto &[cm, q] : cx.terms()) {
                    for (std::size_t k = 0; k < w.size(); ++k) {
                        auto it = cm.powers.find(detail::scalar_symbol(k));
                        const long got = it == cm.powers.end() ? 0 : it->second;
                        if (got != w[k].get_si()) {
                            throw Error(ErrorCode::InvarianceViolated,
                                        "residual group at " + t.exponent.to_string() + " from " + mono.to_string()
                                            + " is not homogeneous in the rescaling constants");
                        }
                    }
                }
            }
            ++rep.homogeneous_groups;
        }
    }
    return rep;
}

// ---- ODE -> PDE at s = 0 ----------------------------------------------------------------

using MultiIndex = std::vector<unsigned>;
using PdeMonomial = std::map<MultiIndex, unsigned>; // G_alpha -> power

// Polynomial in the partials G_alpha with coefficients in Q[x_k, lambda_k, ...].
class PdePolynomial
{
public:
    using Terms = std::map<PdeMonomial, Coefficient>;

    PdePolynomial() = default;
    PdePolynomial(std::size_t mu, Terms terms) : m_mu(mu), m_terms(std::move(terms))
    {
        prune();
    }

    std::size_t variables() const
    {
        return m_mu;
    }
    const Terms &terms() const
    {
        return m_terms;
    }
    bool is_zero() const
    {
        return m_terms.empty();
    }

    void add(const PdeMonomial &m, const Coefficient &c)
    {
        if (c.is_zero()) {
            return;
        }
        auto [it, inserted] = m_terms.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) {
                m_terms.erase(it);
            }
        }
    }

    // Divide every coefficient by the common coefficient monomial.
    PdePolynomial primitive() const
    {
        std::vector<const Coefficient *> cs;
        for (const auto &[_, c] : m_terms) {
            cs.push_back(&c);
        }
        if (cs.empty()) {
            return *this;
        }
        const CoeffMonomial g = Coefficient::monomial_content(cs);
        Terms out;
        for (const auto &[m, c] : m_terms) {
            out.emplace(m, c.divided_by(g));
        }
        return PdePolynomial(m_mu, std::move(out));
    }

    static std::string partial_name(const MultiIndex &a)
    {
        if (a.size() == 1) {
            return "G" + std::string(a[0], '\'');
        }
        std::string s = "G[";
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += (i ? "," : "") + std::to_string(a[i]);
        }
        return s + "]";
    }

    std::string to_string() const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string out;
        bool first = true;
        for (auto it = m_terms.rbegin(); it != m_terms.rend(); ++it) {
            const auto &[m, c] = *it;
            std::string mono;
            for (const auto &[a, k] : m) {
                mono += (mono.empty() ? "" : "*") + partial_name(a) + (k > 1 ? "^" + std::to_string(k) : "");
            }
            std::string cs = c.to_string();
            bool negative = false;
            if (c.terms().size() == 1 && !cs.empty() && cs[0] == '-') {
                negative = true;
                cs = cs.substr(1);
            } else if (c.terms().size() > 1) {
                cs = "(" + cs + ")";
            }
            std::string body = mono.empty() ? cs : (cs == "1" ? mono : cs + "*" + mono);
            if (first) {
                out += negative ? "-" + body : body;
            } else {
                out += negative ? " - " + body : " + " + body;
            }
            first = false;
        }
        return out;
    }

private:
    void prune()
    {
        for (auto it = m_terms.begin(); it != m_terms.end();) {
            it = it->second.is_zero() ? m_terms.erase(it) : std::next(it);
        }
    }

    std::size_t m_mu = 0;
    Terms m_terms;
};

struct PdeResult {
    PdePolynomial pde;        // as expanded, before normalisation
    PdePolynomial normalized; // common coefficient monomial removed
    std::vector<std::string> x_names;
    std::vector<std::string> lambda_names;
};

namespace detail
{

// The derivation D = sum_k -lambda_k x_k d/dx_k applied to a PDE polynomial
// (acts on the x_k inside coefficients and on every G_alpha).
inline PdePolynomial apply_euler_derivation(const PdePolynomial &p, const std::vector<std::string> &xs,
                                            const std::vector<std::string> &lams)
{
    const std::size_t mu = xs.size();
    PdePolynomial out(mu, {});
    for (const auto &[m, c] : p.terms()) {
        for (std::size_t k = 0; k < mu; ++k) {
            const Coefficient factor = -(Coefficient::symbol(lams[k]) * Coefficient::symbol(xs[k]));
            // Coefficient part: x_k d/dx_k c.
            const Coefficient dc = c.derivative(xs[k]);
            if (!dc.is_zero()) {
                out.add(m, factor * dc);
            }
            // Each G_alpha -> G_{alpha + e_k}.
            for (const auto &[a, e] : m) {
                PdeMonomial nm = m;
                if (--nm[a] == 0) {
                    nm.erase(a);
                }
                MultiIndex b = a;
                ++b[k];
                ++nm[b];
                out.add(nm, factor * c * Coefficient(static_cast<long>(e)));
            }
        }
    }
    return out;
}

} // namespace detail

// Substitute f(s) = G(x_1 e^{-lambda_1 s}, ..., x_mu e^{-lambda_mu s}) into F and set
// s = 0: f^(j) becomes D^j G with D = sum_k -lambda_k x_k d/dx_k. The lambda_k stay
// symbolic; `lambda_names` (default l1..l_mu) picks their symbols.
inline PdeResult ode_to_pde(const DiffPolynomial &F, std::size_t mu, std::vector<std::string> lambda_names = {})
{
    if (mu == 0) {
        throw Error(ErrorCode::DegenerateInput, "need at least one variable");
    }
    if (F.has_shifts()) {
        throw Error(ErrorCode::ShiftPresent, "difference terms have no s = 0 PDE analogue");
    }
    if (F.x_degree() > 0) {
        throw Error(ErrorCode::ExplicitVariable, "equation depends on x explicitly");
    }
    PdeResult out;
    for (std::size_t k = 0; k < mu; ++k) {
        out.x_names.push_back(mu == 1 ? "x" : "x" + std::to_string(k + 1));
    }
    if (lambda_names.empty()) {
        for (std::size_t k = 0; k < mu; ++k) {
            lambda_names.push_back("l" + std::to_string(k + 1));
        }
    }
    if (lambda_names.size() != mu) {
        throw Error(ErrorCode::DegenerateInput, "expected " + std::to_string(mu) + " lambda names");
    }
    out.lambda_names = lambda_names;
    for (const auto &[m, c] : F.terms()) {
        for (const auto &sym : c.symbols()) {
            for (const auto &xn : out.x_names) {
                if (sym == xn) {
                    throw Error(ErrorCode::DegenerateInput, "coefficient symbol '" + sym + "' clashes with a PDE variable");
                }
            }
        }
    }

    // D^j G for every order used.
    std::vector<PdePolynomial> powers;
    PdePolynomial g(mu, {});
    g.add({{MultiIndex(mu, 0), 1}}, Coefficient(1));
    powers.push_back(g);
    for (unsigned j = 1; j <= F.max_order(); ++j) {
        powers.push_back(detail::apply_euler_derivation(powers.back(), out.x_names, lambda_names));
    }

    auto mul = [&](const PdePolynomial &a, const PdePolynomial &b) {
        PdePolynomial r(mu, {});
        for (const auto &[ma, ca] : a.terms()) {
            for (const auto &[mb, cb] : b.terms()) {
                PdeMonomial m = ma;
                for (const auto &[alpha, e] : mb) {
                    m[alpha] += e;
                }
                r.add(m, ca * cb);
            }
        }
        return r;
    };

    PdePolynomial total(mu, {});
    for (const auto &[m, c] : F.terms()) {
        PdePolynomial term(mu, {});
        term.add({}, c);
        for (const auto &[z, e] : m.powers) {
            for (unsigned i = 0; i < e; ++i) {
                term = mul(term, powers[z.order]);
            }
        }
        for (const auto &[pm, pc] : term.terms()) {
            total.add(pm, pc);
        }
    }
    out.pde = total;
    out.normalized = total.primitive();
    return out;
}

struct PdeCheck {
    Coefficient residual;  // terms of total x-degree <= valid_degree
    long valid_degree = 0; // residual exact up to this total degree
    bool is_zero() const
    {
        return residual.is_zero();
    }
};

// Evaluate the PDE on a truncated power series G (a polynomial in the x names,
// exact through total degree `order`).
inline PdeCheck evaluate_pde(const PdePolynomial &pde, const std::vector<std::string> &x_names, const Coefficient &G,
                             unsigned order)
{
    auto x_degree = [&](const CoeffMonomial &m) {
        long d = 0;
        for (const auto &xn : x_names) {
            auto it = m.powers.find(xn);
            if (it != m.powers.end()) {
                d += it->second;
            }
        }
        return d;
    };
    std::map<MultiIndex, Coefficient> partials;
    auto partial = [&](const MultiIndex &a) -> const Coefficient & {
        auto it = partials.find(a);
        if (it != partials.end()) {
            return it->second;
        }
        Coefficient d = G;
        for (std::size_t k = 0; k < a.size(); ++k) {
            for (unsigned i = 0; i < a[k]; ++i) {
                d = d.derivative(x_names[k]);
            }
        }
        return partials.emplace(a, std::move(d)).first->second;
    };

    PdeCheck out;
    out.valid_degree = std::numeric_limits<long>::max();
    Coefficient total;
    for (const auto &[m, c] : pde.terms()) {
        // A product is exact through (lowest valid factor degree) + (x-degree of c).
        long valid = std::numeric_limits<long>::max();
        Coefficient v(1);
        for (const auto &[a, e] : m) {
            long alpha = 0;
            for (auto ai : a) {
                alpha += ai;
            }
            valid = std::min(valid, static_cast<long>(order) - alpha);
            v *= partial(a).pow(e);
        }
        long cdeg = std::numeric_limits<long>::max();
        for (const auto &[cm, _] : c.terms()) {
            cdeg = std::min(cdeg, x_degree(cm));
        }
        if (valid != std::numeric_limits<long>::max()) {
            out.valid_degree = std::min(out.valid_degree, valid + cdeg);
        }
        total += c * v;
    }
    Coefficient kept;
    for (const auto &[cm, q] : total.terms()) {
        if (x_degree(cm) <= out.valid_degree) {
            kept += Coefficient::from_monomial(cm, q);
        }
    }
    out.residual = kept;
    return out;
}

// ---- Hilbert's functional equation --------------------------------------------------

// zeta_N(x, s) = sum_{n <= N} x^n n^{-s}, exact through exponent log N.
inline FormalSeries zeta_prefix(std::uint64_t N, mpfr_prec_t precision = default_precision, bool bivariate = true)
{
    if (N < 2) {
        throw Error(ErrorCode::DegenerateInput, "prefix bound must be at least 2");
    }
    std::vector<std::uint64_t> primes = prime_support([&] {
        std::vector<std::uint64_t> v;
        for (std::uint64_t n = 1; n <= N; ++n) {
            v.push_back(n);
        }
        return v;
    }()).primes;
    BasisPtr basis = prime_log_basis(primes, precision);
    std::vector<Term> terms;
    for (std::uint64_t n = 1; n <= N; ++n) {
        terms.push_back({exponent_of_index(n),
                         bivariate ? xpoly::monomial(static_cast<unsigned>(n), Coefficient(1)) : XPoly{Coefficient(1)}});
    }
    return FormalSeries::make(basis, std::move(terms), exponent_of_index(N));
}

// s -> s - nu for integer nu on a series whose symbols are logarithms of rationals:
// the term e^{-lambda s} picks up e^{nu lambda}, an exact rational.
inline FormalSeries integer_shift(const FormalSeries &phi, long nu)
{
    const SymbolBasis &basis = *phi.basis();
    std::vector<Term> terms;
    for (const auto &t : phi.terms()) {
        if (t.exponent.constant_part() != 0) {
            throw Error(ErrorCode::DegenerateInput, "exponent " + t.exponent.to_string() + " has a non-log part");
        }
        Rational k(1);
        for (const auto &[name, q] : t.exponent.coords()) {
            const auto &arg = basis.log_argument(name);
            if (!arg || q.get_den() != 1) {
                throw Error(ErrorCode::DegenerateInput,
                            "integer shift needs integer coordinates over logarithm symbols, got " + t.exponent.to_string());
            }
            k *= rational_pow(*arg, q.get_num().get_si() * nu);
        }
        terms.push_back({t.exponent, xpoly::scale(t.coeff, Coefficient(k))});
    }
    return FormalSeries::make(phi.basis(), std::move(terms), phi.truncation());
}

inline FormalSeries x_euler(const FormalSeries &phi)
{
    return phi.map_coefficients([](const Exponent &, const XPoly &p) { return xpoly::euler(p); });
}

struct HilbertCheck {
    unsigned mu = 0, nu = 0, lambda = 0;
    bool zero = false;
    std::optional<Exponent> leading; // first nonzero residual exponent
};

struct HilbertReport {
    std::uint64_t N = 0;
    FormalSeries::Bound horizon;
    std::vector<HilbertCheck> checks;
    bool all_zero() const
    {
        for (const auto &c : checks) {
            if (!c.zero) {
                return false;
            }
        }
        return true;
    }
};

// Checks (x d/dx)^mu d^lambda/ds^lambda zeta(x, s - nu) = d^lambda/ds^lambda zeta(x, s - mu - nu)
// on the prefix for every mu <= max_mu, nu <= max_nu, lambda <= max_lambda.
inline HilbertReport verify_hilbert_zeta(std::uint64_t N, unsigned max_mu, unsigned max_nu, unsigned max_lambda = 2,
                                         mpfr_prec_t precision = default_precision)
{
    HilbertReport rep;
    rep.N = N;
    const FormalSeries zeta = zeta_prefix(N, precision);
    rep.horizon = zeta.truncation();
    for (unsigned lambda = 0; lambda <= max_lambda; ++lambda) {
        const FormalSeries dz = zeta.differentiate_s(lambda);
        for (unsigned nu = 0; nu <= max_nu; ++nu) {
            FormalSeries lhs = integer_shift(dz, nu);
            for (unsigned mu = 0; mu <= max_mu; ++mu) {
                if (mu > 0) {
                    lhs = x_euler(lhs);
                }
                const FormalSeries rhs = integer_shift(dz, static_cast<long>(mu + nu));
                const FormalSeries r = lhs - rhs;
                HilbertCheck c{mu, nu, lambda, r.is_zero(), std::nullopt};
                if (!c.zero) {
                    c.leading = r.leading_term()->exponent;
                }
                rep.checks.push_back(c);
            }
        }
    }
    return rep;
}

} // namespace dforge

#endif
