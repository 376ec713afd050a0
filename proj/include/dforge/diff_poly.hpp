#ifndef DFORGE_DIFF_POLY_HPP
#define DFORGE_DIFF_POLY_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/determinant.hpp>
#include <dforge/error.hpp>
#include <dforge/rational.hpp>
#include <dforge/series.hpp>

namespace dforge
{

// f^(order)(s + shift). Ordered by (shift, order).
struct DiffIndeterminate {
    unsigned order = 0;
    Rational shift{0};

    friend bool operator==(const DiffIndeterminate &, const DiffIndeterminate &) = default;
    friend bool operator<(const DiffIndeterminate &a, const DiffIndeterminate &b)
    {
        if (a.shift != b.shift) {
            return a.shift < b.shift;
        }
        return a.order < b.order;
    }

    DiffIndeterminate derivative() const
    {
        return {order + 1, shift};
    }

    std::string to_string() const
    {
        std::string out = "f" + std::string(order, '\'');
        if (shift > 0) {
            out += "(s+" + dforge::to_string(shift) + ")";
        } else if (shift < 0) {
            out += "(s-" + dforge::to_string(Rational(-shift)) + ")";
        }
        return out;
    }
};

// x^x_degree * prod z^k over indeterminates z. Zero powers are never stored.
struct DiffMonomial {
    unsigned x_degree = 0;
    std::map<DiffIndeterminate, unsigned> powers;

    unsigned f_degree() const
    {
        unsigned d = 0;
        for (const auto &[_, k] : powers) {
            d += k;
        }
        return d;
    }

    friend bool operator==(const DiffMonomial &, const DiffMonomial &) = default;
    friend bool operator<(const DiffMonomial &a, const DiffMonomial &b)
    {
        if (a.x_degree != b.x_degree) {
            return a.x_degree < b.x_degree;
        }
        return a.powers < b.powers;
    }
    friend DiffMonomial operator*(const DiffMonomial &a, const DiffMonomial &b)
    {
        DiffMonomial r = a;
        r.x_degree += b.x_degree;
        for (const auto &[z, k] : b.powers) {
            r.powers[z] += k;
        }
        return r;
    }

    std::string to_string() const
    {
        std::string out;
        auto add = [&out](const std::string &factor) {
            if (!out.empty()) {
                out += "*";
            }
            out += factor;
        };
        if (x_degree == 1) {
            add("x");
        } else if (x_degree > 1) {
            add("x^" + std::to_string(x_degree));
        }
        for (const auto &[z, k] : powers) {
            add(k == 1 ? z.to_string() : z.to_string() + "^" + std::to_string(k));
        }
        return out;
    }
};

// Sparse polynomial in x and the indeterminates f^(nu)(s+h), with Coefficient
// entries. The zero polynomial is the empty map.
class DiffPolynomial
{
public:
    using Terms = std::map<DiffMonomial, Coefficient>;

    DiffPolynomial() = default;
    DiffPolynomial(const Coefficient &c)
    {
        if (!c.is_zero()) {
            m_terms.emplace(DiffMonomial{}, c);
        }
    }
    DiffPolynomial(const Rational &q) : DiffPolynomial(Coefficient(q)) {}
    DiffPolynomial(long q) : DiffPolynomial(Coefficient(q)) {}
    DiffPolynomial(int q) : DiffPolynomial(Coefficient(q)) {}

    static DiffPolynomial x(unsigned degree = 1)
    {
        return monomial(DiffMonomial{degree, {}}, Coefficient(1));
    }
    static DiffPolynomial f(unsigned order = 0, const Rational &shift = Rational(0))
    {
        DiffMonomial m;
        m.powers.emplace(DiffIndeterminate{order, shift}, 1u);
        return monomial(std::move(m), Coefficient(1));
    }
    static DiffPolynomial indeterminate(const DiffIndeterminate &z)
    {
        return f(z.order, z.shift);
    }
    static DiffPolynomial monomial(DiffMonomial m, const Coefficient &c)
    {
        DiffPolynomial p;
        if (!c.is_zero()) {
            p.m_terms.emplace(std::move(m), c);
        }
        return p;
    }

    const Terms &terms() const
    {
        return m_terms;
    }
    bool is_zero() const
    {
        return m_terms.empty();
    }

    // Total degree in the f-indeterminates.
    unsigned total_degree() const
    {
        unsigned d = 0;
        for (const auto &[m, _] : m_terms) {
            d = std::max(d, m.f_degree());
        }
        return d;
    }
    unsigned x_degree() const
    {
        unsigned d = 0;
        for (const auto &[m, _] : m_terms) {
            d = std::max(d, m.x_degree);
        }
        return d;
    }
    unsigned max_order() const
    {
        unsigned d = 0;
        for (const auto &[m, _] : m_terms) {
            for (const auto &[z, __] : m.powers) {
                d = std::max(d, z.order);
            }
        }
        return d;
    }
    bool has_shifts() const
    {
        for (const auto &[m, _] : m_terms) {
            for (const auto &[z, __] : m.powers) {
                if (z.shift != 0) {
                    return true;
                }
            }
        }
        return false;
    }
    std::vector<DiffIndeterminate> indeterminates() const
    {
        std::vector<DiffIndeterminate> out;
        for (const auto &[m, _] : m_terms) {
            for (const auto &[z, __] : m.powers) {
                out.push_back(z);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    // True when every coefficient is a rational number (no symbols, no multipliers).
    bool has_rational_coefficients() const
    {
        return std::all_of(m_terms.begin(), m_terms.end(), [](const auto &t) { return t.second.is_constant(); });
    }

    DiffPolynomial &operator+=(const DiffPolynomial &o)
    {
        for (const auto &[m, c] : o.m_terms) {
            auto [it, inserted] = m_terms.try_emplace(m, c);
            if (!inserted) {
                it->second += c;
                if (it->second.is_zero()) {
                    m_terms.erase(it);
                }
            }
        }
        return *this;
    }
    DiffPolynomial &operator-=(const DiffPolynomial &o)
    {
        return *this += -o;
    }
    friend DiffPolynomial operator+(DiffPolynomial a, const DiffPolynomial &b)
    {
        return a += b;
    }
    friend DiffPolynomial operator-(DiffPolynomial a, const DiffPolynomial &b)
    {
        return a -= b;
    }
    friend DiffPolynomial operator-(DiffPolynomial a)
    {
        for (auto &[_, c] : a.m_terms) {
            c = -c;
        }
        return a;
    }
    friend DiffPolynomial operator*(const DiffPolynomial &a, const DiffPolynomial &b)
    {
        DiffPolynomial r;
        for (const auto &[ma, ca] : a.m_terms) {
            for (const auto &[mb, cb] : b.m_terms) {
                r += monomial(ma * mb, ca * cb);
            }
        }
        return r;
    }
    DiffPolynomial &operator*=(const DiffPolynomial &o)
    {
        return *this = *this * o;
    }
    DiffPolynomial pow(unsigned e) const
    {
        DiffPolynomial r(1);
        for (unsigned i = 0; i < e; ++i) {
            r *= *this;
        }
        return r;
    }
    DiffPolynomial scaled(const Coefficient &c) const
    {
        DiffPolynomial r;
        for (const auto &[m, a] : m_terms) {
            r += monomial(m, a * c);
        }
        return r;
    }

    friend bool operator==(const DiffPolynomial &a, const DiffPolynomial &b)
    {
        return a.m_terms == b.m_terms;
    }

    // Formal partial derivative with respect to one indeterminate.
    DiffPolynomial partial(const DiffIndeterminate &z) const
    {
        DiffPolynomial r;
        for (const auto &[m, c] : m_terms) {
            auto it = m.powers.find(z);
            if (it == m.powers.end()) {
                continue;
            }
            DiffMonomial d = m;
            const unsigned k = it->second;
            if (k == 1) {
                d.powers.erase(z);
            } else {
                d.powers[z] = k - 1;
            }
            r += monomial(std::move(d), Rational(static_cast<long>(k)) * c);
        }
        return r;
    }

    DiffPolynomial partial_x() const
    {
        DiffPolynomial r;
        for (const auto &[m, c] : m_terms) {
            if (m.x_degree == 0) {
                continue;
            }
            DiffMonomial d = m;
            --d.x_degree;
            r += monomial(std::move(d), Rational(static_cast<long>(m.x_degree)) * c);
        }
        return r;
    }

    // d/ds of F(x, f^(nu)(s+h)) where x is the independent variable itself:
    //   dF = dF/dx + sum_z dF/dz * z'.
    // Coefficients are constants in s.
    DiffPolynomial total_derivative() const
    {
        DiffPolynomial r = partial_x();
        for (const auto &z : indeterminates()) {
            r += partial(z) * indeterminate(z.derivative());
        }
        return r;
    }

    // Coefficients of x^0, x^1, ... (each x-free), trailing zeros removed.
    std::vector<DiffPolynomial> as_x_polynomial() const
    {
        std::vector<DiffPolynomial> out(x_degree() + (m_terms.empty() ? 0 : 1));
        for (const auto &[m, c] : m_terms) {
            DiffMonomial d = m;
            d.x_degree = 0;
            out[m.x_degree] += monomial(std::move(d), c);
        }
        while (!out.empty() && out.back().is_zero()) {
            out.pop_back();
        }
        return out;
    }

    static DiffPolynomial from_x_polynomial(const std::vector<DiffPolynomial> &coeffs)
    {
        DiffPolynomial r;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            r += coeffs[i] * x(static_cast<unsigned>(i));
        }
        return r;
    }

    // Pretty form accepted back by parse_diffpoly.
    std::string to_string() const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string out;
        for (const auto &[m, c] : m_terms) {
            std::string mono = m.to_string();
            std::string coeff = c.to_string();
            bool negative = false;
            if (c.is_monomial() && c.terms().begin()->second < 0) {
                negative = true;
                coeff = (-c).to_string();
            }
            std::string piece;
            if (mono.empty()) {
                piece = coeff;
            } else if (coeff == "1") {
                piece = mono;
            } else if (c.is_monomial()) {
                piece = coeff + "*" + mono;
            } else {
                piece = "(" + coeff + ")*" + mono;
            }
            if (out.empty()) {
                out = negative ? "-" + piece : piece;
            } else {
                out += negative ? " - " : " + ";
                out += piece;
            }
        }
        return out;
    }

private:
    Terms m_terms;
};

inline DiffPolynomial partial_wrt(const DiffPolynomial &F, const DiffIndeterminate &z)
{
    return F.partial(z);
}

inline DiffPolynomial total_derivative_s(const DiffPolynomial &F)
{
    return F.total_derivative();
}

// Resultant in x of A = sum A[i] x^i and B = sum B[i] x^i. The Sylvester matrix
// lists the deg(B) rows of A first, then the deg(A) rows of B, with columns in
// ascending powers of x:
//   Res(x - a, x - b) = b - a,   Res(x^2 - f, 2x - f') = 4f - f'^2.
// This is (-1)^(N(N-1)/2) times the descending-column determinant, N = deg A + deg B.
inline DiffPolynomial sylvester_resultant(std::vector<DiffPolynomial> A, std::vector<DiffPolynomial> B)
{
    auto trim = [](std::vector<DiffPolynomial> &p) {
        while (!p.empty() && p.back().is_zero()) {
            p.pop_back();
        }
    };
    trim(A);
    trim(B);
    if (A.empty() || B.empty()) {
        if (A.size() <= 1 && B.size() <= 1) {
            throw Error(ErrorCode::DegenerateInput, "resultant of polynomials of degree 0 in x");
        }
        return DiffPolynomial();
    }
    const std::size_t m = A.size() - 1;
    const std::size_t n = B.size() - 1;
    if (m == 0 && n == 0) {
        throw Error(ErrorCode::DegenerateInput, "resultant of polynomials of degree 0 in x");
    }
    const std::size_t N = m + n;
    Matrix<DiffPolynomial> S(N, std::vector<DiffPolynomial>(N));
    // Row i of the A block holds A shifted by x^(n-1-i); row j of the B block
    // holds B shifted by x^(m-1-j). Column c is the coefficient of x^c.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t shift = n - 1 - i;
        for (std::size_t k = 0; k <= m; ++k) {
            S[i][shift + k] = A[k];
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t shift = m - 1 - j;
        for (std::size_t k = 0; k <= n; ++k) {
            S[n + j][shift + k] = B[k];
        }
    }
    return determinant(S, DiffPolynomial(), DiffPolynomial(1), [](const DiffPolynomial &p) { return p.is_zero(); });
}

// Result of splitting off the monomial content (x-power and f-monomial common to
// all terms) of a polynomial.
struct ContentSplit {
    DiffMonomial content;
    DiffPolynomial primitive;
};

inline ContentSplit split_monomial_content(const DiffPolynomial &F)
{
    ContentSplit out;
    if (F.is_zero()) {
        return out;
    }
    bool first = true;
    for (const auto &[m, _] : F.terms()) {
        if (first) {
            out.content = m;
            first = false;
            continue;
        }
        out.content.x_degree = std::min(out.content.x_degree, m.x_degree);
        for (auto it = out.content.powers.begin(); it != out.content.powers.end();) {
            auto jt = m.powers.find(it->first);
            if (jt == m.powers.end()) {
                it = out.content.powers.erase(it);
            } else {
                it->second = std::min(it->second, jt->second);
                ++it;
            }
        }
    }
    for (const auto &[m, c] : F.terms()) {
        DiffMonomial d = m;
        d.x_degree -= out.content.x_degree;
        for (const auto &[z, k] : out.content.powers) {
            if (d.powers[z] == k) {
                d.powers.erase(z);
            } else {
                d.powers[z] -= k;
            }
        }
        out.primitive += DiffPolynomial::monomial(std::move(d), c);
    }
    return out;
}

struct EliminationOptions {
    // Divide out the monomial content of F before eliminating (x^k and common
    // f-monomials); a narrow substitute for factoring F.
    bool split_content = false;
};

// F** = Res_x(F, dF/ds). Every solution of F = 0 satisfies F** = 0.
inline DiffPolynomial eliminate_x(const DiffPolynomial &F, const EliminationOptions &opts = {})
{
    if (F.is_zero()) {
        throw Error(ErrorCode::DegenerateInput, "cannot eliminate x from the zero polynomial");
    }
    DiffPolynomial G = F;
    if (opts.split_content) {
        G = split_monomial_content(F).primitive;
    }
    if (G.x_degree() == 0) {
        return G;
    }
    DiffPolynomial R = sylvester_resultant(G.as_x_polynomial(), G.total_derivative().as_x_polynomial());
    if (R.is_zero()) {
        throw Error(ErrorCode::ResultantVanished,
                    "Res_x(F, dF/ds) vanishes identically; F and its derivative share a factor");
    }
    return R;
}

// Evaluate F on a polynomial solution candidate f = phi(x), where x is the
// independent variable: f^(nu)(x+h) -> phi^(nu)(x+h). Returns a polynomial in x.
inline XPoly evaluate_on_polynomial(const DiffPolynomial &F, const XPoly &phi)
{
    std::map<DiffIndeterminate, XPoly> cache;
    auto value = [&](const DiffIndeterminate &z) -> const XPoly & {
        auto it = cache.find(z);
        if (it != cache.end()) {
            return it->second;
        }
        XPoly d = phi;
        for (unsigned i = 0; i < z.order; ++i) {
            d = xpoly::derivative(d);
        }
        return cache.emplace(z, xpoly::taylor_shift(d, z.shift)).first->second;
    };
    XPoly out;
    for (const auto &[m, c] : F.terms()) {
        XPoly term = xpoly::monomial(m.x_degree, c);
        for (const auto &[z, k] : m.powers) {
            for (unsigned i = 0; i < k; ++i) {
                term = xpoly::mul(term, value(z));
            }
        }
        out = xpoly::add(out, term);
    }
    return out;
}

} // namespace dforge

#endif
