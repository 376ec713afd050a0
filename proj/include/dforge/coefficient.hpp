#ifndef DFORGE_COEFFICIENT_HPP
#define DFORGE_COEFFICIENT_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/interval.hpp>
#include <dforge/rational.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

// Monomial  prod sym^k * E(shift), where E(mu) stands for exp(-mu) with mu an
// exact exponent. Symbol powers may be negative (Laurent monomials), which
// keeps rescaling by c^alpha with negative alpha exact.
struct CoeffMonomial {
    std::map<std::string, int, std::less<>> powers;
    Exponent shift;

    bool is_one() const
    {
        return powers.empty() && shift.is_zero();
    }

    friend bool operator==(const CoeffMonomial &, const CoeffMonomial &) = default;

    friend CoeffMonomial operator*(const CoeffMonomial &a, const CoeffMonomial &b)
    {
        CoeffMonomial r = a;
        for (const auto &[name, k] : b.powers) {
            auto [it, inserted] = r.powers.try_emplace(name, k);
            if (!inserted) {
                it->second += k;
                if (it->second == 0) {
                    r.powers.erase(it);
                }
            }
        }
        r.shift += b.shift;
        return r;
    }
};

struct CoeffMonomialLess {
    bool operator()(const CoeffMonomial &a, const CoeffMonomial &b) const
    {
        if (a.powers != b.powers) {
            return a.powers < b.powers;
        }
        return structurally_less(a.shift, b.shift);
    }
};

// Sparse Laurent polynomial with exact rational coefficients over the basis
// symbols (and free symbols such as auxiliary scalars) and shift multipliers.
// The zero coefficient is the empty map.
class Coefficient
{
public:
    using Terms = std::map<CoeffMonomial, Rational, CoeffMonomialLess>;

    Coefficient() = default;
    Coefficient(const Rational &q)
    {
        if (q != 0) {
            m_terms.emplace(CoeffMonomial{}, q);
        }
    }
    Coefficient(long q) : Coefficient(Rational(q)) {}
    Coefficient(int q) : Coefficient(Rational(q)) {}

    static Coefficient symbol(std::string name, int power = 1)
    {
        CoeffMonomial m;
        if (power != 0) {
            m.powers.emplace(std::move(name), power);
        }
        return from_monomial(std::move(m), Rational(1));
    }
    // E(mu) = exp(-mu).
    static Coefficient multiplier(Exponent mu)
    {
        CoeffMonomial m;
        m.shift = std::move(mu);
        return from_monomial(std::move(m), Rational(1));
    }
    static Coefficient from_monomial(CoeffMonomial m, const Rational &q)
    {
        Coefficient c;
        if (q != 0) {
            c.m_terms.emplace(std::move(m), q);
        }
        return c;
    }
    // The exponent read as a linear polynomial in its symbols.
    static Coefficient from_exponent(const Exponent &e)
    {
        Coefficient c(e.constant_part());
        for (const auto &[name, q] : e.coords()) {
            c += Rational(q) * symbol(name);
        }
        return c;
    }

    const Terms &terms() const
    {
        return m_terms;
    }
    bool is_zero() const
    {
        return m_terms.empty();
    }
    bool is_constant() const
    {
        return m_terms.empty() || (m_terms.size() == 1 && m_terms.begin()->first.is_one());
    }
    Rational constant_value() const
    {
        auto it = m_terms.find(CoeffMonomial{});
        return it == m_terms.end() ? Rational(0) : it->second;
    }
    bool is_monomial() const
    {
        return m_terms.size() == 1;
    }

    Coefficient &operator+=(const Coefficient &o)
    {
        for (const auto &[m, q] : o.m_terms) {
            auto [it, inserted] = m_terms.try_emplace(m, q);
            if (!inserted) {
                it->second += q;
                if (it->second == 0) {
                    m_terms.erase(it);
                }
            }
        }
        return *this;
    }
    Coefficient &operator-=(const Coefficient &o)
    {
        return *this += -o;
    }
    friend Coefficient operator+(Coefficient a, const Coefficient &b)
    {
        return a += b;
    }
    friend Coefficient operator-(Coefficient a, const Coefficient &b)
    {
        return a -= b;
    }
    friend Coefficient operator-(Coefficient a)
    {
        for (auto &[_, q] : a.m_terms) {
            q = -q;
        }
        return a;
    }
    friend Coefficient operator*(const Coefficient &a, const Coefficient &b)
    {
        Coefficient r;
        for (const auto &[ma, qa] : a.m_terms) {
            for (const auto &[mb, qb] : b.m_terms) {
                Rational q = qa * qb;
                auto [it, inserted] = r.m_terms.try_emplace(ma * mb, q);
                if (!inserted) {
                    it->second += q;
                    if (it->second == 0) {
                        r.m_terms.erase(it);
                    }
                }
            }
        }
        return r;
    }
    Coefficient &operator*=(const Coefficient &o)
    {
        return *this = *this * o;
    }
    friend Coefficient operator*(const Rational &k, Coefficient a)
    {
        if (k == 0) {
            return Coefficient();
        }
        for (auto &[_, q] : a.m_terms) {
            q *= k;
        }
        return a;
    }
    Coefficient pow(unsigned e) const
    {
        Coefficient r(1);
        for (unsigned i = 0; i < e; ++i) {
            r *= *this;
        }
        return r;
    }

    friend bool operator==(const Coefficient &a, const Coefficient &b)
    {
        return a.m_terms == b.m_terms;
    }

    // Formal partial derivative in a named symbol (shift multipliers are constants).
    Coefficient derivative(std::string_view name) const
    {
        Coefficient r;
        for (const auto &[m, q] : m_terms) {
            auto it = m.powers.find(name);
            if (it == m.powers.end()) {
                continue;
            }
            CoeffMonomial d = m;
            auto dit = d.powers.find(name);
            const int k = dit->second;
            if (--dit->second == 0) {
                d.powers.erase(dit);
            }
            r += from_monomial(std::move(d), q * k);
        }
        return r;
    }

    std::set<std::string, std::less<>> symbols() const
    {
        std::set<std::string, std::less<>> out;
        for (const auto &[m, _] : m_terms) {
            for (const auto &[name, __] : m.powers) {
                out.insert(name);
            }
        }
        return out;
    }
    bool has_multipliers() const
    {
        for (const auto &[m, _] : m_terms) {
            if (!m.shift.is_zero()) {
                return true;
            }
        }
        return false;
    }

    // Numeric enclosure; every symbol must have a value in the basis.
    Interval numeric(const SymbolBasis &basis) const
    {
        const auto prec = basis.precision();
        Interval r = Interval::exact(Rational(0), prec);
        for (const auto &[m, q] : m_terms) {
            Interval t = Interval::exact(q, prec);
            for (const auto &[name, k] : m.powers) {
                Interval v = basis.value(name);
                if (k < 0) {
                    t = t / v.pow(static_cast<unsigned long>(-k));
                } else {
                    t = t * v.pow(static_cast<unsigned long>(k));
                }
            }
            if (!m.shift.is_zero()) {
                t = t * (-m.shift.numeric(basis)).exp();
            }
            r = r + t;
        }
        return r;
    }

    // Greatest common monomial divisor of all terms (Laurent: minimum power per
    // symbol, shift of the first term); rational part 1. Dividing by it keeps
    // polynomial identities intact.
    static CoeffMonomial monomial_content(const std::vector<const Coefficient *> &cs)
    {
        CoeffMonomial g;
        bool first = true;
        std::set<std::string, std::less<>> names;
        for (const auto *c : cs) {
            for (const auto &[m, _] : c->m_terms) {
                for (const auto &[n, __] : m.powers) {
                    names.insert(n);
                }
            }
        }
        for (const auto &n : names) {
            int lo = 0;
            bool seen = false;
            for (const auto *c : cs) {
                for (const auto &[m, _] : c->m_terms) {
                    auto it = m.powers.find(n);
                    int k = it == m.powers.end() ? 0 : it->second;
                    lo = seen ? std::min(lo, k) : k;
                    seen = true;
                }
            }
            if (lo != 0) {
                g.powers.emplace(n, lo);
            }
        }
        for (const auto *c : cs) {
            for (const auto &[m, _] : c->m_terms) {
                if (first) {
                    g.shift = m.shift;
                    first = false;
                }
            }
        }
        return g;
    }

    // Multiply by the inverse of a monomial (exact in the Laurent ring).
    Coefficient divided_by(const CoeffMonomial &g) const
    {
        CoeffMonomial inv;
        for (const auto &[n, k] : g.powers) {
            inv.powers.emplace(n, -k);
        }
        inv.shift = -g.shift;
        Coefficient r;
        for (const auto &[m, q] : m_terms) {
            r.m_terms.emplace(m * inv, q);
        }
        return r;
    }

    std::string to_string() const
    {
        if (m_terms.empty()) {
            return "0";
        }
        std::string out;
        for (const auto &[m, q] : m_terms) {
            Rational a = abs(q);
            if (out.empty()) {
                out += q < 0 ? "-" : "";
            } else {
                out += q < 0 ? " - " : " + ";
            }
            std::string factors;
            for (const auto &[name, k] : m.powers) {
                if (!factors.empty()) {
                    factors += "*";
                }
                factors += name;
                if (k != 1) {
                    factors += "^" + std::to_string(k);
                }
            }
            if (!m.shift.is_zero()) {
                if (!factors.empty()) {
                    factors += "*";
                }
                factors += "E(" + m.shift.to_string() + ")";
            }
            if (factors.empty()) {
                out += dforge::to_string(a);
            } else if (a == 1) {
                out += factors;
            } else {
                out += dforge::to_string(a) + "*" + factors;
            }
        }
        return out;
    }

private:
    Terms m_terms;
};

} // namespace dforge

#endif
