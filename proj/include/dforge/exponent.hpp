#ifndef DFORGE_EXPONENT_HPP
#define DFORGE_EXPONENT_HPP

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include <dforge/error.hpp>
#include <dforge/interval.hpp>
#include <dforge/rational.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

// Exact exponent: a rational combination of basis symbols plus a rational
// multiple of ONE. Zero coordinates are never stored.
class Exponent
{
public:
    using Coords = std::map<std::string, Rational, std::less<>>;

    Exponent() = default;

    static Exponent constant(const Rational &q)
    {
        Exponent e;
        e.m_const = q;
        return e;
    }
    static Exponent symbol(std::string name, const Rational &q = Rational(1))
    {
        Exponent e;
        if (name == one_symbol) {
            e.m_const = q;
        } else if (q != 0) {
            e.m_coords.emplace(std::move(name), q);
        }
        return e;
    }

    const Coords &coords() const
    {
        return m_coords;
    }
    const Rational &constant_part() const
    {
        return m_const;
    }
    Rational coord(std::string_view name) const
    {
        if (name == one_symbol) {
            return m_const;
        }
        auto it = m_coords.find(name);
        return it == m_coords.end() ? Rational(0) : it->second;
    }
    bool is_zero() const
    {
        return m_coords.empty() && m_const == 0;
    }
    // True when every coordinate (ONE included) is an integer.
    bool is_integral() const
    {
        if (m_const.get_den() != 1) {
            return false;
        }
        for (const auto &[_, q] : m_coords) {
            if (q.get_den() != 1) {
                return false;
            }
        }
        return true;
    }

    Exponent &operator+=(const Exponent &o)
    {
        m_const += o.m_const;
        for (const auto &[name, q] : o.m_coords) {
            auto [it, inserted] = m_coords.try_emplace(name, q);
            if (!inserted) {
                it->second += q;
                if (it->second == 0) {
                    m_coords.erase(it);
                }
            }
        }
        return *this;
    }
    Exponent &operator-=(const Exponent &o)
    {
        return *this += -o;
    }
    friend Exponent operator+(Exponent a, const Exponent &b)
    {
        return a += b;
    }
    friend Exponent operator-(Exponent a, const Exponent &b)
    {
        return a -= b;
    }
    friend Exponent operator-(Exponent a)
    {
        a.m_const = -a.m_const;
        for (auto &[_, q] : a.m_coords) {
            q = -q;
        }
        return a;
    }
    friend Exponent operator*(const Rational &k, Exponent a)
    {
        if (k == 0) {
            return Exponent();
        }
        a.m_const *= k;
        for (auto &[_, q] : a.m_coords) {
            q *= k;
        }
        return a;
    }

    friend bool operator==(const Exponent &a, const Exponent &b)
    {
        return a.m_const == b.m_const && a.m_coords == b.m_coords;
    }

    // Structural (not numeric) order, for use as a map key.
    friend bool structurally_less(const Exponent &a, const Exponent &b)
    {
        if (a.m_const != b.m_const) {
            return a.m_const < b.m_const;
        }
        return a.m_coords < b.m_coords;
    }

    void check_basis(const SymbolBasis &basis) const
    {
        for (const auto &[name, _] : m_coords) {
            if (!basis.contains(name)) {
                throw Error(ErrorCode::BadBasis, "exponent references unknown symbol '" + name + "'");
            }
        }
    }

    Interval numeric(const SymbolBasis &basis) const
    {
        Interval r = Interval::exact(m_const, basis.precision());
        for (const auto &[name, q] : m_coords) {
            r = r + Interval::exact(q, basis.precision()) * basis.value(name);
        }
        return r;
    }

    // e.g. "2*L2 + L3 - 1/2"; the constant part is written last.
    std::string to_string() const
    {
        std::string out;
        auto emit = [&out](const Rational &q, const std::string &name) {
            Rational a = abs(q);
            if (out.empty()) {
                out += q < 0 ? "-" : "";
            } else {
                out += q < 0 ? " - " : " + ";
            }
            if (name.empty()) {
                out += dforge::to_string(a);
            } else {
                if (a != 1) {
                    out += dforge::to_string(a) + "*";
                }
                out += name;
            }
        };
        for (const auto &[name, q] : m_coords) {
            emit(q, name);
        }
        if (m_const != 0) {
            emit(m_const, "");
        }
        return out.empty() ? "0" : out;
    }

private:
    Coords m_coords;
    Rational m_const{0};
};

struct ExponentLess {
    bool operator()(const Exponent &a, const Exponent &b) const
    {
        return structurally_less(a, b);
    }
};

// Outcome of a numeric comparison. `tie` is set when the enclosures of the two
// values overlap at the working precision while the exponents differ; `sign`
// then falls back to the structural order.
struct Comparison {
    int sign = 0;
    bool tie = false;
};

inline Comparison compare(const Exponent &a, const Exponent &b, const SymbolBasis &basis)
{
    if (a == b) {
        return {0, false};
    }
    Interval d = (a - b).numeric(basis);
    if (d.certainly_positive()) {
        return {1, false};
    }
    if (d.certainly_negative()) {
        return {-1, false};
    }
    return {structurally_less(a, b) ? -1 : 1, true};
}

} // namespace dforge

#endif
