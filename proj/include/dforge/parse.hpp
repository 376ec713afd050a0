#ifndef DFORGE_PARSE_HPP
#define DFORGE_PARSE_HPP

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <dforge/coefficient.hpp>
#include <dforge/diff_poly.hpp>
#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/rational.hpp>
#include <dforge/series.hpp>

namespace dforge
{

struct ParseOptions {
    // When set, identifiers outside this set raise UnknownSymbol.
    std::optional<std::set<std::string, std::less<>>> allowed_symbols;
};

namespace detail
{

// Recursive-descent parser for
//   expr    := ['+'|'-'] term (('+'|'-') term)*
//   term    := factor ('*' factor)*
//   factor  := primary ('^' ['-'] uint)*
//   primary := rational | 'x' | deriv | identifier | '(' expr ')'
//   deriv   := 'f' '\''* ['(' 's' [('+'|'-') rational] ')']
// Identifiers other than f, x, s, E become coefficient symbols; ONE is 1.
// Negative powers are accepted only for coefficient monomials.
class Parser
{
public:
    Parser(std::string_view text, const ParseOptions &opts) : m_text(text), m_opts(opts) {}

    DiffPolynomial parse()
    {
        skip_space();
        DiffPolynomial r = expr();
        skip_space();
        if (m_pos != m_text.size()) {
            fail("unexpected '" + std::string(1, m_text[m_pos]) + "'");
        }
        return r;
    }

private:
    [[noreturn]] void fail(const std::string &what) const
    {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < m_pos && i < m_text.size(); ++i) {
            if (m_text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::SyntaxError,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
    }

    void skip_space()
    {
        while (m_pos < m_text.size() && std::isspace(static_cast<unsigned char>(m_text[m_pos]))) {
            ++m_pos;
        }
    }
    bool peek(char ch)
    {
        skip_space();
        return m_pos < m_text.size() && m_text[m_pos] == ch;
    }
    bool accept(char ch)
    {
        if (peek(ch)) {
            ++m_pos;
            return true;
        }
        return false;
    }
    void expect(char ch)
    {
        if (!accept(ch)) {
            fail(std::string("expected '") + ch + "'");
        }
    }
    bool at_digit()
    {
        skip_space();
        return m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]));
    }
    bool at_ident_start()
    {
        skip_space();
        return m_pos < m_text.size()
               && (std::isalpha(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '_');
    }

    std::string digits()
    {
        std::string out;
        while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
            out.push_back(m_text[m_pos++]);
        }
        return out;
    }

    // digits ['/' digits], no inner whitespace.
    Rational rational()
    {
        if (!at_digit()) {
            fail("expected a number");
        }
        std::string num = digits();
        if (m_pos < m_text.size() && m_text[m_pos] == '.') {
            fail("decimal numbers are not allowed; write p/q");
        }
        if (m_pos + 1 < m_text.size() && m_text[m_pos] == '/'
            && std::isdigit(static_cast<unsigned char>(m_text[m_pos + 1]))) {
            ++m_pos;
            std::string den = digits();
            if (Integer(den) == 0) {
                fail("zero denominator");
            }
            return parse_rational(num + "/" + den);
        }
        return parse_rational(num);
    }

    unsigned long uint()
    {
        if (!at_digit()) {
            fail("expected a non-negative integer exponent");
        }
        std::string d = digits();
        if (d.size() > 6) {
            fail("exponent too large");
        }
        return std::stoul(d);
    }

    std::string identifier()
    {
        std::string out;
        while (m_pos < m_text.size()
               && (std::isalnum(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '_')) {
            out.push_back(m_text[m_pos++]);
        }
        return out;
    }

    DiffPolynomial expr()
    {
        DiffPolynomial r;
        if (accept('-')) {
            r = -term();
        } else {
            accept('+');
            r = term();
        }
        while (true) {
            if (accept('+')) {
                r += term();
            } else if (accept('-')) {
                r -= term();
            } else {
                return r;
            }
        }
    }

    DiffPolynomial term()
    {
        DiffPolynomial r = factor();
        while (accept('*')) {
            r *= factor();
        }
        return r;
    }

    DiffPolynomial factor()
    {
        DiffPolynomial base = primary();
        while (accept('^')) {
            const bool negative = accept('-');
            skip_space();
            const unsigned long e = uint();
            if (!negative) {
                base = base.pow(static_cast<unsigned>(e));
                continue;
            }
            base = invert_monomial(base).pow(static_cast<unsigned>(e));
        }
        return base;
    }

    DiffPolynomial invert_monomial(const DiffPolynomial &p)
    {
        if (p.terms().size() != 1) {
            fail("negative power of a non-monomial");
        }
        const auto &[m, c] = *p.terms().begin();
        if (m.x_degree != 0 || !m.powers.empty() || !c.is_monomial()) {
            fail("negative powers are allowed only for coefficient symbols");
        }
        const auto &[cm, q] = *c.terms().begin();
        Coefficient inv = Coefficient::from_monomial(CoeffMonomial{}, Rational(1) / q).divided_by(cm);
        return DiffPolynomial(inv);
    }

    DiffPolynomial primary()
    {
        if (accept('(')) {
            DiffPolynomial r = expr();
            expect(')');
            return r;
        }
        if (at_digit()) {
            return DiffPolynomial(rational());
        }
        if (!at_ident_start()) {
            if (m_pos >= m_text.size()) {
                fail("unexpected end of input");
            }
            fail("unexpected '" + std::string(1, m_text[m_pos]) + "'");
        }
        const std::size_t start = m_pos;
        std::string name = identifier();
        if (name == "x") {
            return DiffPolynomial::x();
        }
        if (name == "f") {
            return derivative_tail();
        }
        if (name == "ONE") {
            return DiffPolynomial(1);
        }
        if (name == "s" || name == "E") {
            m_pos = start;
            fail("'" + name + "' is reserved");
        }
        if (m_opts.allowed_symbols && !m_opts.allowed_symbols->count(name)) {
            m_pos = start;
            throw Error(ErrorCode::UnknownSymbol, "unknown symbol '" + name + "'");
        }
        return DiffPolynomial(Coefficient::symbol(name));
    }

    DiffPolynomial derivative_tail()
    {
        unsigned order = 0;
        while (m_pos < m_text.size() && m_text[m_pos] == '\'') {
            ++order;
            ++m_pos;
        }
        Rational shift(0);
        if (accept('(')) {
            skip_space();
            if (identifier() != "s") {
                fail("expected 's' in shifted argument");
            }
            if (accept('+')) {
                shift = rational();
            } else if (accept('-')) {
                shift = -rational();
            }
            expect(')');
        }
        return DiffPolynomial::f(order, shift);
    }

    std::string_view m_text;
    const ParseOptions &m_opts;
    std::size_t m_pos = 0;
};

} // namespace detail

inline DiffPolynomial parse_diffpoly(std::string_view text, const ParseOptions &opts = {})
{
    return detail::Parser(text, opts).parse();
}

// A polynomial in x with coefficients in the symbols (no f-indeterminates).
inline XPoly parse_xpoly(std::string_view text, const ParseOptions &opts = {})
{
    DiffPolynomial p = parse_diffpoly(text, opts);
    if (p.total_degree() != 0) {
        throw Error(ErrorCode::SyntaxError, "coefficient '" + std::string(text) + "' mentions f");
    }
    XPoly out;
    for (const auto &c : p.as_x_polynomial()) {
        out.push_back(c.is_zero() ? Coefficient() : c.terms().begin()->second);
    }
    xpoly::trim(out);
    return out;
}

inline Coefficient parse_coefficient(std::string_view text, const ParseOptions &opts = {})
{
    XPoly p = parse_xpoly(text, opts);
    if (p.size() > 1) {
        throw Error(ErrorCode::SyntaxError, "coefficient '" + std::string(text) + "' mentions x");
    }
    return p.empty() ? Coefficient() : p[0];
}

// A rational linear combination of symbols and ONE, e.g. "2*L2 + L3 - 1/2".
inline Exponent parse_exponent(std::string_view text, const ParseOptions &opts = {})
{
    Coefficient c = parse_coefficient(text, opts);
    Exponent e;
    for (const auto &[m, q] : c.terms()) {
        if (!m.shift.is_zero()) {
            throw Error(ErrorCode::SyntaxError, "exponent '" + std::string(text) + "' is not linear");
        }
        if (m.powers.empty()) {
            e += Exponent::constant(q);
        } else if (m.powers.size() == 1 && m.powers.begin()->second == 1) {
            e += Exponent::symbol(m.powers.begin()->first, q);
        } else {
            throw Error(ErrorCode::SyntaxError, "exponent '" + std::string(text) + "' is not linear");
        }
    }
    return e;
}

} // namespace dforge

#endif
