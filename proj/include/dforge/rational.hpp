#ifndef DFORGE_RATIONAL_HPP
#define DFORGE_RATIONAL_HPP

#include <cctype>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include <dforge/error.hpp>

namespace dforge
{

using Integer = mpz_class;
using Rational = mpq_class;

// Accepts "p", "-p", "p/q". Decimal points and exponents are rejected: rationals
// travel as exact strings, never floats.
inline Rational parse_rational(std::string_view text)
{
    std::string s;
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            s.push_back(ch);
        }
    }
    if (s.empty()) {
        throw Error(ErrorCode::SyntaxError, "empty rational");
    }
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        ++i;
    }
    bool seen_slash = false;
    bool digits_before = false, digits_after = false;
    for (; i < s.size(); ++i) {
        const char ch = s[i];
        if (ch == '/') {
            if (seen_slash || !digits_before) {
                throw Error(ErrorCode::SyntaxError, "malformed rational '" + s + "'");
            }
            seen_slash = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            (seen_slash ? digits_after : digits_before) = true;
        } else {
            throw Error(ErrorCode::SyntaxError, "malformed rational '" + s + "'");
        }
    }
    if (!digits_before || (seen_slash && !digits_after)) {
        throw Error(ErrorCode::SyntaxError, "malformed rational '" + s + "'");
    }
    if (s[0] == '+') {
        s.erase(0, 1);
    }
    Rational q;
    if (q.set_str(s, 10) != 0) {
        throw Error(ErrorCode::SyntaxError, "malformed rational '" + s + "'");
    }
    if (q.get_den() == 0) {
        throw Error(ErrorCode::SyntaxError, "zero denominator in '" + s + "'");
    }
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational &q)
{
    return q.get_str(10);
}

inline std::string to_string(const Integer &z)
{
    return z.get_str(10);
}

inline Rational rational_pow(const Rational &base, long e)
{
    if (e == 0) {
        return Rational(1);
    }
    if (e < 0) {
        if (base == 0) {
            throw Error(ErrorCode::ZeroScalar, "negative power of zero");
        }
        return Rational(1) / rational_pow(base, -e);
    }
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Integer integer_lcm(const Integer &a, const Integer &b)
{
    Integer r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer integer_gcd(const Integer &a, const Integer &b)
{
    Integer r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

} // namespace dforge

#endif
