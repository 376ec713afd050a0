#ifndef DFORGE_INTERVAL_HPP
#define DFORGE_INTERVAL_HPP

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>

#include <gmp.h>
#include <mpfr.h>

#include <dforge/error.hpp>
#include <dforge/rational.hpp>

namespace dforge
{

// Owning wrapper around an mpfr_t.
class BigFloat
{
public:
    explicit BigFloat(mpfr_prec_t prec = 128)
    {
        mpfr_init2(m_v, prec);
        mpfr_set_zero(m_v, 1);
    }
    BigFloat(const BigFloat &o)
    {
        mpfr_init2(m_v, mpfr_get_prec(o.m_v));
        mpfr_set(m_v, o.m_v, MPFR_RNDN);
    }
    BigFloat(BigFloat &&o) noexcept
    {
        mpfr_init2(m_v, mpfr_get_prec(o.m_v));
        mpfr_swap(m_v, o.m_v);
    }
    BigFloat &operator=(const BigFloat &o)
    {
        if (this != &o) {
            mpfr_set_prec(m_v, mpfr_get_prec(o.m_v));
            mpfr_set(m_v, o.m_v, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat &operator=(BigFloat &&o) noexcept
    {
        mpfr_swap(m_v, o.m_v);
        return *this;
    }
    ~BigFloat()
    {
        mpfr_clear(m_v);
    }

    mpfr_ptr get()
    {
        return m_v;
    }
    mpfr_srcptr get() const
    {
        return m_v;
    }
    mpfr_prec_t precision() const
    {
        return mpfr_get_prec(m_v);
    }
    double to_double() const
    {
        return mpfr_get_d(m_v, MPFR_RNDN);
    }

private:
    mpfr_t m_v;
};

// Closed interval [lo, hi] with outward-rounded endpoints. Every operation
// returns an enclosure of the exact real result.
class Interval
{
public:
    explicit Interval(mpfr_prec_t prec = 128) : m_lo(prec), m_hi(prec) {}

    static Interval exact(const Rational &q, mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_set_q(r.m_lo.get(), q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(r.m_hi.get(), q.get_mpq_t(), MPFR_RNDU);
        return r;
    }

    static Interval from_decimal(const std::string &text, mpfr_prec_t prec)
    {
        Interval r(prec);
        char *end = nullptr;
        mpfr_strtofr(r.m_lo.get(), text.c_str(), &end, 10, MPFR_RNDD);
        if (end == text.c_str() || *end != '\0') {
            throw Error(ErrorCode::SyntaxError, "malformed decimal '" + text + "'");
        }
        mpfr_strtofr(r.m_hi.get(), text.c_str(), &end, 10, MPFR_RNDU);
        return r;
    }

    static Interval log_of(const Rational &q, mpfr_prec_t prec)
    {
        return exact(q, prec + 16).log().rounded(prec);
    }

    mpfr_prec_t precision() const
    {
        return m_lo.precision();
    }
    const BigFloat &lo() const
    {
        return m_lo;
    }
    const BigFloat &hi() const
    {
        return m_hi;
    }

    Interval rounded(mpfr_prec_t prec) const
    {
        Interval r(prec);
        mpfr_set(r.m_lo.get(), m_lo.get(), MPFR_RNDD);
        mpfr_set(r.m_hi.get(), m_hi.get(), MPFR_RNDU);
        return r;
    }

    friend Interval operator+(const Interval &a, const Interval &b)
    {
        Interval r(std::max(a.precision(), b.precision()));
        mpfr_add(r.m_lo.get(), a.m_lo.get(), b.m_lo.get(), MPFR_RNDD);
        mpfr_add(r.m_hi.get(), a.m_hi.get(), b.m_hi.get(), MPFR_RNDU);
        return r;
    }
    friend Interval operator-(const Interval &a)
    {
        Interval r(a.precision());
        mpfr_neg(r.m_lo.get(), a.m_hi.get(), MPFR_RNDD);
        mpfr_neg(r.m_hi.get(), a.m_lo.get(), MPFR_RNDU);
        return r;
    }
    friend Interval operator-(const Interval &a, const Interval &b)
    {
        return a + (-b);
    }
    friend Interval operator*(const Interval &a, const Interval &b)
    {
        const mpfr_prec_t prec = std::max(a.precision(), b.precision());
        Interval r(prec);
        BigFloat t(prec);
        bool first = true;
        for (const BigFloat *x : {&a.m_lo, &a.m_hi}) {
            for (const BigFloat *y : {&b.m_lo, &b.m_hi}) {
                mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDD);
                if (first || mpfr_less_p(t.get(), r.m_lo.get())) {
                    mpfr_set(r.m_lo.get(), t.get(), MPFR_RNDD);
                }
                mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDU);
                if (first || mpfr_greater_p(t.get(), r.m_hi.get())) {
                    mpfr_set(r.m_hi.get(), t.get(), MPFR_RNDU);
                }
                first = false;
            }
        }
        return r;
    }
    // Division by an interval that does not contain zero.
    friend Interval operator/(const Interval &a, const Interval &b)
    {
        if (b.contains_zero()) {
            throw Error(ErrorCode::PrecisionTie, "interval division by an enclosure of zero");
        }
        Interval inv(b.precision());
        mpfr_ui_div(inv.m_lo.get(), 1, b.m_hi.get(), MPFR_RNDD);
        mpfr_ui_div(inv.m_hi.get(), 1, b.m_lo.get(), MPFR_RNDU);
        return a * inv;
    }

    Interval exp() const
    {
        Interval r(precision());
        mpfr_exp(r.m_lo.get(), m_lo.get(), MPFR_RNDD);
        mpfr_exp(r.m_hi.get(), m_hi.get(), MPFR_RNDU);
        return r;
    }
    Interval log() const
    {
        if (!certainly_positive()) {
            throw Error(ErrorCode::PrecisionTie, "logarithm of an interval not certainly positive");
        }
        Interval r(precision());
        mpfr_log(r.m_lo.get(), m_lo.get(), MPFR_RNDD);
        mpfr_log(r.m_hi.get(), m_hi.get(), MPFR_RNDU);
        return r;
    }
    Interval abs() const
    {
        if (mpfr_sgn(m_lo.get()) >= 0) {
            return *this;
        }
        if (mpfr_sgn(m_hi.get()) <= 0) {
            return -*this;
        }
        Interval r(precision());
        mpfr_set_zero(r.m_lo.get(), 1);
        if (mpfr_cmpabs(m_lo.get(), m_hi.get()) > 0) {
            mpfr_neg(r.m_hi.get(), m_lo.get(), MPFR_RNDU);
        } else {
            mpfr_set(r.m_hi.get(), m_hi.get(), MPFR_RNDU);
        }
        return r;
    }
    Interval pow(unsigned long e) const
    {
        Interval r = exact(Rational(1), precision());
        for (unsigned long i = 0; i < e; ++i) {
            r = r * *this;
        }
        return r;
    }

    bool certainly_positive() const
    {
        return mpfr_sgn(m_lo.get()) > 0;
    }
    bool certainly_negative() const
    {
        return mpfr_sgn(m_hi.get()) < 0;
    }
    bool contains_zero() const
    {
        return !certainly_positive() && !certainly_negative();
    }
    bool certainly_less(const Interval &o) const
    {
        return mpfr_less_p(m_hi.get(), o.m_lo.get()) != 0;
    }
    bool certainly_greater(const Interval &o) const
    {
        return o.certainly_less(*this);
    }

    double mid_double() const
    {
        return 0.5 * (m_lo.to_double() + m_hi.to_double());
    }

    // Deterministic scientific rendering of the midpoint with `digits`
    // significant digits, e.g. "6.9314718055994530942e-1".
    std::string to_decimal(std::size_t digits = 20) const
    {
        BigFloat mid(precision() + 2);
        mpfr_add(mid.get(), m_lo.get(), m_hi.get(), MPFR_RNDN);
        mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
        if (mpfr_zero_p(mid.get())) {
            return "0";
        }
        mpfr_exp_t e = 0;
        char *raw = mpfr_get_str(nullptr, &e, 10, digits, mid.get(), MPFR_RNDN);
        std::string s(raw);
        mpfr_free_str(raw);
        std::string sign;
        if (!s.empty() && s[0] == '-') {
            sign = "-";
            s.erase(0, 1);
        }
        std::string out = sign + s.substr(0, 1);
        if (s.size() > 1) {
            out += "." + s.substr(1);
        }
        out += "e" + std::to_string(static_cast<long>(e) - 1);
        return out;
    }

private:
    BigFloat m_lo, m_hi;
};

} // namespace dforge

#endif
