// Helpers shared by the test binaries. Oracles live next to the tests that use
// them; only plumbing goes here.
#ifndef DFORGE_TESTS_SUPPORT_HPP
#define DFORGE_TESTS_SUPPORT_HPP

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <dforge/dforge.hpp>

namespace dforge
{

// Readable gtest failure messages.
inline void PrintTo(const Exponent &e, std::ostream *os)
{
    *os << e.to_string();
}
inline void PrintTo(const Coefficient &c, std::ostream *os)
{
    *os << c.to_string();
}
inline void PrintTo(const FormalSeries &s, std::ostream *os)
{
    *os << s.to_string();
}
inline void PrintTo(const DiffPolynomial &p, std::ostream *os)
{
    *os << p.to_string();
}

} // namespace dforge

namespace dforge::testing
{

inline std::string fixture(const std::string &name)
{
    return std::string(DFORGE_FIXTURES) + "/" + name;
}

inline FormalSeries load_series(const std::string &name, mpfr_prec_t prec = default_precision)
{
    return series_from_json(read_json(fixture(name)), prec);
}

inline BasisPtr primes_basis(const std::vector<std::uint64_t> &ps, mpfr_prec_t prec = default_precision)
{
    return prime_log_basis(ps, prec);
}

// Exponent log n over the given primes, by repeated division (independent of
// the library's factoring helpers). n must be smooth over `ps`.
inline Exponent log_exponent(std::uint64_t n, const std::vector<std::uint64_t> &ps)
{
    Exponent e;
    for (auto p : ps) {
        long k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        if (k) {
            e += Exponent::symbol(prime_symbol_name(p), Rational(k));
        }
    }
    if (n != 1) {
        throw std::logic_error("index not smooth over the test primes");
    }
    return e;
}

// sum_{n in ns} n^{-s} with coefficient 1, exact (no truncation) unless given.
inline FormalSeries dirichlet(const std::vector<std::uint64_t> &ns, const std::vector<std::uint64_t> &ps,
                              FormalSeries::Bound trunc = std::nullopt)
{
    std::vector<Term> terms;
    for (auto n : ns) {
        terms.push_back({log_exponent(n, ps), xpoly::constant(Coefficient(1))});
    }
    return make_series(primes_basis(ps), std::move(terms), std::move(trunc));
}

// mpq_class(p, q) does not reduce; everything built from random parts goes through here.
inline Rational rat(long p, long q = 1)
{
    Rational r(p, q);
    r.canonicalize();
    return r;
}

inline Exponent L(std::uint64_t p, long k = 1)
{
    return Exponent::symbol(prime_symbol_name(p), Rational(k));
}

inline Exponent one(const Rational &q)
{
    return Exponent::constant(q);
}

inline Coefficient sym(const std::string &name)
{
    return Coefficient::symbol(name);
}

inline DiffPolynomial poly(const std::string &text, const std::vector<std::string> &symbols = {})
{
    ParseOptions opts;
    if (!symbols.empty()) {
        opts.allowed_symbols.emplace(symbols.begin(), symbols.end());
    }
    return parse_diffpoly(text, opts);
}

// (F, G) pairs where G(x_1, ..., x_mu) solves the PDE that F becomes at s = 0.
struct PdeFixture {
    std::string name;
    DiffPolynomial F;
    std::vector<std::string> lambda_names;
    Coefficient G;
    unsigned order = 0;
};

inline std::vector<PdeFixture> load_pde_fixtures()
{
    std::vector<PdeFixture> out;
    for (const auto &j : read_json(fixture("pde.json"))) {
        PdeFixture fx;
        fx.name = j.at("name").get<std::string>();
        fx.F = poly(j.at("equation").get<std::string>(), j.at("symbols").get<std::vector<std::string>>());
        fx.lambda_names = j.at("lambda_names").get<std::vector<std::string>>();
        for (const auto &t : j.at("G")) {
            Coefficient m(parse_rational(t.at("coeff").get<std::string>()));
            for (const auto &[name, k] : t.at("powers").items()) {
                m *= Coefficient::symbol(name, std::stoi(k.get<std::string>()));
            }
            fx.G += m;
        }
        fx.order = j.at("order").get<unsigned>();
        out.push_back(std::move(fx));
    }
    return out;
}

template <typename F>
ErrorCode error_code_of(F &&f)
{
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    throw std::logic_error("expected a dforge::Error");
}

} // namespace dforge::testing

#endif
