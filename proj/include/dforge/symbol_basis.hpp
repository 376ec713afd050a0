#ifndef DFORGE_SYMBOL_BASIS_HPP
#define DFORGE_SYMBOL_BASIS_HPP

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <dforge/error.hpp>
#include <dforge/interval.hpp>
#include <dforge/rational.hpp>

namespace dforge
{

inline constexpr mpfr_prec_t default_precision = 128;

// Reserved name of the distinguished unit symbol. It never appears in a basis
// explicitly: exponents carry it as their constant part.
inline constexpr std::string_view one_symbol = "ONE";

// A named positive generator. `value` is one of
//   "log(q)"   natural logarithm of a positive rational,
//   "p/q"      an exact rational,
//   "0.6931"   a decimal string (enclosed by outward rounding).
struct SymbolSpec {
    std::string name;
    std::string value;

    friend bool operator==(const SymbolSpec &, const SymbolSpec &) = default;
};

inline bool is_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char ch : s) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) {
            return false;
        }
    }
    return true;
}

// Ordered set of transcendental generators together with their numeric
// enclosures at a fixed working precision. Immutable once built; share it
// through std::shared_ptr<const SymbolBasis>.
class SymbolBasis
{
public:
    static std::shared_ptr<const SymbolBasis> make(std::vector<SymbolSpec> specs,
                                                   mpfr_prec_t precision = default_precision,
                                                   bool independence_assumed = true)
    {
        if (precision < 16) {
            throw Error(ErrorCode::BadBasis, "precision must be at least 16 bits");
        }
        auto b = std::shared_ptr<SymbolBasis>(new SymbolBasis());
        b->m_precision = precision;
        b->m_independence_assumed = independence_assumed;
        for (auto &s : specs) {
            if (!is_identifier(s.name) || s.name == one_symbol || s.name == "f" || s.name == "x"
                || s.name == "s" || s.name == "E") {
                throw Error(ErrorCode::BadBasis, "invalid symbol name '" + s.name + "'");
            }
            if (b->m_index.count(s.name)) {
                throw Error(ErrorCode::BadBasis, "duplicate symbol '" + s.name + "'");
            }
            auto parsed = parse_value(s.value, precision);
            if (!parsed.value.certainly_positive()) {
                throw Error(ErrorCode::BadBasis, "symbol '" + s.name + "' is not certainly positive");
            }
            b->m_index.emplace(s.name, b->m_specs.size());
            b->m_values.push_back(std::move(parsed.value));
            b->m_log_args.push_back(std::move(parsed.log_arg));
            b->m_specs.push_back(std::move(s));
        }
        return b;
    }

    std::shared_ptr<const SymbolBasis> with_precision(mpfr_prec_t precision) const
    {
        return make(m_specs, precision, m_independence_assumed);
    }

    mpfr_prec_t precision() const
    {
        return m_precision;
    }
    bool independence_assumed() const
    {
        return m_independence_assumed;
    }
    std::size_t size() const
    {
        return m_specs.size();
    }
    const std::vector<SymbolSpec> &specs() const
    {
        return m_specs;
    }
    bool contains(std::string_view name) const
    {
        return m_index.find(name) != m_index.end();
    }

    const Interval &value(std::string_view name) const
    {
        return m_values[index_of(name)];
    }

    // For symbols given as log(q), the rational q.
    const std::optional<Rational> &log_argument(std::string_view name) const
    {
        return m_log_args[index_of(name)];
    }

    friend bool operator==(const SymbolBasis &a, const SymbolBasis &b)
    {
        return a.m_specs == b.m_specs && a.m_precision == b.m_precision;
    }

private:
    SymbolBasis() = default;

    std::size_t index_of(std::string_view name) const
    {
        auto it = m_index.find(name);
        if (it == m_index.end()) {
            throw Error(ErrorCode::UnknownSymbol, "symbol '" + std::string(name) + "' not in basis");
        }
        return it->second;
    }

    struct Parsed {
        Interval value;
        std::optional<Rational> log_arg;
    };

    static Parsed parse_value(const std::string &text, mpfr_prec_t prec)
    {
        if (text.rfind("log(", 0) == 0 && text.size() > 5 && text.back() == ')') {
            Rational q = parse_rational(text.substr(4, text.size() - 5));
            if (q <= 0) {
                throw Error(ErrorCode::BadBasis, "log of non-positive number in '" + text + "'");
            }
            return {Interval::log_of(q, prec), q};
        }
        if (text.find_first_of(".eE") != std::string::npos) {
            return {Interval::from_decimal(text, prec), std::nullopt};
        }
        return {Interval::exact(parse_rational(text), prec), std::nullopt};
    }

    mpfr_prec_t m_precision = default_precision;
    bool m_independence_assumed = true;
    std::vector<SymbolSpec> m_specs;
    std::vector<Interval> m_values;
    std::vector<std::optional<Rational>> m_log_args;
    std::map<std::string, std::size_t, std::less<>> m_index;
};

using BasisPtr = std::shared_ptr<const SymbolBasis>;

inline std::string prime_symbol_name(std::uint64_t p)
{
    return "L" + std::to_string(p);
}

// Basis {L2 = log 2, L3 = log 3, ...} for the given primes.
inline BasisPtr prime_log_basis(const std::vector<std::uint64_t> &primes,
                                mpfr_prec_t precision = default_precision)
{
    std::vector<SymbolSpec> specs;
    specs.reserve(primes.size());
    for (auto p : primes) {
        specs.push_back({prime_symbol_name(p), "log(" + std::to_string(p) + ")"});
    }
    return SymbolBasis::make(std::move(specs), precision);
}

} // namespace dforge

#endif
