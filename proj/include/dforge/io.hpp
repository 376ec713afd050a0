#ifndef DFORGE_IO_HPP
#define DFORGE_IO_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <zlib.h>

#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/parse.hpp>
#include <dforge/rational.hpp>
#include <dforge/series.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

using json = nlohmann::json;

// ---- files ---------------------------------------------------------------------------

// Whole file as bytes; gzip-compressed files are inflated transparently.
inline std::string read_text(const std::string &path)
{
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) {
        throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    }
    std::string out;
    char buf[1 << 15];
    int n = 0;
    while ((n = gzread(f, buf, sizeof buf)) > 0) {
        out.append(buf, static_cast<std::size_t>(n));
    }
    const bool failed = n < 0;
    gzclose(f);
    if (failed) {
        throw Error(ErrorCode::Io, "read error in '" + path + "'");
    }
    return out;
}

inline void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    }
}

inline json parse_json(const std::string &text, const std::string &what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::SyntaxError, what + ": " + e.what());
    }
}

inline json read_json(const std::string &path)
{
    return parse_json(read_text(path), path);
}

// ---- exponents, bases, series ------------------------------------------------------------

// {"L2": "1", "ONE": "-1/2"}; zero is {}.
inline json exponent_to_json(const Exponent &e)
{
    json j = json::object();
    for (const auto &[name, q] : e.coords()) {
        j[name] = to_string(q);
    }
    if (e.constant_part() != 0) {
        j[std::string(one_symbol)] = to_string(e.constant_part());
    }
    return j;
}

namespace detail
{

inline const std::string &expect_string(const json &j, const std::string &what)
{
    if (!j.is_string()) {
        throw Error(ErrorCode::SchemaError, what + " must be a string");
    }
    return j.get_ref<const std::string &>();
}

} // namespace detail

// Accepts the object form or a linear-combination string such as "2*L2 + L3".
inline Exponent exponent_from_json(const json &j, const SymbolBasis *basis = nullptr)
{
    Exponent e;
    if (j.is_string()) {
        e = parse_exponent(j.get<std::string>());
    } else if (j.is_object()) {
        for (const auto &[name, v] : j.items()) {
            const Rational q = parse_rational(detail::expect_string(v, "exponent coordinate '" + name + "'"));
            e += name == one_symbol ? Exponent::constant(q) : Exponent::symbol(name, q);
        }
    } else {
        throw Error(ErrorCode::SchemaError, "exponent must be an object or a string");
    }
    if (basis) {
        e.check_basis(*basis);
    }
    return e;
}

inline json basis_to_json(const SymbolBasis &b)
{
    json arr = json::array();
    for (const auto &s : b.specs()) {
        arr.push_back({{"name", s.name}, {"value", s.value}});
    }
    return arr;
}

inline BasisPtr basis_from_json(const json &arr, mpfr_prec_t precision)
{
    if (!arr.is_array()) {
        throw Error(ErrorCode::SchemaError, "basis must be an array of {name, value}");
    }
    std::vector<SymbolSpec> specs;
    for (const auto &item : arr) {
        if (!item.is_object() || !item.contains("name") || !item.contains("value")) {
            throw Error(ErrorCode::SchemaError, "basis entry needs name and value");
        }
        specs.push_back({detail::expect_string(item["name"], "basis name"),
                         detail::expect_string(item["value"], "basis value")});
    }
    return SymbolBasis::make(std::move(specs), precision);
}

inline ParseOptions symbol_options(const SymbolBasis &b, const std::vector<std::string> &extra = {})
{
    ParseOptions opts;
    opts.allowed_symbols.emplace();
    for (const auto &s : b.specs()) {
        opts.allowed_symbols->insert(s.name);
    }
    for (const auto &s : extra) {
        opts.allowed_symbols->insert(s);
    }
    return opts;
}

// {basis: [...], terms: [{exponent, coeff, xdegree?}], truncation: exponent | null}
inline FormalSeries series_from_json(const json &j, mpfr_prec_t precision = default_precision)
{
    if (!j.is_object() || !j.contains("basis") || !j.contains("terms")) {
        throw Error(ErrorCode::SchemaError, "series spec needs basis and terms");
    }
    BasisPtr basis = basis_from_json(j["basis"], precision);
    const ParseOptions opts = symbol_options(*basis);
    std::vector<Term> terms;
    if (!j["terms"].is_array()) {
        throw Error(ErrorCode::SchemaError, "terms must be an array");
    }
    for (const auto &t : j["terms"]) {
        if (!t.is_object() || !t.contains("exponent") || !t.contains("coeff")) {
            throw Error(ErrorCode::SchemaError, "term needs exponent and coeff");
        }
        Exponent e = exponent_from_json(t["exponent"], basis.get());
        XPoly c = parse_xpoly(detail::expect_string(t["coeff"], "coeff"), opts);
        if (t.contains("xdegree")) {
            if (!t["xdegree"].is_number_unsigned()) {
                throw Error(ErrorCode::SchemaError, "xdegree must be a non-negative integer");
            }
            c = xpoly::mul(c, xpoly::monomial(t["xdegree"].get<unsigned>(), Coefficient(1)));
        }
        terms.push_back({std::move(e), std::move(c)});
    }
    FormalSeries::Bound trunc;
    if (j.contains("truncation") && !j["truncation"].is_null()) {
        trunc = exponent_from_json(j["truncation"], basis.get());
    }
    return FormalSeries::make(basis, std::move(terms), trunc);
}

inline json series_to_json(const FormalSeries &s)
{
    json terms = json::array();
    for (const auto &t : s.terms()) {
        terms.push_back({{"exponent", exponent_to_json(t.exponent)}, {"coeff", xpoly::to_string(t.coeff)}});
    }
    return {{"basis", basis_to_json(*s.basis())},
            {"terms", terms},
            {"truncation", s.truncation() ? exponent_to_json(*s.truncation()) : json(nullptr)}};
}

// ---- corpus ---------------------------------------------------------------------------

struct CorpusEntry {
    std::uint64_t n = 0;
    Rational a{1};
};

// Lines "n a_n" or "n" (coefficient 1); blank lines and '#' comments skipped.
inline std::vector<CorpusEntry> parse_corpus(const std::string &text)
{
    std::vector<CorpusEntry> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) {
            line.erase(h);
        }
        std::istringstream fields(line);
        std::string ns, as, extra;
        if (!(fields >> ns)) {
            continue;
        }
        fields >> as >> extra;
        auto fail = [&](const std::string &what) {
            throw Error(ErrorCode::SyntaxError, "corpus line " + std::to_string(lineno) + ": " + what);
        };
        if (!extra.empty()) {
            fail("expected 'n' or 'n a_n'");
        }
        if (ns.find_first_not_of("0123456789") != std::string::npos || ns.size() > 19) {
            fail("index '" + ns + "' is not a positive integer");
        }
        CorpusEntry e;
        e.n = std::stoull(ns);
        if (e.n == 0) {
            fail("index must be at least 1");
        }
        if (!as.empty()) {
            try {
                e.a = parse_rational(as);
            } catch (const Error &err) {
                fail(err.what());
            }
        }
        out.push_back(e);
    }
    return out;
}

inline std::vector<CorpusEntry> read_corpus(const std::string &path)
{
    return parse_corpus(read_text(path));
}

// ---- configuration ------------------------------------------------------------------------

struct AnalysisConfig {
    long precision = default_precision;
    std::optional<std::string> horizon; // exponent expression
    std::uint64_t rank_bound = 10;
    Rational ratio_threshold{10};
    unsigned max_weight = 3;
    std::uint64_t factor_limit = 1000000;
    std::uint64_t growth_bound = 8;
    std::optional<std::string> output;
    std::uint64_t seed = 20240611;

    friend bool operator==(const AnalysisConfig &, const AnalysisConfig &) = default;

    void validate() const
    {
        if (precision < 16 || precision > 1 << 20) {
            throw Error(ErrorCode::SchemaError, "precision_bits must be in [16, 2^20]");
        }
        if (rank_bound == 0 || max_weight == 0 || factor_limit < 2 || growth_bound == 0) {
            throw Error(ErrorCode::SchemaError, "bounds must be positive");
        }
        if (ratio_threshold <= 0) {
            throw Error(ErrorCode::SchemaError, "ratio_threshold must be positive");
        }
    }

    json to_json() const
    {
        json j = {{"precision_bits", precision},     {"rank_bound", rank_bound},
                  {"ratio_threshold", to_string(ratio_threshold)},
                  {"max_weight", max_weight},        {"factor_limit", factor_limit},
                  {"growth_bound", growth_bound},    {"seed", seed}};
        j["horizon"] = horizon ? json(*horizon) : json(nullptr);
        j["output"] = output ? json(*output) : json(nullptr);
        return j;
    }

    static AnalysisConfig from_json(const json &j)
    {
        if (!j.is_object()) {
            throw Error(ErrorCode::SchemaError, "config must be a JSON object");
        }
        AnalysisConfig c;
        static const char *known[] = {"precision_bits", "horizon",      "rank_bound", "ratio_threshold", "max_weight",
                                      "factor_limit",   "growth_bound", "output",     "seed"};
        for (const auto &[k, _] : j.items()) {
            if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
                throw Error(ErrorCode::SchemaError, "unknown config key '" + k + "'");
            }
        }
        try {
            if (j.contains("precision_bits")) {
                c.precision = j["precision_bits"].get<long>();
            }
            if (j.contains("horizon") && !j["horizon"].is_null()) {
                c.horizon = j["horizon"].get<std::string>();
            }
            if (j.contains("rank_bound")) {
                c.rank_bound = j["rank_bound"].get<std::uint64_t>();
            }
            if (j.contains("ratio_threshold")) {
                c.ratio_threshold = parse_rational(j["ratio_threshold"].get<std::string>());
            }
            if (j.contains("max_weight")) {
                c.max_weight = j["max_weight"].get<unsigned>();
            }
            if (j.contains("factor_limit")) {
                c.factor_limit = j["factor_limit"].get<std::uint64_t>();
            }
            if (j.contains("growth_bound")) {
                c.growth_bound = j["growth_bound"].get<std::uint64_t>();
            }
            if (j.contains("output") && !j["output"].is_null()) {
                c.output = j["output"].get<std::string>();
            }
            if (j.contains("seed")) {
                c.seed = j["seed"].get<std::uint64_t>();
            }
        } catch (const json::exception &e) {
            throw Error(ErrorCode::SchemaError, std::string("config: ") + e.what());
        }
        c.validate();
        return c;
    }
};

// DFORGE_PRECISION, when set, overrides precision_bits.
inline void apply_environment(AnalysisConfig &c)
{
    const char *p = std::getenv("DFORGE_PRECISION");
    if (!p || !*p) {
        return;
    }
    const std::string s(p);
    if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 7) {
        throw Error(ErrorCode::SchemaError, "DFORGE_PRECISION must be a positive integer");
    }
    c.precision = std::stol(s);
    c.validate();
}

inline AnalysisConfig load_config(const std::optional<std::string> &path)
{
    AnalysisConfig c = path ? AnalysisConfig::from_json(read_json(*path)) : AnalysisConfig{};
    apply_environment(c);
    return c;
}

} // namespace dforge

#endif
