#ifndef DFORGE_OBSTRUCTION_HPP
#define DFORGE_OBSTRUCTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/interval.hpp>
#include <dforge/io.hpp>
#include <dforge/lattice.hpp>
#include <dforge/rational.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

inline constexpr const char *tool_version = "0.1.0";

inline const char *default_scope = "All claims concern the scanned prefix only; nothing is asserted about unseen terms.";

// Self-contained evidence: `evidence`, `scanned` and `refuted` are a pure
// function of (kind, input, basis) and are recomputed bit-exactly on verify.
struct Certificate {
    std::string kind;
    std::uint64_t scanned = 0;
    json input = json::object();
    json evidence = json::object();
    json basis = json::object(); // {symbols: [{name, value}], precision}
    bool refuted = false;
    std::string verdict_scope = default_scope;
    std::string version = tool_version;

    json to_json() const
    {
        return {{"kind", kind},       {"scanned", scanned},   {"input", input},
                {"evidence", evidence}, {"basis", basis},     {"refuted", refuted},
                {"verdict_scope", verdict_scope}, {"tool_version", version}};
    }

    static Certificate from_json(const json &j)
    {
        auto need = [&](const char *key, bool ok) {
            if (!j.contains(key) || !ok) {
                throw Error(ErrorCode::SchemaError, std::string("certificate field '") + key + "' missing or malformed");
            }
        };
        if (!j.is_object()) {
            throw Error(ErrorCode::SchemaError, "certificate must be a JSON object");
        }
        need("kind", j.contains("kind") && j["kind"].is_string());
        need("scanned", j.contains("scanned") && j["scanned"].is_number_unsigned());
        need("input", j.contains("input") && j["input"].is_object());
        need("evidence", j.contains("evidence") && j["evidence"].is_object());
        need("basis", j.contains("basis") && j["basis"].is_object());
        need("tool_version", j.contains("tool_version") && j["tool_version"].is_string());
        Certificate c;
        c.kind = j["kind"].get<std::string>();
        c.scanned = j["scanned"].get<std::uint64_t>();
        c.input = j["input"];
        c.evidence = j["evidence"];
        c.basis = j["basis"];
        c.refuted = j.value("refuted", false);
        c.verdict_scope = j.value("verdict_scope", std::string(default_scope));
        c.version = j["tool_version"].get<std::string>();
        return c;
    }
};

inline json basis_block(const SymbolBasis &b)
{
    return {{"symbols", basis_to_json(b)}, {"precision", b.precision()}};
}
inline json empty_basis_block(mpfr_prec_t precision = default_precision)
{
    return {{"symbols", json::array()}, {"precision", precision}};
}
inline BasisPtr basis_from_block(const json &block)
{
    if (!block.is_object() || !block.contains("symbols") || !block.contains("precision")
        || !block["precision"].is_number_integer()) {
        throw Error(ErrorCode::SchemaError, "basis block needs symbols and precision");
    }
    return basis_from_json(block["symbols"], block["precision"].get<mpfr_prec_t>());
}

// Computed part of a certificate.
struct Findings {
    std::uint64_t scanned = 0;
    bool refuted = false;
    json evidence = json::object();
};

namespace detail
{

inline std::vector<Exponent> exponents_from(const json &arr, const SymbolBasis *basis)
{
    if (!arr.is_array()) {
        throw Error(ErrorCode::SchemaError, "exponents must be an array");
    }
    std::vector<Exponent> out;
    for (const auto &e : arr) {
        out.push_back(exponent_from_json(e, basis));
    }
    return out;
}

inline json exponents_to(const std::vector<Exponent> &es)
{
    json arr = json::array();
    for (const auto &e : es) {
        arr.push_back(exponent_to_json(e));
    }
    return arr;
}

inline Rational rational_field(const json &j, const char *key)
{
    if (!j.contains(key)) {
        throw Error(ErrorCode::SchemaError, std::string("missing '") + key + "'");
    }
    return parse_rational(expect_string(j[key], key));
}

template <class T>
T number_field(const json &j, const char *key)
{
    if (!j.contains(key) || !j[key].is_number()) {
        throw Error(ErrorCode::SchemaError, std::string("missing numeric '") + key + "'");
    }
    return j[key].get<T>();
}

} // namespace detail

// ---- finite linear basis ------------------------------------------------------------------

// Rank profile of the exponent lattice along the scan; refuted once rank > R.
inline Findings finite_basis_findings(const json &input, const BasisPtr &basis)
{
    const auto R = detail::number_field<std::uint64_t>(input, "rank_bound");
    const std::string mode = input.value("mode", std::string("exponents"));
    std::vector<Exponent> exps;
    std::vector<std::string> labels;
    json unfactored = json::array();
    std::set<std::uint64_t> primes;
    if (mode == "indices") {
        const auto limit = input.value("factor_limit", std::uint64_t(1000000));
        for (const auto &v : input.at("indices")) {
            const auto n = v.get<std::uint64_t>();
            if (n == 0) {
                throw Error(ErrorCode::SchemaError, "indices must be positive");
            }
            const Factorization f = trial_factor(n, limit);
            if (f.remainder != 1) {
                unfactored.push_back(n);
                continue;
            }
            for (const auto &[p, _] : f.factors) {
                primes.insert(p);
            }
            exps.push_back(exponent_of_index(n, limit));
            labels.push_back(std::to_string(n));
        }
    } else if (mode == "exponents") {
        exps = detail::exponents_from(input.at("exponents"), basis.get());
        for (const auto &e : exps) {
            labels.push_back(e.to_string());
        }
    } else {
        throw Error(ErrorCode::SchemaError, "unknown finite-basis mode '" + mode + "'");
    }

    HermiteLattice lat;
    json profile = json::array();
    std::optional<std::size_t> exceeded;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (lat.insert(exps[i])) {
            profile.push_back({{"position", i}, {"term", labels[i]}, {"rank", lat.rank()}});
            if (!exceeded && lat.rank() > R) {
                exceeded = i;
            }
        }
    }
    json gens = json::array();
    for (const auto &g : lat.generators()) {
        gens.push_back(g.to_string());
    }
    Findings f;
    f.scanned = mode == "indices" ? input.at("indices").size() : exps.size();
    f.refuted = exceeded.has_value();
    f.evidence = {{"rank", lat.rank()},
                  {"rank_bound", R},
                  {"rank_profile", profile},
                  {"generators", gens},
                  {"verdict", f.refuted ? "rank_exceeded_bound" : "rank_stabilized"}};
    f.evidence["exceeded_at"] = exceeded ? json(*exceeded) : json(nullptr);
    f.evidence["stable_since"] = profile.empty() ? json(0) : profile.back()["position"];
    if (mode == "indices") {
        f.evidence["primes"] = json(std::vector<std::uint64_t>(primes.begin(), primes.end()));
        f.evidence["unfactored"] = unfactored;
    }
    return f;
}

inline Certificate make_certificate(const std::string &kind, json input, json basis_json, const Findings &f)
{
    Certificate c;
    c.kind = kind;
    c.input = std::move(input);
    c.basis = std::move(basis_json);
    c.scanned = f.scanned;
    c.refuted = f.refuted;
    c.evidence = f.evidence;
    return c;
}

inline Certificate finite_basis_certificate(const std::vector<Exponent> &exponents, const BasisPtr &basis,
                                            std::uint64_t rank_bound)
{
    json input = {{"mode", "exponents"}, {"exponents", detail::exponents_to(exponents)}, {"rank_bound", rank_bound}};
    return make_certificate("FiniteBasisRefutation", input, basis_block(*basis), finite_basis_findings(input, basis));
}

// Exponents log n over prime symbols, one per index n.
inline Certificate finite_basis_certificate_indices(const std::vector<std::uint64_t> &indices,
                                                    std::uint64_t rank_bound, std::uint64_t factor_limit = 1000000)
{
    json input = {{"mode", "indices"}, {"indices", indices}, {"rank_bound", rank_bound}, {"factor_limit", factor_limit}};
    Findings f = finite_basis_findings(input, nullptr);
    std::vector<std::uint64_t> primes = f.evidence["primes"].get<std::vector<std::uint64_t>>();
    return make_certificate("FiniteBasisRefutation", input, basis_block(*prime_log_basis(primes)), f);
}

// ---- gap criterion ----------------------------------------------------------------------------

inline Findings gap_findings(const json &input, const BasisPtr &basis)
{
    const auto exps = detail::exponents_from(input.at("exponents"), basis.get());
    const Rational thr = detail::rational_field(input, "ratio_threshold");
    const auto first = input.value("first_index", std::int64_t(1));
    const auto ratios = gap_ratios(exps, *basis);
    const Interval thr_i = Interval::exact(thr, basis->precision());
    json rs = json::array(), exceeding = json::array(), undecided = json::array();
    for (const auto &g : ratios) {
        const auto label = first + static_cast<std::int64_t>(g.index);
        json r = {{"index", label}, {"value", g.value.to_decimal(20)}};
        r["exact"] = g.exact ? json(to_string(*g.exact)) : json(nullptr);
        rs.push_back(r);
        bool over = false, decided = true;
        if (g.exact) {
            over = *g.exact >= thr;
        } else if (g.value.certainly_greater(thr_i)) {
            over = true;
        } else if (!g.value.certainly_less(thr_i)) {
            decided = false;
        }
        if (over) {
            exceeding.push_back(label);
        } else if (!decided) {
            undecided.push_back(label);
        }
    }
    Findings f;
    f.scanned = exps.size();
    f.refuted = !exceeding.empty();
    f.evidence = {{"ratios", rs},
                  {"ratio_threshold", to_string(thr)},
                  {"exceeding", exceeding},
                  {"undecided", undecided}};
    f.evidence["envelope_max"] = ratios.empty() ? json(nullptr) : json(ratios.back().envelope.to_decimal(20));
    return f;
}

// Ratios lambda_i / lambda_{i-1} (1-based labels from `first_index`) reaching the threshold.
inline Certificate gap_certificate(const std::vector<Exponent> &exponents, const BasisPtr &basis,
                                   const Rational &ratio_threshold, std::int64_t first_index = 1)
{
    json input = {{"exponents", detail::exponents_to(exponents)},
                  {"ratio_threshold", to_string(ratio_threshold)},
                  {"first_index", first_index}};
    return make_certificate("GapCriterion", input, basis_block(*basis), gap_findings(input, basis));
}

// ---- coefficient field ------------------------------------------------------------------------

struct TaggedCoefficient {
    std::uint64_t n = 0;
    std::string family; // RootOfUnity | PrimeSquareRoot | Rational | UserAsserted
    std::string param;  // order | prime | "p/q" | label
};

namespace detail
{

// Euler phi of the lcm of the orders seen, from their prime-power parts.
inline Integer cyclotomic_degree(const std::map<std::uint64_t, unsigned> &prime_powers)
{
    Integer d(1);
    for (const auto &[p, k] : prime_powers) {
        Integer pk(1);
        for (unsigned i = 1; i < k; ++i) {
            pk *= p;
        }
        d *= pk * (p - 1);
    }
    return d;
}

inline std::uint64_t positive_integer(const std::string &s, const std::string &what)
{
    if (s.empty() || s.size() > 19 || s.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorCode::SchemaError, what + " must be a positive integer, got '" + s + "'");
    }
    const auto v = std::stoull(s);
    if (v == 0) {
        throw Error(ErrorCode::SchemaError, what + " must be positive");
    }
    return v;
}

} // namespace detail

// Tracks the degree of the field generated by the scanned coefficients: the
// cyclotomic part Q(zeta_lcm) and the multiquadratic part Q(sqrt p_1, ...). Each
// strict increase is one new generator; more than growth_bound increases within
// the scan is refutation evidence.
inline Findings coefficient_field_findings(const json &input)
{
    const auto bound = detail::number_field<std::uint64_t>(input, "growth_bound");
    std::map<std::uint64_t, unsigned> prime_powers;
    std::set<std::uint64_t> radicals;
    std::set<std::string> labels;
    std::map<std::string, std::uint64_t> family_counts;
    json profile = json::array();
    std::uint64_t increases = 0;
    Integer cyc(1);
    for (const auto &item : input.at("coefficients")) {
        TaggedCoefficient t{item.at("n").get<std::uint64_t>(), item.at("family").get<std::string>(),
                            item.value("param", std::string())};
        ++family_counts[t.family];
        bool grew = false;
        if (t.family == "RootOfUnity") {
            const auto order = detail::positive_integer(t.param, "root-of-unity order");
            // Full trial division (limit = order) leaves no cofactor.
            for (const auto &[p, k] : trial_factor(order, order).factors) {
                unsigned &cur = prime_powers[p];
                cur = std::max(cur, k);
            }
            const Integer d = detail::cyclotomic_degree(prime_powers);
            grew = d > cyc;
            cyc = d;
        } else if (t.family == "PrimeSquareRoot") {
            const auto p = detail::positive_integer(t.param, "prime");
            const Factorization f = trial_factor(p, p);
            if (!(f.factors.size() == 1 && f.factors[0] == std::pair<std::uint64_t, unsigned>(p, 1))) {
                throw Error(ErrorCode::SchemaError, "PrimeSquareRoot parameter " + t.param + " is not prime");
            }
            grew = radicals.insert(p).second;
        } else if (t.family == "Rational") {
            parse_rational(t.param.empty() ? "1" : t.param);
        } else if (t.family == "UserAsserted") {
            grew = labels.insert(t.param).second;
        } else {
            throw Error(ErrorCode::UnknownFamily, "coefficient family '" + t.family + "' is not supported");
        }
        if (grew) {
            ++increases;
            profile.push_back({{"n", t.n}, {"family", t.family}, {"param", t.param}});
        }
    }
    Integer rad_degree(1);
    mpz_mul_2exp(rad_degree.get_mpz_t(), rad_degree.get_mpz_t(), radicals.size());
    Findings f;
    f.scanned = input.at("coefficients").size();
    f.refuted = increases > bound;
    f.evidence = {{"growth_bound", bound},
                  {"generator_increases", increases},
                  {"increase_profile", profile},
                  {"cyclotomic_degree", to_string(cyc)},
                  {"prime_radicals", json(std::vector<std::uint64_t>(radicals.begin(), radicals.end()))},
                  {"radical_degree", to_string(rad_degree)},
                  {"asserted_generators", json(std::vector<std::string>(labels.begin(), labels.end()))},
                  {"family_counts", family_counts},
                  {"verdict", f.refuted ? "field_degree_unbounded_within_scan" : "no obstruction from this test"}};
    return f;
}

inline Certificate coefficient_field_certificate(const std::vector<TaggedCoefficient> &coeffs,
                                                 std::uint64_t growth_bound = 8)
{
    json arr = json::array();
    for (const auto &c : coeffs) {
        arr.push_back({{"n", c.n}, {"family", c.family}, {"param", c.param}});
    }
    json input = {{"coefficients", arr}, {"growth_bound", growth_bound}};
    return make_certificate("CoefficientField", input, empty_basis_block(), coefficient_field_findings(input));
}

// ---- bivariate criterion ----------------------------------------------------------------------

namespace detail
{

// Closest p/q with q <= max_den to v, if within tol.
inline std::optional<Rational> small_rational_near(double v, unsigned max_den, double tol)
{
    std::optional<Rational> best;
    double best_err = tol;
    for (unsigned q = 1; q <= max_den; ++q) {
        const double p = std::round(v * q);
        const double err = std::fabs(v - p / q);
        if (err <= best_err) {
            Rational r(static_cast<long>(p), static_cast<long>(q));
            r.canonicalize();
            if (!best || err < best_err) {
                best = r;
                best_err = err;
            }
        }
    }
    return best;
}

} // namespace detail

// Sequence log m_i / log lambda_i with drift diagnostics, plus the two exponent
// conditions (lattice rank still growing; gap-ratio envelope still growing).
inline Findings bivariate_findings(const json &input, const BasisPtr &basis)
{
    const auto exps = detail::exponents_from(input.at("exponents"), basis.get());
    const json &degs = input.at("degrees");
    if (!degs.is_array() || degs.size() != exps.size()) {
        throw Error(ErrorCode::SchemaError, "degrees and exponents must have equal length");
    }
    const mpfr_prec_t prec = basis->precision();
    const Interval one = Interval::exact(Rational(1), prec);
    std::vector<Interval> vals;
    std::vector<double> mids;
    json seq = json::array();
    for (std::size_t i = 0; i < exps.size(); ++i) {
        const Integer m(detail::expect_string(degs[i], "degree"));
        if (m <= 0) {
            throw Error(ErrorCode::SchemaError, "degrees must be positive");
        }
        const Interval lam = exps[i].numeric(*basis);
        if (!lam.certainly_greater(one)) {
            continue; // log lambda_i must be positive
        }
        const Interval r = Interval::log_of(Rational(m), prec) / lam.log();
        seq.push_back({{"position", i}, {"ratio", r.to_decimal(15)}});
        vals.push_back(r);
        mids.push_back(r.mid_double());
    }
    std::string drift = "undetermined";
    json plateau = nullptr;
    bool no_rational_accumulation = false;
    json histogram = json::array();
    if (vals.size() >= 4) {
        const std::size_t half = vals.size() / 2;
        bool up = true, down = true;
        for (std::size_t i = half + 1; i < vals.size(); ++i) {
            up = up && vals[i - 1].certainly_less(vals[i]);
            down = down && vals[i].certainly_less(vals[i - 1]);
        }
        double lo = mids[half], hi = mids[half];
        for (std::size_t i = half; i < mids.size(); ++i) {
            lo = std::min(lo, mids[i]);
            hi = std::max(hi, mids[i]);
        }
        if (hi - lo <= 1e-9 * std::max(1.0, std::fabs(hi))) {
            drift = "plateau";
            auto q = detail::small_rational_near(mids.back(), 12, 1e-9);
            plateau = q ? json(to_string(*q)) : json(nullptr);
            no_rational_accumulation = !q || *q == 0;
        } else if (up) {
            drift = "increasing";
            no_rational_accumulation = true;
        } else if (down) {
            drift = "decreasing";
        }
        const double mn = *std::min_element(mids.begin(), mids.end());
        const double mx = *std::max_element(mids.begin(), mids.end());
        std::vector<std::uint64_t> bins(10, 0);
        for (double v : mids) {
            std::size_t b = mx > mn ? static_cast<std::size_t>((v - mn) / (mx - mn) * 10) : 0;
            ++bins[std::min<std::size_t>(b, 9)];
        }
        histogram = {{"min", mn}, {"max", mx}, {"counts", bins}};
    }

    HermiteLattice lat;
    std::size_t rank_mid = 0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        lat.insert(exps[i]);
        if (i + 1 == exps.size() / 2) {
            rank_mid = lat.rank();
        }
    }
    const bool rank_growing = lat.rank() > rank_mid;
    const auto ratios = gap_ratios(exps, *basis);
    bool envelope_growing = false;
    if (ratios.size() >= 2) {
        const std::size_t half = ratios.size() / 2;
        envelope_growing = ratios[half - 1].envelope.certainly_less(ratios.back().envelope);
    }

    Findings f;
    f.scanned = exps.size();
    f.refuted = (rank_growing || envelope_growing) && no_rational_accumulation;
    f.evidence = {{"log_ratio_sequence", seq},
                  {"drift", drift},
                  {"histogram", histogram},
                  {"condition_no_finite_basis", {{"rank", lat.rank()}, {"rank_at_midpoint", rank_mid},
                                                 {"holds_at_scan", rank_growing}}},
                  {"condition_unbounded_gaps", {{"holds_at_scan", envelope_growing}}},
                  {"no_nonzero_rational_accumulation", no_rational_accumulation},
                  {"criterion_satisfied", f.refuted},
                  {"note", "Purely formal data; convergence of the series is not modelled."}};
    f.evidence["plateau_value"] = plateau;
    return f;
}

inline Certificate bivariate_certificate(const std::vector<Integer> &degrees, const std::vector<Exponent> &exponents,
                                         const BasisPtr &basis)
{
    json degs = json::array();
    for (const auto &m : degrees) {
        degs.push_back(to_string(m));
    }
    json input = {{"degrees", degs}, {"exponents", detail::exponents_to(exponents)}};
    return make_certificate("BivariateCriterion", input, basis_block(*basis), bivariate_findings(input, basis));
}

// ---- sign flip construction -------------------------------------------------------------------

struct SignFlipResult {
    std::vector<Rational> P1;
    std::vector<Rational> Q;
    Certificate certificate;
};

namespace detail
{

// Positions base^{i^2} for i = start, start+1, ...; a zero coefficient moves the
// pick to the next nonzero position, and picks stay strictly increasing.
inline std::vector<std::uint64_t> gap_positions(const std::vector<Rational> &P, std::uint64_t base, unsigned start)
{
    std::vector<std::uint64_t> out;
    const std::uint64_t N = P.size();
    for (unsigned i = start;; ++i) {
        Integer target(1);
        for (unsigned j = 0; j < i * i; ++j) {
            target *= base;
            if (target >= N) {
                break;
            }
        }
        if (target >= N) {
            break;
        }
        std::uint64_t pos = target.get_ui();
        if (!out.empty()) {
            pos = std::max(pos, out.back() + 1);
        }
        while (pos < N && P[pos] == 0) {
            ++pos;
        }
        if (pos >= N) {
            break;
        }
        out.push_back(pos);
    }
    return out;
}

} // namespace detail

inline Findings signflip_findings(const json &input, std::vector<Rational> *P1_out = nullptr,
                                  std::vector<Rational> *Q_out = nullptr)
{
    std::vector<Rational> P;
    for (const auto &c : input.at("coefficients")) {
        P.push_back(parse_rational(detail::expect_string(c, "coefficient")));
    }
    const json &rule = input.at("rule");
    const auto base = rule.value("base", std::uint64_t(2));
    const auto start = rule.value("start", 1u);
    if (base < 2) {
        throw Error(ErrorCode::SchemaError, "gap rule base must be at least 2");
    }
    const auto pos = detail::gap_positions(P, base, start);
    if (pos.size() < 2) {
        throw Error(ErrorCode::InsufficientNonzeroTerms,
                    "gap rule selects " + std::to_string(pos.size()) + " nonzero positions within the scan of "
                        + std::to_string(P.size()) + " coefficients");
    }
    std::vector<Rational> Q(P.size()), P1 = P;
    for (auto n : pos) {
        Q[n] = P[n];
        P1[n] = -P[n];
    }
    bool identity = true;
    for (std::size_t n = 0; n < P.size(); ++n) {
        identity = identity && (P1[n] + 2 * Q[n] == P[n]);
    }
    json ratios = json::array();
    bool increasing = true;
    Rational prev(0);
    for (std::size_t i = 1; i < pos.size(); ++i) {
        Rational r(Integer(std::to_string(pos[i])), Integer(std::to_string(pos[i - 1])));
        r.canonicalize();
        ratios.push_back(to_string(r));
        increasing = increasing && (i == 1 || r > prev);
        prev = r;
    }
    json q = json::array();
    for (auto n : pos) {
        q.push_back({{"n", n}, {"coeff", to_string(P[n])}});
    }
    Findings f;
    f.scanned = P.size();
    f.refuted = increasing && identity;
    f.evidence = {{"positions", pos},
                  {"Q_terms", q},
                  {"identity_P1_plus_2Q_equals_P", identity},
                  {"gap_ratios", ratios},
                  {"gap_ratios_increasing", increasing}};
    if (P1_out) {
        *P1_out = std::move(P1);
    }
    if (Q_out) {
        *Q_out = std::move(Q);
    }
    return f;
}

// P1 = P with the signs at the gap positions flipped; Q = (P - P1)/2.
inline SignFlipResult signflip_construct(const std::vector<Rational> &P, std::uint64_t base = 2, unsigned start = 1)
{
    json coeffs = json::array();
    for (const auto &c : P) {
        coeffs.push_back(to_string(c));
    }
    json input = {{"coefficients", coeffs}, {"rule", {{"base", base}, {"start", start}}}};
    SignFlipResult out;
    Findings f = signflip_findings(input, &out.P1, &out.Q);
    out.certificate = make_certificate("SignFlipConstruction", input, empty_basis_block(), f);
    return out;
}

} // namespace dforge

#endif
