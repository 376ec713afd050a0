#ifndef DFORGE_CERTIFICATE_HPP
#define DFORGE_CERTIFICATE_HPP

#include <optional>
#include <string>
#include <vector>

#include <dforge/formal_eval.hpp>
#include <dforge/io.hpp>
#include <dforge/lattice.hpp>
#include <dforge/obstruction.hpp>
#include <dforge/parse.hpp>
#include <dforge/transforms.hpp>
#include <dforge/wronskian.hpp>

namespace dforge
{

// ---- formal checks ----------------------------------------------------------------------

namespace detail
{

inline json residual_json(const Residual &r)
{
    json j = {{"verdict", std::string(to_string(r.verdict))}};
    j["horizon"] = r.horizon ? exponent_to_json(*r.horizon) : json(nullptr);
    if (r.leading) {
        j["leading"] = {{"exponent", exponent_to_json(r.leading->exponent)}, {"coeff", xpoly::to_string(r.leading->coeff)}};
    } else {
        j["leading"] = nullptr;
    }
    return j;
}

inline json prop3_json(const Prop3Report &p)
{
    json restarts = json::array();
    for (const auto &z : p.restarts) {
        restarts.push_back(z.to_string());
    }
    json argmin = json::array();
    for (const auto &z : p.initial.argmin) {
        argmin.push_back(z.to_string());
    }
    json j = {{"equation", p.equation.to_string()},
              {"restarts", restarts},
              {"Lambda1", exponent_to_json(p.initial.Lambda1)},
              {"argmin", argmin},
              {"Lambda", exponent_to_json(p.Lambda)},
              {"Lambda_prefix", p.Lambda_prefix},
              {"L", p.L.to_string()},
              {"root_bound", to_string(p.Lambda2.B)},
              {"n", p.n},
              {"lambda0", exponent_to_json(p.lambda0)},
              {"threshold", p.threshold.to_decimal(20)},
              {"verified_count", p.verified_indices.size()},
              {"precision_tie", p.precision_tie}};
    j["first_verified_index"] = p.verified_indices.empty() ? json(nullptr) : json(p.verified_indices.front());
    j["horizon"] = p.horizon ? exponent_to_json(*p.horizon) : json(nullptr);
    return j;
}

inline FormalSeries::Bound optional_exponent(const json &input, const char *key, const SymbolBasis &basis)
{
    if (!input.contains(key) || input[key].is_null()) {
        return std::nullopt;
    }
    return exponent_from_json(input[key], &basis);
}

inline std::vector<Exponent> series_exponents(const FormalSeries &s)
{
    std::vector<Exponent> out;
    for (const auto &t : s.terms()) {
        out.push_back(t.exponent);
    }
    return out;
}

} // namespace detail

// check = substitute | rescale | hilbert | derive_ade.
inline Findings formal_findings(const json &input, const BasisPtr &block_basis)
{
    const std::string check = detail::expect_string(input.at("check"), "check");
    const mpfr_prec_t prec = block_basis ? block_basis->precision() : default_precision;
    Findings f;
    if (check == "hilbert") {
        const auto N = detail::number_field<std::uint64_t>(input, "N");
        const auto rep = verify_hilbert_zeta(N, detail::number_field<unsigned>(input, "max_mu"),
                                             detail::number_field<unsigned>(input, "max_nu"),
                                             detail::number_field<unsigned>(input, "max_lambda"), prec);
        json checks = json::array();
        for (const auto &c : rep.checks) {
            json cj = {{"mu", c.mu}, {"nu", c.nu}, {"lambda", c.lambda}, {"zero", c.zero}};
            if (c.leading) {
                cj["leading"] = exponent_to_json(*c.leading);
            }
            checks.push_back(cj);
        }
        f.scanned = N;
        f.refuted = !rep.all_zero();
        f.evidence = {{"checks", checks}, {"all_zero", rep.all_zero()}, {"horizon", exponent_to_json(*rep.horizon)}};
        return f;
    }

    const FormalSeries phi = series_from_json(input.at("series"), prec);
    const SymbolBasis &basis = *phi.basis();
    f.scanned = phi.size();
    if (check == "substitute") {
        const DiffPolynomial F = parse_diffpoly(detail::expect_string(input.at("equation"), "equation"),
                                                symbol_options(basis));
        const Residual r = substitute(F, phi, detail::optional_exponent(input, "horizon", basis));
        f.refuted = !r.is_zero();
        f.evidence = {{"residual", detail::residual_json(r)}};
        if (r.is_zero() && input.value("prop3", false)) {
            f.evidence["prop3"] = detail::prop3_json(prop3_threshold(F, phi));
        }
        return f;
    }
    if (check == "rescale") {
        const DiffPolynomial F = parse_diffpoly(detail::expect_string(input.at("equation"), "equation"),
                                                symbol_options(basis));
        std::vector<Rational> c;
        for (const auto &s : input.at("scalars")) {
            c.push_back(parse_rational(detail::expect_string(s, "scalar")));
        }
        const LatticeBasis B = integer_basis(detail::series_exponents(phi), &basis);
        const auto rep = verify_rescale_invariance(F, phi, B, c, detail::optional_exponent(input, "horizon", basis));
        json gens = json::array();
        for (const auto &g : B.generators) {
            gens.push_back(exponent_to_json(g));
        }
        f.evidence = {{"generators", gens},
                      {"original", detail::residual_json(rep.original)},
                      {"rescaled", detail::residual_json(rep.rescaled)},
                      {"homogeneous_groups", rep.homogeneous_groups}};
        return f;
    }
    if (check == "derive_ade") {
        AdeOptions opts;
        opts.seed = input.value("seed", std::uint64_t(20240611));
        const auto W = detail::number_field<unsigned>(input, "max_weight");
        const AdeResult r = derive_ade(phi, W, detail::optional_exponent(input, "horizon", basis), opts);
        json refuted = json::array();
        for (const auto &c : r.refuted) {
            json products = json::array();
            for (auto i : c.subset) {
                products.push_back(r.products[i].to_string());
            }
            refuted.push_back({{"products", products}, {"residual_at", exponent_to_json(c.refuted_at)}});
        }
        f.refuted = !r.found;
        f.evidence = {{"found", r.found},
                      {"max_weight", W},
                      {"subsets_examined", r.subsets_examined},
                      {"refuted_candidates", refuted}};
        f.evidence["horizon"] = r.horizon ? exponent_to_json(*r.horizon) : json(nullptr);
        f.evidence["check_horizon"] = r.check_horizon ? exponent_to_json(*r.check_horizon) : json(nullptr);
        if (r.found) {
            f.evidence["equation"] = r.equation.to_string();
            f.evidence["check"] = detail::residual_json(*r.check);
        } else {
            f.evidence["equation"] = nullptr;
        }
        return f;
    }
    throw Error(ErrorCode::SchemaError, "unknown check '" + check + "'");
}

inline Certificate formal_certificate(json input, json basis_json)
{
    const BasisPtr b = basis_from_block(basis_json);
    Findings f = formal_findings(input, b);
    return make_certificate(f.refuted ? "FormalRefutation" : "FormalSatisfaction", std::move(input),
                            std::move(basis_json), f);
}

inline Certificate substitute_certificate(const DiffPolynomial &F, const FormalSeries &phi,
                                          const FormalSeries::Bound &horizon = std::nullopt, bool with_prop3 = false)
{
    json input = {{"check", "substitute"}, {"equation", F.to_string()}, {"series", series_to_json(phi)}};
    input["horizon"] = horizon ? exponent_to_json(*horizon) : json(nullptr);
    input["prop3"] = with_prop3;
    return formal_certificate(std::move(input), basis_block(*phi.basis()));
}

inline Certificate rescale_certificate(const DiffPolynomial &F, const FormalSeries &phi,
                                       const std::vector<Rational> &scalars,
                                       const FormalSeries::Bound &horizon = std::nullopt)
{
    json sc = json::array();
    for (const auto &c : scalars) {
        sc.push_back(to_string(c));
    }
    json input = {{"check", "rescale"}, {"equation", F.to_string()}, {"series", series_to_json(phi)}, {"scalars", sc}};
    input["horizon"] = horizon ? exponent_to_json(*horizon) : json(nullptr);
    return formal_certificate(std::move(input), basis_block(*phi.basis()));
}

inline Certificate hilbert_certificate(std::uint64_t N, unsigned max_mu, unsigned max_nu, unsigned max_lambda = 2,
                                       mpfr_prec_t precision = default_precision)
{
    json input = {{"check", "hilbert"}, {"N", N}, {"max_mu", max_mu}, {"max_nu", max_nu}, {"max_lambda", max_lambda}};
    const FormalSeries z = zeta_prefix(N, precision);
    return formal_certificate(std::move(input), basis_block(*z.basis()));
}

inline Certificate derive_ade_certificate(const FormalSeries &phi, unsigned W,
                                          const FormalSeries::Bound &horizon = std::nullopt,
                                          std::uint64_t seed = 20240611)
{
    json input = {{"check", "derive_ade"}, {"series", series_to_json(phi)}, {"max_weight", W}, {"seed", seed}};
    input["horizon"] = horizon ? exponent_to_json(*horizon) : json(nullptr);
    return formal_certificate(std::move(input), basis_block(*phi.basis()));
}

// ---- verification -------------------------------------------------------------------------

inline Findings derive_findings(const Certificate &c)
{
    const std::string &k = c.kind;
    if (k == "FiniteBasisRefutation") {
        const bool indices = c.input.value("mode", std::string("exponents")) == "indices";
        return finite_basis_findings(c.input, indices ? nullptr : basis_from_block(c.basis));
    }
    if (k == "GapCriterion") {
        return gap_findings(c.input, basis_from_block(c.basis));
    }
    if (k == "CoefficientField") {
        return coefficient_field_findings(c.input);
    }
    if (k == "BivariateCriterion") {
        return bivariate_findings(c.input, basis_from_block(c.basis));
    }
    if (k == "SignFlipConstruction") {
        return signflip_findings(c.input);
    }
    if (k == "FormalSatisfaction" || k == "FormalRefutation") {
        Findings f = formal_findings(c.input, basis_from_block(c.basis));
        if ((k == "FormalRefutation") != f.refuted) {
            f.evidence["kind_mismatch"] = true;
        }
        return f;
    }
    throw Error(ErrorCode::SchemaError, "unknown certificate kind '" + k + "'");
}

struct VerifyResult {
    bool ok = false;
    std::vector<std::string> mismatches;
    std::optional<std::string> note;
};

// Recomputes the findings from the payload and compares them bit-exactly.
inline VerifyResult verify_certificate(const json &j)
{
    const Certificate c = Certificate::from_json(j);
    VerifyResult out;
    Findings f;
    try {
        f = derive_findings(c);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::SchemaError, std::string("certificate payload: ") + e.what());
    }
    if (f.scanned != c.scanned) {
        out.mismatches.push_back("scanned: certificate " + std::to_string(c.scanned) + ", recomputed "
                                 + std::to_string(f.scanned));
    }
    if (f.refuted != c.refuted) {
        out.mismatches.push_back("refuted flag differs");
    }
    if (f.evidence.dump() != c.evidence.dump()) {
        for (const auto &[key, v] : f.evidence.items()) {
            if (!c.evidence.contains(key) || c.evidence[key].dump() != v.dump()) {
                out.mismatches.push_back("evidence." + key + " differs");
            }
        }
        for (const auto &[key, _] : c.evidence.items()) {
            if (!f.evidence.contains(key)) {
                out.mismatches.push_back("evidence." + key + " is not produced by the check");
            }
        }
        if (out.mismatches.empty()) {
            out.mismatches.push_back("evidence differs");
        }
    }
    if (c.version != tool_version) {
        out.note = "certificate written by tool_version " + c.version + ", verified with " + tool_version;
    }
    out.ok = out.mismatches.empty();
    return out;
}

} // namespace dforge

#endif
