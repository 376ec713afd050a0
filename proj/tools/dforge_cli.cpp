// dforge command-line front end. Exit codes: 0 done, 2 refutation evidence
// found, 1 error (including certificate mismatches and invariance violations).

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dforge/dforge.hpp>

namespace
{

using namespace dforge;

constexpr int exit_done = 0;
constexpr int exit_error = 1;
constexpr int exit_evidence = 2;

struct Common {
    std::optional<std::string> config_path;
    std::optional<std::string> out;
};

AnalysisConfig config_for(const Common &c)
{
    AnalysisConfig cfg = load_config(c.config_path);
    if (c.out) {
        cfg.output = c.out;
    }
    return cfg;
}

void emit(const json &j, const AnalysisConfig &cfg)
{
    const std::string text = j.dump(2) + "\n";
    if (cfg.output) {
        write_text(*cfg.output, text);
    } else {
        std::cout << text;
    }
}

FormalSeries load_series(const std::string &path, const AnalysisConfig &cfg)
{
    return series_from_json(read_json(path), static_cast<mpfr_prec_t>(cfg.precision));
}

std::vector<Rational> parse_scalars(const std::string &text)
{
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_rational(item));
    }
    if (out.empty()) {
        throw Error(ErrorCode::SyntaxError, "expected a comma-separated list of rationals");
    }
    return out;
}

FormalSeries::Bound horizon_from(const std::optional<std::string> &cli, const AnalysisConfig &cfg,
                                 const SymbolBasis &basis)
{
    const std::optional<std::string> &text = cli ? cli : cfg.horizon;
    if (!text) {
        return std::nullopt;
    }
    Exponent e = parse_exponent(*text, symbol_options(basis));
    e.check_basis(basis);
    return e;
}

void flag_evidence(const Certificate &c)
{
    if (c.refuted) {
        std::cerr << "REFUTATION-EVIDENCE: " << c.kind << "\n";
    }
}

std::vector<Exponent> exponents_of(const FormalSeries &s)
{
    std::vector<Exponent> out;
    for (const auto &t : s.terms()) {
        out.push_back(t.exponent);
    }
    return out;
}

json lattice_json(const LatticeBasis &B)
{
    json gens = json::array(), cob = json::array();
    for (const auto &g : B.generators) {
        gens.push_back(g.to_string());
    }
    for (const auto &row : B.change_of_basis) {
        json r = json::array();
        for (const auto &v : row) {
            r.push_back(to_string(v));
        }
        cob.push_back(r);
    }
    return {{"rank", B.rank()},
            {"generators", gens},
            {"change_of_basis", cob},
            {"original_subset", B.original_subset},
            {"subset_is_basis", B.subset_is_basis},
            {"precision_tie", B.precision_tie}};
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"dforge: formal Dirichlet-series and algebraic differential equation toolkit"};
    app.require_subcommand(1);
    // --config and --out are accepted before or after the subcommand.
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "JSON configuration file");
    app.add_option("--out", common.out, "write the result to this file instead of stdout");

    // analyze
    auto *analyze = app.add_subcommand("analyze", "run the obstruction pipeline on a corpus or series spec");
    std::optional<std::string> an_corpus, an_series, an_eq, an_horizon;
    std::optional<std::uint64_t> an_rank;
    std::optional<std::string> an_ratio;
    bool an_derive = false;
    analyze->add_option("--corpus", an_corpus, "coefficient corpus ('n a_n' or 'n' lines, gzip accepted)");
    analyze->add_option("--series", an_series, "series spec JSON");
    analyze->add_option("--eq", an_eq, "equation to check by substitution (series input only)");
    analyze->add_option("--horizon", an_horizon, "exponent horizon, e.g. 'L2 + L3'");
    analyze->add_option("--rank-bound", an_rank, "lattice rank bound R");
    analyze->add_option("--ratio-threshold", an_ratio, "gap ratio threshold p/q");
    analyze->add_flag("--derive", an_derive, "also search for an equation with derive-ade (series input only)");

    auto *subst = app.add_subcommand("substitute", "substitute a series into an equation");
    std::string su_series, su_eq;
    std::optional<std::string> su_horizon;
    bool su_prop3 = false;
    subst->add_option("--series", su_series, "series spec JSON")->required();
    subst->add_option("--eq", su_eq, "equation")->required();
    subst->add_option("--horizon", su_horizon, "exponent horizon");
    subst->add_flag("--prop3", su_prop3, "also compute the leading-term threshold report");

    auto *elim = app.add_subcommand("eliminate-x", "eliminate the explicit variable x by a resultant");
    std::string el_eq;
    bool el_no_split = false;
    elim->add_option("--eq", el_eq, "equation")->required();
    elim->add_flag("--no-split", el_no_split, "keep the monomial content in the result");

    auto *basis_cmd = app.add_subcommand("basis", "integer lattice basis of the exponents");
    std::optional<std::string> ba_series, ba_corpus, ba_exps;
    basis_cmd->add_option("--series", ba_series, "series spec JSON");
    basis_cmd->add_option("--corpus", ba_corpus, "coefficient corpus");
    basis_cmd->add_option("--exponents", ba_exps, "semicolon-separated exponents, e.g. '2*ONE; 3*ONE'");

    auto *derive = app.add_subcommand("derive-ade", "search power-product relations of the series");
    std::string de_series;
    std::optional<unsigned> de_w;
    std::optional<std::string> de_horizon;
    derive->add_option("--series", de_series, "series spec JSON")->required();
    derive->add_option("--max-weight", de_w, "maximal product weight W");
    derive->add_option("--horizon", de_horizon, "detection horizon");

    auto *resc = app.add_subcommand("rescale", "rescale coefficients along the exponent lattice");
    std::string rs_series, rs_c;
    resc->add_option("--series", rs_series, "series spec JSON")->required();
    resc->add_option("--c", rs_c, "comma-separated nonzero rationals, one per generator")->required();

    auto *pde = app.add_subcommand("ode-to-pde", "convert a constant-coefficient equation to its PDE at s = 0");
    std::string pd_eq;
    std::size_t pd_mu = 1;
    std::vector<std::string> pd_lambda;
    pde->add_option("--eq", pd_eq, "equation")->required();
    pde->add_option("--mu", pd_mu, "number of variables");
    pde->add_option("--lambda", pd_lambda, "names of the generator symbols (default l1..l_mu)")->delimiter(',');

    auto *verify = app.add_subcommand("verify", "re-check a certificate file, or run a verifier");
    std::optional<std::string> ve_file;
    verify->add_option("file", ve_file, "certificate JSON");
    auto *hilbert = verify->add_subcommand("hilbert", "check the Hilbert functional equation on zeta prefixes");
    std::uint64_t hi_n = 20;
    unsigned hi_mu = 3, hi_nu = 3, hi_lambda = 2;
    hilbert->add_option("--n", hi_n, "prefix bound N");
    hilbert->add_option("--max-mu", hi_mu, "largest power of x d/dx");
    hilbert->add_option("--max-nu", hi_nu, "largest integer shift");
    hilbert->add_option("--max-lambda", hi_lambda, "largest s-derivative order");
    auto *vresc = verify->add_subcommand("rescale", "check rescaling invariance of a satisfied equation");
    std::string vr_series, vr_eq, vr_c;
    std::optional<std::string> vr_horizon;
    vresc->add_option("--series", vr_series, "series spec JSON")->required();
    vresc->add_option("--eq", vr_eq, "equation")->required();
    vresc->add_option("--c", vr_c, "comma-separated nonzero rationals")->required();
    vresc->add_option("--horizon", vr_horizon, "exponent horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? exit_done : exit_error;
    }

    try {
        const AnalysisConfig cfg = config_for(common);
        const auto prec = static_cast<mpfr_prec_t>(cfg.precision);

        if (analyze->parsed()) {
            if (an_corpus.has_value() == an_series.has_value()) {
                throw Error(ErrorCode::DegenerateInput, "give exactly one of --corpus or --series");
            }
            const std::uint64_t R = an_rank.value_or(cfg.rank_bound);
            const Rational thr = an_ratio ? parse_rational(*an_ratio) : cfg.ratio_threshold;
            std::vector<Certificate> certs;
            if (an_corpus) {
                if (an_eq || an_derive) {
                    throw Error(ErrorCode::DegenerateInput, "--eq and --derive need --series input");
                }
                std::vector<std::uint64_t> indices;
                for (const auto &e : read_corpus(*an_corpus)) {
                    if (e.a != 0) {
                        indices.push_back(e.n);
                    }
                }
                certs.push_back(finite_basis_certificate_indices(indices, R, cfg.factor_limit));
                const BasisPtr pb = basis_from_block(certs.back().basis);
                std::vector<Exponent> exps;
                std::vector<std::uint64_t> sorted = indices;
                std::sort(sorted.begin(), sorted.end());
                sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
                for (auto n : sorted) {
                    if (trial_factor(n, cfg.factor_limit).remainder == 1) {
                        exps.push_back(exponent_of_index(n, cfg.factor_limit));
                    }
                }
                certs.push_back(gap_certificate(exps, pb->with_precision(prec), thr));
            } else {
                const FormalSeries phi = load_series(*an_series, cfg);
                const auto exps = exponents_of(phi);
                certs.push_back(finite_basis_certificate(exps, phi.basis(), R));
                certs.push_back(gap_certificate(exps, phi.basis(), thr));
                const auto H = horizon_from(an_horizon, cfg, *phi.basis());
                if (an_eq) {
                    const DiffPolynomial F = parse_diffpoly(*an_eq, symbol_options(*phi.basis()));
                    certs.push_back(substitute_certificate(F, phi, H, true));
                }
                if (an_derive) {
                    certs.push_back(derive_ade_certificate(phi, cfg.max_weight, H, cfg.seed));
                }
            }
            json bundle = {{"tool_version", tool_version}, {"config", cfg.to_json()}, {"certificates", json::array()}};
            bool evidence = false;
            for (const auto &c : certs) {
                flag_evidence(c);
                evidence = evidence || c.refuted;
                bundle["certificates"].push_back(c.to_json());
            }
            emit(bundle, cfg);
            return evidence ? exit_evidence : exit_done;
        }

        if (subst->parsed()) {
            const FormalSeries phi = load_series(su_series, cfg);
            const DiffPolynomial F = parse_diffpoly(su_eq, symbol_options(*phi.basis()));
            const Certificate c = substitute_certificate(F, phi, horizon_from(su_horizon, cfg, *phi.basis()), su_prop3);
            flag_evidence(c);
            emit(c.to_json(), cfg);
            return c.refuted ? exit_evidence : exit_done;
        }

        if (elim->parsed()) {
            const DiffPolynomial F = parse_diffpoly(el_eq);
            EliminationOptions opts;
            opts.split_content = !el_no_split;
            const DiffPolynomial R = eliminate_x(F, opts);
            const ContentSplit split = split_monomial_content(R);
            emit({{"equation", F.to_string()},
                  {"eliminated", R.to_string()},
                  {"content", split.content.powers.empty() && split.content.x_degree == 0 ? "1" : split.content.to_string()},
                  {"primitive", split.primitive.to_string()}},
                 cfg);
            return exit_done;
        }

        if (basis_cmd->parsed()) {
            std::vector<Exponent> exps;
            BasisPtr b;
            const int given = ba_series.has_value() + ba_corpus.has_value() + ba_exps.has_value();
            if (given != 1) {
                throw Error(ErrorCode::DegenerateInput, "give exactly one of --series, --corpus or --exponents");
            }
            if (ba_series) {
                const FormalSeries phi = load_series(*ba_series, cfg);
                exps = exponents_of(phi);
                b = phi.basis();
            } else if (ba_corpus) {
                std::vector<std::uint64_t> idx;
                for (const auto &e : read_corpus(*ba_corpus)) {
                    if (e.a != 0) {
                        idx.push_back(e.n);
                    }
                }
                const PrimeSupport ps = prime_support(idx, cfg.factor_limit);
                b = prime_log_basis(ps.primes, prec);
                for (auto n : idx) {
                    if (trial_factor(n, cfg.factor_limit).remainder == 1) {
                        exps.push_back(exponent_of_index(n, cfg.factor_limit));
                    }
                }
            } else {
                std::stringstream ss(*ba_exps);
                std::string item;
                while (std::getline(ss, item, ';')) {
                    if (item.find_first_not_of(" \t") != std::string::npos) {
                        exps.push_back(parse_exponent(item));
                    }
                }
            }
            const LatticeBasis B = integer_basis(exps, b.get());
            emit(lattice_json(B), cfg);
            return exit_done;
        }

        if (derive->parsed()) {
            const FormalSeries phi = load_series(de_series, cfg);
            const Certificate c = derive_ade_certificate(phi, de_w.value_or(cfg.max_weight),
                                                         horizon_from(de_horizon, cfg, *phi.basis()), cfg.seed);
            flag_evidence(c);
            emit(c.to_json(), cfg);
            return c.refuted ? exit_evidence : exit_done;
        }

        if (resc->parsed()) {
            const FormalSeries phi = load_series(rs_series, cfg);
            const LatticeBasis B = integer_basis(exponents_of(phi), phi.basis().get());
            emit(series_to_json(rescale(phi, B, parse_scalars(rs_c))), cfg);
            return exit_done;
        }

        if (pde->parsed()) {
            const PdeResult r = ode_to_pde(parse_diffpoly(pd_eq), pd_mu, pd_lambda);
            emit({{"equation", pd_eq},
                  {"variables", r.x_names},
                  {"lambdas", r.lambda_names},
                  {"pde", r.pde.to_string()},
                  {"normalized", r.normalized.to_string()}},
                 cfg);
            return exit_done;
        }

        if (hilbert->parsed()) {
            const Certificate c = hilbert_certificate(hi_n, hi_mu, hi_nu, hi_lambda, prec);
            emit(c.to_json(), cfg);
            if (c.refuted) {
                std::cerr << "error: VerificationFailed: Hilbert functional equation residual is nonzero\n";
                return exit_error;
            }
            return exit_done;
        }

        if (vresc->parsed()) {
            const FormalSeries phi = load_series(vr_series, cfg);
            const DiffPolynomial F = parse_diffpoly(vr_eq, symbol_options(*phi.basis()));
            const Certificate c =
                rescale_certificate(F, phi, parse_scalars(vr_c), horizon_from(vr_horizon, cfg, *phi.basis()));
            emit(c.to_json(), cfg);
            return exit_done;
        }

        if (verify->parsed()) {
            if (!ve_file) {
                throw Error(ErrorCode::DegenerateInput, "verify needs a certificate file or a verifier subcommand");
            }
            // A single certificate or an analyze bundle {certificates: [...]}.
            const json doc = read_json(*ve_file);
            std::vector<json> certs;
            if (doc.is_object() && doc.contains("certificates") && doc["certificates"].is_array()) {
                certs.assign(doc["certificates"].begin(), doc["certificates"].end());
            } else {
                certs.push_back(doc);
            }
            bool all_ok = true;
            for (std::size_t i = 0; i < certs.size(); ++i) {
                const VerifyResult r = verify_certificate(certs[i]);
                const std::string label = certs.size() > 1 ? "[" + std::to_string(i) + "] " : "";
                if (r.note) {
                    std::cout << label << "note: " << *r.note << "\n";
                }
                if (r.ok) {
                    std::cout << label << "OK\n";
                }
                for (const auto &m : r.mismatches) {
                    std::cout << label << "MISMATCH: " << m << "\n";
                }
                all_ok = all_ok && r.ok;
            }
            return all_ok ? exit_done : exit_error;
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    } catch (const json::exception &e) {
        std::cerr << "error: SchemaError: " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
