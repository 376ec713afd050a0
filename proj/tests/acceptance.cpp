// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every certificate produced along the way is re-verified by criterion 10.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace
{

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string &what)
{
    if (!ok) {
        throw Failure(what);
    }
}

std::vector<Certificate> emitted;

const DiffPolynomial riccati = poly("f' + lam*f + lam*f^2", {"lam"});

std::vector<Exponent> exponents_of(const FormalSeries &s)
{
    std::vector<Exponent> out;
    for (const auto &t : s.terms()) {
        out.push_back(t.exponent);
    }
    return out;
}

// ---- 1 ----------------------------------------------------------------------------------
std::string hilbert()
{
    for (std::uint64_t N = 2; N <= 50; ++N) {
        const Certificate c = hilbert_certificate(N, 3, 3);
        require(c.kind == "FormalSatisfaction" && c.evidence["all_zero"].get<bool>(),
                "nonzero residual at N=" + std::to_string(N));
        require(c.evidence["checks"].size() == 4 * 4 * 3, "unexpected check grid at N=" + std::to_string(N));
        emitted.push_back(c);
    }
    return "N = 2..50, mu, nu <= 3, s-derivatives <= 2: all residuals exactly zero";
}

// ---- 2 ----------------------------------------------------------------------------------
std::string elimination()
{
    const DiffPolynomial F = poly("f - x^2");
    const DiffPolynomial R = eliminate_x(F);
    const DiffPolynomial expected = poly("f'^2 - 4*f");
    require(R == expected || R == -expected, "eliminate_x(f - x^2) = " + R.to_string());
    const XPoly phi = xpoly::monomial(2, Coefficient(1));
    require(xpoly::is_zero(evaluate_on_polynomial(F, phi)), "F does not vanish on x^2");
    require(xpoly::is_zero(evaluate_on_polynomial(R, phi)), "F** does not vanish on x^2");

    std::mt19937_64 rng(24);
    int compared = 0, attempts = 0;
    while (compared < 100) {
        require(++attempts < 1000, "could not draw 100 eliminable polynomials");
        DiffPolynomial G = random_poly(rng, 3, 3, 3);
        if (G.x_degree() == 0) {
            G += poly("x");
        }
        const auto A = G.as_x_polynomial();
        const auto B = G.total_derivative().as_x_polynomial();
        if ((A.size() - 1) + (B.size() - 1) == 0) {
            continue;
        }
        const DiffPolynomial oracle = sylvester_oracle(A, B);
        if (oracle.is_zero()) {
            require(error_code_of([&] { eliminate_x(G); }) == ErrorCode::ResultantVanished,
                    "vanishing resultant not reported for " + G.to_string());
        } else {
            require(eliminate_x(G) == oracle, "resultant disagrees with the Leibniz oracle on " + G.to_string());
        }
        ++compared;
    }
    return "F** = " + R.to_string() + "; Leibniz Sylvester oracle agrees on 100 random F";
}

// ---- 3 ----------------------------------------------------------------------------------
std::string prop3()
{
    const FormalSeries phi = load_series("geometric.json");
    const Prop3Report rep = prop3_threshold(riccati, phi);
    const SymbolBasis &basis = *phi.basis();
    const auto &terms = phi.terms();
    std::size_t above = 0;
    for (std::size_t i = 1; i < terms.size(); ++i) {
        if (!terms[i].exponent.numeric(basis).certainly_greater(rep.threshold)) {
            continue;
        }
        ++above;
        require(std::find(rep.verified_indices.begin(), rep.verified_indices.end(), i) != rep.verified_indices.end(),
                "index " + std::to_string(i) + " above the threshold was not verified");
        std::vector<Exponent> prev;
        for (std::size_t j = 0; j < i; ++j) {
            prev.push_back(terms[j].exponent);
        }
        const LatticeBasis B = integer_basis(prev, &basis);
        const auto w = express(terms[i].exponent, B);
        require(w && reconstruct(*w, B) == terms[i].exponent,
                "exponent " + terms[i].exponent.to_string() + " is not an integer combination of earlier ones");
    }
    require(above > 0, "no exponent lies above the threshold");
    require(rep.verified_indices.size() == above, "verified set differs from the exponents above the threshold");
    emitted.push_back(substitute_certificate(riccati, phi, std::nullopt, true));
    return std::to_string(above) + " exponents above threshold " + rep.threshold.to_decimal(8) + ", 0 failures";
}

// ---- 4 ----------------------------------------------------------------------------------
std::string root_bounds()
{
    std::mt19937_64 rng(33);
    const auto basis = SymbolBasis::make({}, 128);
    int done = 0;
    while (done < 50) {
        const ExpPolynomial L = random_exp_poly(rng);
        if (L.is_zero()) {
            continue;
        }
        const RootBound rb = exp_poly_root_bound(L, *basis);
        const int expect = L.terms()[L.lead_index()].c.constant_value() > 0 ? 1 : -1;
        if (L.terms().size() > 1) {
            require(verify_dominance(L, rb.B, *basis), "dominance fails at B for " + L.to_string());
        }
        const double B = rb.B.get_d();
        for (int i = 1; i <= 1000; ++i) {
            require(mpfr_sign(L, B + i) == expect, "sign change beyond B for " + L.to_string());
        }
        ++done;
    }
    return "50 exponential polynomials, 1000 grid points each";
}

// ---- 5 ----------------------------------------------------------------------------------
std::string lattice()
{
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> ent(-3, 3), dim(1, 4);
    const auto basis = primes_basis({2, 3, 5, 7});
    for (int iter = 0; iter < 1000; ++iter) {
        const int rows = dim(rng), cols = dim(rng);
        std::vector<Exponent> in;
        for (int r = 0; r < rows; ++r) {
            Exponent e;
            for (int c = 0; c < cols; ++c) {
                e += Exponent::symbol(AXES[c], ent(rng));
            }
            in.push_back(e);
        }
        const LatticeBasis B = integer_basis(in, basis.get());
        const IntMatrix M = to_matrix(in);
        const std::size_t r = rank_oracle(M);
        require(B.rank() == r, "rank differs from the minor oracle");
        for (std::size_t i = 0; i < in.size(); ++i) {
            const auto w = express(in[i], B);
            require(w.has_value(), "input not in the lattice of the generators");
            require(reconstruct(*w, B) == in[i], "express then reconstruct is not the identity");
        }
        if (r > 0) {
            require(gcd_of_minors(M, r) == gcd_of_minors(to_matrix(B.generators), r), "lattice index differs");
        }
    }
    return "1000 random integer matrices up to 4x4, entries in [-3, 3]";
}

// ---- 6 ----------------------------------------------------------------------------------
std::string zeta_obstruction()
{
    std::vector<std::uint64_t> ns(100);
    for (std::uint64_t n = 1; n <= 100; ++n) {
        ns[n - 1] = n;
    }
    const Certificate fb = finite_basis_certificate_indices(ns, 24);
    require(fb.evidence["rank"] == 25, "rank " + fb.evidence["rank"].dump() + " instead of 25");
    require(fb.refuted && fb.kind == "FiniteBasisRefutation", "no refutation evidence for R = 24");
    emitted.push_back(fb);

    const FormalSeries z = load_series("zeta30.json");
    const Exponent h = L(2) + L(3);
    std::size_t candidates = 0;
    for (unsigned W = 2; W <= 4; ++W) {
        const AdeResult r = derive_ade(z, W, h);
        require(!r.found, "W=" + std::to_string(W) + " found " + r.equation.to_string());
        // Each candidate relation, rebuilt exactly, leaves a nonzero residual.
        for (const auto &cand : r.refuted) {
            std::vector<PowerProduct> chosen;
            for (auto i : cand.subset) {
                chosen.push_back(r.products[i]);
            }
            DependenceOptions opts;
            opts.compute_wronskian = false;
            const DependenceResult dep = wronskian_dependence(chosen, z, r.horizon, opts);
            require(dep.kind == DependenceKind::Dependent, "candidate without an exact relation");
            DiffPolynomial F;
            for (std::size_t j = 0; j < chosen.size(); ++j) {
                F += chosen[j].to_diffpoly().scaled(dep.null_vector[j]);
            }
            require(!substitute(F, z).is_zero(), "candidate " + F.to_string() + " is not refuted");
            ++candidates;
        }
        emitted.push_back(derive_ade_certificate(z, W, h));
    }
    return "rank 25 = pi(100); W <= 4 at horizon log 6: not found, " + std::to_string(candidates)
           + " candidates refuted by substitute";
}

// ---- 7 ----------------------------------------------------------------------------------
std::string invariance()
{
    std::vector<std::pair<DiffPolynomial, FormalSeries>> cases;
    for (const auto &item : read_json(fixture("satisfaction.json"))) {
        const FormalSeries phi = load_series(item["series"].get<std::string>());
        cases.push_back({parse_diffpoly(item["equation"].get<std::string>(), symbol_options(*phi.basis())), phi});
    }
    const FormalSeries p23 = load_series("product23.json");
    const AdeResult ade = derive_ade(p23, 5);
    require(ade.found, "no equation derived for the two-symbol product series");
    cases.push_back({ade.equation, p23});

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-6, 6), den(1, 5);
    for (const auto &[F, phi] : cases) {
        const std::size_t mu = integer_basis(exponents_of(phi), phi.basis().get()).rank();
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Rational> c;
            for (std::size_t k = 0; k < mu; ++k) {
                const long p = num(rng);
                c.push_back(rat(p == 0 ? 1 : p, den(rng)));
            }
            const Certificate cert = rescale_certificate(F, phi, c);
            require(cert.kind == "FormalSatisfaction", "rescaled residual nonzero for " + F.to_string());
            emitted.push_back(cert);
        }
    }
    return std::to_string(cases.size()) + " (F, series) pairs x 10 scalar tuples";
}

// ---- 8 ----------------------------------------------------------------------------------
std::string ode_pde()
{
    const PdeResult r = ode_to_pde(riccati, 1, {"lam"});
    PdePolynomial expected(1, {});
    expected.add({{{1}, 1}}, -Coefficient::symbol("x"));
    expected.add({{{0}, 1}}, Coefficient(1));
    expected.add({{{0}, 2}}, Coefficient(1));
    PdePolynomial negated(1, {});
    for (const auto &[m, c] : expected.terms()) {
        negated.add(m, -c);
    }
    const std::string got = r.normalized.to_string();
    require(got == expected.to_string() || got == negated.to_string(), "PDE is " + got);
    Coefficient G;
    for (int k = 1; k <= 30; ++k) {
        G += Coefficient::symbol("x", k);
    }
    const PdeCheck check = evaluate_pde(r.normalized, r.x_names, G, 30);
    require(check.is_zero(), "residual " + check.residual.to_string());
    return got + " = 0; x/(1-x) to order 30 leaves zero residual";
}

// ---- 9 ----------------------------------------------------------------------------------
std::string wronskian()
{
    const FormalSeries e = load_series("exp1.json");
    const AdeResult a = derive_ade(e, 2);
    const DiffPolynomial lin = poly("f + f'");
    require(a.found && (a.equation == lin || a.equation == -lin), "e^{-s} gave " + a.equation.to_string());
    require(substitute(a.equation, e).is_zero(), "f + f' not confirmed by substitute");
    emitted.push_back(derive_ade_certificate(e, 2));

    const FormalSeries g = load_series("geometric.json");
    const AdeResult b = derive_ade(g, 3);
    require(b.found, "no equation for the geometric series");
    std::map<std::string, Coefficient> c;
    for (std::size_t j = 0; j < b.subset.size(); ++j) {
        c[b.products[b.subset[j]].to_string()] = b.coefficients[j];
    }
    const Coefficient lam = Coefficient::symbol("lam");
    require(c.size() == 3 && c.count("f'") && c.count("f") && c.count("f^2"), "unexpected products");
    require(c["f"] == c["f'"] * lam && c["f^2"] == c["f'"] * lam, "not proportional to f' + lam*(f + f^2)");
    require(substitute(b.equation, g).is_zero(), "Riccati equation not confirmed by substitute");
    emitted.push_back(derive_ade_certificate(g, 3));
    return a.equation.to_string() + " and " + b.equation.to_string();
}

// ---- 10 ---------------------------------------------------------------------------------
std::string round_trip()
{
    require(!emitted.empty(), "no certificates were emitted");
    for (const auto &c : emitted) {
        const VerifyResult r = verify_certificate(json::parse(c.to_json().dump()));
        require(r.ok, c.kind + ": " + (r.mismatches.empty() ? std::string("mismatch") : r.mismatches.front()));
    }
    return std::to_string(emitted.size()) + " certificates re-verified bit-exactly";
}

struct Criterion {
    int id;
    const char *title;
    double limit_seconds; // 0 = no runtime bound
    std::function<std::string()> run;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "Hilbert functional equation", 10, hilbert},
        {2, "elimination soundness", 30, elimination},
        {3, "leading-term threshold pipeline", 20, prop3},
        {4, "exponential-polynomial root bound", 20, root_bounds},
        {5, "lattice correctness", 30, lattice},
        {6, "zeta obstruction evidence", 0, zeta_obstruction},
        {7, "rescaling invariance", 10, invariance},
        {8, "ODE to PDE fixture", 5, ode_pde},
        {9, "Wronskian equation recovery", 10, wronskian},
        {10, "certificate round-trip", 0, round_trip},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.run();
        } catch (const std::exception &e) {
            ok = false;
            detail = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && c.limit_seconds > 0 && secs > c.limit_seconds) {
            ok = false;
            detail = "runtime over the limit; " + detail;
        }
        failures += !ok;
        std::ostringstream timing;
        timing.precision(2);
        timing << std::fixed << secs << " s";
        if (c.limit_seconds > 0) {
            timing << " / limit " << c.limit_seconds << " s";
        }
        std::cout << (ok ? "PASS" : "FAIL") << " " << c.id << " " << c.title << " (" << timing.str() << "): " << detail
                  << std::endl;
    }
    std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - failures << "/" << criteria.size()
              << std::endl;
    return failures ? 1 : 0;
}
