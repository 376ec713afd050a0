#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace
{

// Coefficient multiplier of n^{-s} under rescaling by c over {L2, L3, L5}: the
// product of c_k^{v_p(n)}, by repeated division.
Rational smooth_weight(std::uint64_t n, const std::vector<Rational> &c)
{
    const std::uint64_t ps[] = {2, 3, 5};
    Rational k(1);
    for (std::size_t i = 0; i < 3; ++i) {
        while (n % ps[i] == 0) {
            n /= ps[i];
            k *= c[i];
        }
    }
    return k;
}

std::vector<std::uint64_t> smooth235(std::uint64_t limit)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t n = 1; n <= limit; ++n) {
        std::uint64_t m = n;
        for (std::uint64_t p : {2, 3, 5}) {
            while (m % p == 0) {
                m /= p;
            }
        }
        if (m == 1) {
            out.push_back(n);
        }
    }
    return out;
}

FormalSeries random_smooth_series(std::mt19937_64 &rng, std::uint64_t limit)
{
    std::vector<Term> terms;
    for (auto n : smooth235(limit)) {
        if (rng() % 2) {
            terms.push_back({log_exponent(n, {2, 3, 5}),
                             xpoly::constant(Coefficient(rat(static_cast<long>(rng() % 11) - 5, 1 + rng() % 4)))});
        }
    }
    return make_series(primes_basis({2, 3, 5}), std::move(terms), std::nullopt);
}

std::vector<Rational> random_scalars(std::mt19937_64 &rng, std::size_t k)
{
    std::vector<Rational> c;
    for (std::size_t i = 0; i < k; ++i) {
        long p = static_cast<long>(rng() % 9) - 4;
        c.push_back(rat(p == 0 ? 1 : p, 1 + rng() % 5));
    }
    return c;
}

LatticeBasis L235()
{
    return LatticeBasis::from_generators({L(2), L(3), L(5)});
}

// f(s) = G(x_k e^{-lambda_k s}) at s = 0: f^(j) maps x^a to (-sum a_k lambda_k)^j x^a.
Coefficient direct_pde_oracle(const DiffPolynomial &F, const Coefficient &G, const std::vector<std::string> &xs,
                              const std::vector<std::string> &lams)
{
    auto derivative = [&](unsigned j) {
        Coefficient out;
        for (const auto &[m, q] : G.terms()) {
            Coefficient eigen;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                auto it = m.powers.find(xs[k]);
                if (it != m.powers.end()) {
                    eigen -= Coefficient(Rational(it->second)) * Coefficient::symbol(lams[k]);
                }
            }
            out += Coefficient::from_monomial(m, q) * eigen.pow(j);
        }
        return out;
    };
    Coefficient total;
    for (const auto &[m, c] : F.terms()) {
        Coefficient v = c;
        for (const auto &[z, e] : m.powers) {
            v *= derivative(z.order).pow(e);
        }
        total += v;
    }
    return total;
}

PdeMonomial G_power(std::vector<unsigned> alpha, unsigned k = 1)
{
    return {{std::move(alpha), k}};
}

} // namespace

// ---- rescaling ----------------------------------------------------------------------------

TEST(Rescale, UnitScalarsAreIdentity)
{
    const FormalSeries phi = load_series("geometric.json");
    const LatticeBasis B = integer_basis({Exponent::symbol("lam", Rational(1))}, phi.basis().get());
    EXPECT_EQ(rescale(phi, B, {Rational(1)}), phi);
}

TEST(Rescale, GeometricPicksUpPowers)
{
    const FormalSeries phi = load_series("geometric.json");
    const LatticeBasis B = LatticeBasis::from_generators({Exponent::symbol("lam", Rational(1))});
    const Rational g(2, 7);
    const FormalSeries r = rescale(phi, B, {g});
    for (const auto &t : r.terms()) {
        const long n = t.exponent.coords().at("lam").get_num().get_si();
        EXPECT_EQ(t.coeff, xpoly::constant(Coefficient(rational_pow(g, n))));
    }
    EXPECT_EQ(r.truncation(), phi.truncation());
}

TEST(Rescale, DirichletPrefixTwoOneOne)
{
    const FormalSeries z = dirichlet({1, 2, 3, 4, 5, 6}, {2, 3, 5});
    const FormalSeries r = rescale(z, L235(), {Rational(2), Rational(1), Rational(1)});
    EXPECT_EQ(r.coefficient_at(log_exponent(4, {2, 3, 5})), xpoly::constant(Coefficient(4)));
    EXPECT_EQ(r.coefficient_at(log_exponent(6, {2, 3, 5})), xpoly::constant(Coefficient(2)));
    EXPECT_EQ(r.coefficient_at(log_exponent(5, {2, 3, 5})), xpoly::constant(Coefficient(1)));
}

TEST(Rescale, MatchesFactorizationOracle)
{
    std::mt19937_64 rng(17);
    const auto ns = smooth235(500);
    const FormalSeries z = dirichlet(ns, {2, 3, 5});
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_scalars(rng, 3);
        const FormalSeries r = rescale(z, L235(), c);
        for (auto n : ns) {
            EXPECT_EQ(r.coefficient_at(log_exponent(n, {2, 3, 5})), xpoly::constant(Coefficient(smooth_weight(n, c))));
        }
    }
}

TEST(Rescale, CompositionIsComponentwiseProduct)
{
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const FormalSeries a = random_smooth_series(rng, 300);
        const auto c = random_scalars(rng, 3), d = random_scalars(rng, 3);
        std::vector<Rational> cd(3);
        for (int k = 0; k < 3; ++k) {
            cd[k] = c[k] * d[k];
        }
        EXPECT_EQ(rescale(rescale(a, L235(), c), L235(), d), rescale(a, L235(), cd));
    }
}

TEST(Rescale, MultiplicativeOverProducts)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const FormalSeries a = random_smooth_series(rng, 60);
        const FormalSeries b = random_smooth_series(rng, 60);
        const auto c = random_scalars(rng, 3);
        EXPECT_EQ(rescale(a * b, L235(), c), rescale(a, L235(), c) * rescale(b, L235(), c));
    }
}

TEST(Rescale, SymbolicCarriesWeightVectors)
{
    const FormalSeries z = dirichlet({12}, {2, 3, 5});
    const FormalSeries r = rescale_symbolic(z, L235());
    const Coefficient expected = Coefficient::symbol("c#1", 2) * Coefficient::symbol("c#2", 1);
    EXPECT_EQ(r.coefficient_at(log_exponent(12, {2, 3, 5})), xpoly::constant(expected));
}

TEST(Rescale, Errors)
{
    const FormalSeries z = dirichlet({1, 2, 5}, {2, 3, 5});
    const LatticeBasis B23 = LatticeBasis::from_generators({L(2), L(3)});
    EXPECT_EQ(error_code_of([&] { rescale(z, B23, {Rational(1), Rational(2)}); }), ErrorCode::NotInLattice);
    EXPECT_EQ(error_code_of([&] { rescale(z, L235(), {Rational(1), Rational(0), Rational(1)}); }),
              ErrorCode::ZeroScalar);
    EXPECT_EQ(error_code_of([&] { rescale(z, L235(), {Rational(1)}); }), ErrorCode::DegenerateInput);
}

// ---- invariance -----------------------------------------------------------------------------

TEST(RescaleInvariance, GeometricHalf)
{
    const FormalSeries phi = load_series("geometric.json");
    const DiffPolynomial F = poly("f' + lam*f + lam*f^2", {"lam"});
    const LatticeBasis B = LatticeBasis::from_generators({Exponent::symbol("lam", Rational(1))});
    const auto rep = verify_rescale_invariance(F, phi, B, {Rational(1, 2)});
    EXPECT_TRUE(rep.rescaled.is_zero());
    EXPECT_EQ(rep.rescaled.horizon, rep.original.horizon);
    EXPECT_GT(rep.homogeneous_groups, 0u);
    EXPECT_TRUE(verify_rescale_invariance(F, phi, B, {Rational(1)}).rescaled.is_zero());
}

TEST(RescaleInvariance, SatisfactionFixturesRandomScalars)
{
    std::mt19937_64 rng(29);
    for (const auto &item : read_json(fixture("satisfaction.json"))) {
        const FormalSeries phi = load_series(item["series"].get<std::string>());
        const DiffPolynomial F = parse_diffpoly(item["equation"].get<std::string>(), symbol_options(*phi.basis()));
        std::vector<Exponent> exps;
        for (const auto &t : phi.terms()) {
            exps.push_back(t.exponent);
        }
        const LatticeBasis B = integer_basis(exps, phi.basis().get());
        for (int trial = 0; trial < 10; ++trial) {
            const auto rep = verify_rescale_invariance(F, phi, B, random_scalars(rng, B.rank()));
            EXPECT_TRUE(rep.rescaled.is_zero()) << item.dump();
        }
    }
}

TEST(RescaleInvariance, ProductSeriesWithDerivedAde)
{
    // Four exponents 0, L2, L3, L2+L3 need a fourth-order linear relation (weight 5).
    const FormalSeries phi = load_series("product23.json");
    const AdeResult ade = derive_ade(phi, 5);
    ASSERT_TRUE(ade.found);
    const LatticeBasis B = LatticeBasis::from_generators({L(2), L(3)});
    const auto rep = verify_rescale_invariance(ade.equation, phi, B, {Rational(2), Rational(3)});
    EXPECT_TRUE(rep.rescaled.is_zero());
}

TEST(RescaleInvariance, UnsatisfiedEquationIsRejected)
{
    const FormalSeries phi = load_series("geometric.json");
    const LatticeBasis B = LatticeBasis::from_generators({Exponent::symbol("lam", Rational(1))});
    EXPECT_EQ(error_code_of([&] { verify_rescale_invariance(poly("f' + f"), phi, B, {Rational(2)}); }),
              ErrorCode::NotFormallySatisfied);
}

// ---- ODE -> PDE ---------------------------------------------------------------------------

TEST(OdeToPde, RiccatiBecomesXGPrime)
{
    const PdeResult r = ode_to_pde(poly("f' + lam*f + lam*f^2", {"lam"}), 1, {"lam"});
    // -lam x G' + lam G + lam G^2, normalised by the common factor lam.
    PdePolynomial expected(1, {});
    expected.add(G_power({1}), -Coefficient::symbol("x"));
    expected.add(G_power({0}), Coefficient(1));
    expected.add(G_power({0}, 2), Coefficient(1));
    EXPECT_EQ(r.normalized.to_string(), expected.to_string());
    EXPECT_EQ(r.x_names, std::vector<std::string>{"x"});
}

TEST(OdeToPde, SecondOrderKeepsLambdaSymbolic)
{
    const PdeResult r = ode_to_pde(poly("f'' - f'"), 1);
    // D^2 G - D G with D = -l1 x d/dx: l1^2 x^2 G'' + (l1^2 + l1) x G'.
    const Coefficient l = Coefficient::symbol("l1"), x = Coefficient::symbol("x");
    PdePolynomial expected(1, {});
    expected.add(G_power({2}), l * l * x * x);
    expected.add(G_power({1}), (l * l + l) * x);
    EXPECT_EQ(r.pde.to_string(), expected.to_string());
}

TEST(OdeToPde, FixturesSolveTheirPde)
{
    const auto fixtures = load_pde_fixtures();
    ASSERT_GE(fixtures.size(), 4u);
    for (const auto &fx : fixtures) {
        const PdeResult r = ode_to_pde(fx.F, fx.lambda_names.size(), fx.lambda_names);
        const PdeCheck c = evaluate_pde(r.normalized, r.x_names, fx.G, fx.order);
        EXPECT_TRUE(c.is_zero()) << fx.name << ": " << c.residual.to_string();
        EXPECT_GE(c.valid_degree, 1) << fx.name;
    }
}

TEST(OdeToPde, WrongClosedFormLeavesResidual)
{
    // G = x/(1-x) solves the Riccati image but not the Euler one.
    const auto fixtures = load_pde_fixtures();
    const PdeResult r = ode_to_pde(poly("f' + lam*f", {"lam"}), 1, {"lam"});
    const PdeCheck c = evaluate_pde(r.normalized, r.x_names, fixtures.front().G, fixtures.front().order);
    EXPECT_FALSE(c.is_zero());
}

TEST(OdeToPde, MatchesDirectEigenExpansion)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t mu = 1 + rng() % 2;
        std::vector<std::string> xs = mu == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x1", "x2"};
        std::vector<std::string> lams = mu == 1 ? std::vector<std::string>{"l1"} : std::vector<std::string>{"l1", "l2"};
        DiffPolynomial F;
        const int nterms = 1 + rng() % 3;
        for (int t = 0; t < nterms; ++t) {
            DiffPolynomial m(rat(static_cast<long>(rng() % 7) - 3, 1 + rng() % 3));
            const int nf = 1 + rng() % 2;
            for (int i = 0; i < nf; ++i) {
                m *= DiffPolynomial::f(rng() % 3);
            }
            if (rng() % 3 == 0) {
                m = m.scaled(Coefficient::symbol("q"));
            }
            F += m;
        }
        if (F.is_zero()) {
            continue;
        }
        Coefficient G;
        const int gterms = 1 + rng() % 3;
        for (int t = 0; t < gterms; ++t) {
            Coefficient m(rat(static_cast<long>(rng() % 5) + 1, 1 + rng() % 2));
            for (const auto &xn : xs) {
                const int a = rng() % 4;
                if (a) {
                    m *= Coefficient::symbol(xn, a);
                }
            }
            G += m;
        }
        const PdeResult r = ode_to_pde(F, mu);
        const PdeCheck c = evaluate_pde(r.pde, r.x_names, G, 1000);
        EXPECT_EQ(c.residual, direct_pde_oracle(F, G, xs, lams)) << F.to_string() << " on " << G.to_string();
    }
}

TEST(OdeToPde, Errors)
{
    EXPECT_EQ(error_code_of([] { ode_to_pde(poly("f(s+1) - f"), 1); }), ErrorCode::ShiftPresent);
    EXPECT_EQ(error_code_of([] { ode_to_pde(poly("f' - x"), 1); }), ErrorCode::ExplicitVariable);
    EXPECT_EQ(error_code_of([] { ode_to_pde(poly("f"), 0); }), ErrorCode::DegenerateInput);
}

// ---- Hilbert ------------------------------------------------------------------------------

TEST(Hilbert, EulerOperatorShiftsByOne)
{
    const FormalSeries z = zeta_prefix(5);
    EXPECT_EQ(x_euler(z), integer_shift(z, 1));
    EXPECT_EQ(x_euler(x_euler(zeta_prefix(4))), integer_shift(zeta_prefix(4), 2));
}

TEST(Hilbert, IntegerShiftMultipliesByPowerOfN)
{
    const std::uint64_t N = 30;
    const FormalSeries z = zeta_prefix(N, default_precision, false);
    const std::vector<std::uint64_t> ps = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    for (long nu : {1L, 2L, -1L}) {
        const FormalSeries s = integer_shift(z, nu);
        for (std::uint64_t n = 1; n <= N; ++n) {
            EXPECT_EQ(s.coefficient_at(log_exponent(n, ps)),
                      xpoly::constant(Coefficient(rational_pow(Rational(static_cast<long>(n)), nu))));
        }
    }
}

TEST(Hilbert, AllPrefixesUpTo50)
{
    for (std::uint64_t N = 2; N <= 50; ++N) {
        const auto rep = verify_hilbert_zeta(N, 3, 3);
        EXPECT_TRUE(rep.all_zero()) << "N=" << N;
        EXPECT_EQ(rep.checks.size(), 4u * 4u * 3u);
    }
}

TEST(Hilbert, PerturbedPrefixFails)
{
    const FormalSeries z = zeta_prefix(8);
    std::vector<Term> terms(z.terms().begin(), z.terms().end());
    terms[2].coeff = xpoly::monomial(4, Coefficient(1)); // x^4 3^{-s}
    const FormalSeries bad = FormalSeries::make(z.basis(), terms, z.truncation());
    EXPECT_NE(x_euler(bad), integer_shift(bad, 1));
}
