#include <random>

#include <gtest/gtest.h>
#include <mpfr.h>

#include "oracles.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace
{

XPoly c(const Coefficient &q)
{
    return xpoly::constant(q);
}

// Geometric prefix sum_{n=1..N} e^{-n lam s}, exact or truncated at N lam.
FormalSeries geometric(unsigned N, bool truncated)
{
    auto B = SymbolBasis::make({{"lam", "log(3)"}});
    std::vector<Term> terms;
    for (unsigned n = 1; n <= N; ++n) {
        terms.push_back({Exponent::symbol("lam", n), c(1)});
    }
    return make_series(B, std::move(terms), truncated ? FormalSeries::Bound(Exponent::symbol("lam", N)) : std::nullopt);
}

const DiffPolynomial riccati = poly("f' + lam*f + lam*f^2", {"lam"});

} // namespace

// ---- substitute ------------------------------------------------------------------

TEST(Substitute, GeometricSatisfiesRiccatiUpToTruncation)
{
    auto phi = geometric(40, true);
    auto r = substitute(riccati, phi);
    EXPECT_TRUE(r.is_zero());
    ASSERT_TRUE(r.horizon);
    // f^2 starts at 2 lam, so the product is known to 41 lam; f itself to 40 lam.
    EXPECT_EQ(*r.horizon, Exponent::symbol("lam", 40));
}

TEST(Substitute, ExactGeometricPrefixLeavesBoundaryTerm)
{
    const unsigned N = 12;
    auto r = substitute(riccati, geometric(N, false));
    ASSERT_FALSE(r.is_zero());
    // Oracle: coefficient of x^m in sum(-n lam) x^n + lam sum x^n + lam (sum x^n)^2
    // with x = e^{-lam s}, from a plain double loop.
    std::vector<long> pairs(2 * N + 1, 0), lin(2 * N + 1, 0);
    for (unsigned i = 1; i <= N; ++i) {
        lin[i] = 1 - static_cast<long>(i);
        for (unsigned j = 1; j <= N; ++j) {
            ++pairs[i + j];
        }
    }
    for (unsigned m = 1; m <= 2 * N; ++m) {
        Coefficient expect = Coefficient(lin[m] + pairs[m]) * sym("lam");
        EXPECT_EQ(FormalSeries::scalar(Term{Exponent(), r.series.coefficient_at(Exponent::symbol("lam", m))}),
                  expect)
            << "m=" << m;
    }
    EXPECT_EQ(r.leading->exponent, Exponent::symbol("lam", N + 1));
}

TEST(Substitute, ZeroPolynomialAlwaysVanishes)
{
    EXPECT_TRUE(substitute(DiffPolynomial(), geometric(5, true)).is_zero());
    EXPECT_TRUE(substitute(DiffPolynomial(), dirichlet({1, 2, 3}, {2, 3})).is_zero());
}

TEST(Substitute, DerivativeOfZetaPrefix)
{
    auto r = substitute(poly("f'"), dirichlet({1, 2, 3, 4, 5, 6}, {2, 3, 5}));
    ASSERT_TRUE(r.leading);
    EXPECT_EQ(r.leading->exponent, L(2));
    EXPECT_EQ(FormalSeries::scalar(*r.leading), -sym("L2"));
}

TEST(Substitute, HorizonBeyondValidityIsRejected)
{
    auto phi = geometric(10, true);
    EXPECT_EQ(error_code_of([&] { substitute(riccati, phi, Exponent::symbol("lam", 11)); }),
              ErrorCode::HorizonTooShort);
    auto r = substitute(riccati, phi, Exponent::symbol("lam", 7));
    EXPECT_EQ(*r.horizon, Exponent::symbol("lam", 7));
}

TEST(Substitute, ExplicitVariableIsRejected)
{
    EXPECT_EQ(error_code_of([] { substitute(poly("x*f"), geometric(3, true)); }), ErrorCode::ExplicitVariable);
}

TEST(Substitute, LinearInTheEquation)
{
    std::mt19937_64 rng(31);
    auto phi = geometric(15, true);
    const char *pieces[] = {"f", "f'", "f^2", "lam*f*f'", "f''", "f(s+1)", "f'^2", "3", "f(s-1/2)*f"};
    for (int i = 0; i < 100; ++i) {
        DiffPolynomial F = poly(pieces[rng() % 9], {"lam"}).scaled(Coefficient(static_cast<long>(rng() % 5) - 2));
        DiffPolynomial G = poly(pieces[rng() % 9], {"lam"}) * poly(pieces[rng() % 9], {"lam"});
        auto sum = substitute(F + G, phi).series;
        auto parts = substitute(F, phi).series + substitute(G, phi).series;
        bool tie = false;
        auto T = FormalSeries::min_bound(sum.truncation(), parts.truncation(), *phi.basis(), tie);
        ASSERT_TRUE(T);
        EXPECT_EQ(sum.truncate(*T), parts.truncate(*T));
    }
}

// Splitting phi = A_i + R_i at index i: F(A+R) - F(A) - sum_z F_z(A) z(R) only has
// terms at or beyond 2 lam_i - (n - 2)|lam_0|.
TEST(Substitute, TaylorSplitHigherGroupsStartLate)
{
    std::mt19937_64 rng(32);
    auto B = SymbolBasis::make({{"a", "1"}, {"b", "7/3"}});
    auto val = [](const Exponent &e) -> Rational { return e.constant_part() + e.coord("a") + Rational(7, 3) * e.coord("b"); };
    const char *pieces[] = {"f^2", "f*f'", "f'^2*f", "f^3", "f''*f", "f*f(s+1)", "f'"};
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<Term> terms;
        for (int k = 0; k < 6; ++k) {
            Exponent e = Exponent::symbol("a", static_cast<long>(rng() % 4)) + Exponent::symbol("b", static_cast<long>(rng() % 3))
                         - Exponent::constant(Rational(static_cast<long>(rng() % 2)));
            terms.push_back({e, c(Coefficient(static_cast<long>(rng() % 5) + 1))});
        }
        auto phi = make_series(B, terms, std::nullopt);
        if (phi.size() < 2) {
            continue;
        }
        DiffPolynomial F = poly(pieces[rng() % 7]) + poly(pieces[rng() % 7]).scaled(Coefficient(2));
        const std::size_t i = 1 + rng() % (phi.size() - 1);
        auto A = phi.prefix(i);
        auto R = phi - A;
        auto first_order = FormalSeries::zero(B);
        for (const auto &z : F.indeterminates()) {
            first_order = first_order + substitute_series(F.partial(z), A) * R.differentiate_s(z.order).shift_s(z.shift);
        }
        auto higher = substitute_series(F, phi) - substitute_series(F, A) - first_order;
        const Rational lam_i = val(phi.terms()[i].exponent);
        const Rational lam_0 = val(phi.terms()[0].exponent);
        const Rational bound = 2 * lam_i - Rational(static_cast<long>(F.total_degree()) - 2) * abs(lam_0);
        for (const auto &t : higher.terms()) {
            EXPECT_GE(val(t.exponent), bound) << F.to_string() << " at split " << i;
        }
    }
}

// ---- initial terms of partials -----------------------------------------------------

TEST(InitialTerms, ParabolaEquation)
{
    auto B = SymbolBasis::make({});
    auto phi = make_series(B, {{Exponent::constant(1), c(1)}, {Exponent::constant(2), c(1)}}, std::nullopt);
    auto it = initial_terms_of_partials(poly("f'^2 - 4*f"), phi);
    ASSERT_EQ(it.terms.size(), 2u);
    const auto &df = it.terms.at(DiffIndeterminate{0, 0});
    EXPECT_EQ(df.b, Coefficient(-4));
    EXPECT_TRUE(df.lambda.is_zero());
    const auto &dfp = it.terms.at(DiffIndeterminate{1, 0});
    EXPECT_EQ(dfp.b, Coefficient(-2));
    EXPECT_EQ(dfp.lambda, Exponent::constant(1));
    EXPECT_TRUE(it.Lambda1.is_zero());
    ASSERT_EQ(it.argmin.size(), 1u);
    EXPECT_EQ(it.argmin[0], (DiffIndeterminate{0, 0}));
}

TEST(InitialTerms, LinearEquationHasUnitPartial)
{
    auto it = initial_terms_of_partials(poly("f"), dirichlet({2, 3}, {2, 3}));
    ASSERT_EQ(it.terms.size(), 1u);
    EXPECT_EQ(it.terms.begin()->second.b, Coefficient(1));
    EXPECT_TRUE(it.terms.begin()->second.lambda.is_zero());
}

TEST(InitialTerms, ShiftProducesMultiplier)
{
    auto B = SymbolBasis::make({});
    auto phi = make_series(B, {{Exponent::constant(1), c(1)}}, std::nullopt);
    auto it = initial_terms_of_partials(poly("f*f(s+1)"), phi);
    const auto &df = it.terms.at(DiffIndeterminate{0, 0});
    EXPECT_EQ(df.b, Coefficient::multiplier(Exponent::constant(1)));
    EXPECT_EQ(df.lambda, Exponent::constant(1));
    const auto &dshift = it.terms.at(DiffIndeterminate{0, 1});
    EXPECT_EQ(dshift.b, Coefficient(1));
    EXPECT_EQ(dshift.lambda, Exponent::constant(1));
}

TEST(InitialTerms, VanishingPartialIsReported)
{
    auto B = SymbolBasis::make({});
    auto one_series = FormalSeries::constant(B, Coefficient(1));
    EXPECT_EQ(error_code_of([&] { initial_terms_of_partials(poly("f'^2"), one_series); }), ErrorCode::PartialVanishes);
}

// ---- exponential polynomial root bound -----------------------------------------------

TEST(RootBound, Quadratic)
{
    ExpPolynomial L;
    L.add(2, Rational(0), Coefficient(1));
    L.add(0, Rational(0), Coefficient(-4));
    auto B0 = SymbolBasis::make({});
    auto rb = exp_poly_root_bound(L, *B0);
    EXPECT_GE(rb.B, 2);
    EXPECT_TRUE(verify_dominance(L, rb.B, *B0));
    for (int i = 1; i <= 1000; ++i) {
        const double lam = rb.B.get_d() + i * 1000.0;
        ASSERT_EQ(mpfr_sign(L, lam), 1) << lam;
    }
}

TEST(RootBound, ExponentialBeatsLinear)
{
    ExpPolynomial L;
    L.add(0, Rational(1), Coefficient(1));
    L.add(1, Rational(0), Coefficient(-1));
    auto B0 = SymbolBasis::make({});
    auto rb = exp_poly_root_bound(L, *B0);
    EXPECT_LE(rb.B, 2);
    EXPECT_TRUE(verify_dominance(L, Rational(2), *B0));
    // e^l > l everywhere: no real root at all on a wide grid.
    for (int i = -2000; i <= 2000; ++i) {
        ASSERT_EQ(mpfr_sign(L, i / 100.0), 1);
    }
}

TEST(RootBound, ConstantHasNoRoots)
{
    ExpPolynomial L;
    L.add(0, Rational(0), Coefficient(7));
    auto B0 = SymbolBasis::make({});
    EXPECT_EQ(exp_poly_root_bound(L, *B0).B, 0);
    EXPECT_EQ(error_code_of([&] { exp_poly_root_bound(ExpPolynomial(), *B0); }), ErrorCode::DegenerateInput);
}

TEST(RootBound, RandomSignConstancyBeyondBound)
{
    std::mt19937_64 rng(33);
    auto B0 = SymbolBasis::make({}, 256);
    for (int iter = 0; iter < 50; ++iter) {
        ExpPolynomial L = random_exp_poly(rng);
        if (L.is_zero()) {
            continue;
        }
        auto rb = exp_poly_root_bound(L, *B0);
        const auto &lead = L.terms()[L.lead_index()];
        const int expect = lead.c.constant_value() > 0 ? 1 : -1;
        if (L.terms().size() > 1) {
            EXPECT_TRUE(verify_dominance(L, rb.B, *B0)) << L.to_string();
        }
        const double B = rb.B.get_d();
        for (int i = 1; i <= 1000; ++i) {
            ASSERT_EQ(mpfr_sign(L, B + i), expect) << L.to_string() << " at " << B + i;
        }
    }
}

// ---- threshold -------------------------------------------------------------------

TEST(Prop3, GeometricVerifiesEveryIndexBeyondThreshold)
{
    auto phi = geometric(40, true);
    auto rep = prop3_threshold(riccati, phi);
    EXPECT_TRUE(rep.restarts.empty());
    EXPECT_EQ(rep.n, 2u);
    EXPECT_EQ(rep.lambda0, Exponent::symbol("lam"));
    std::size_t expected = 0;
    for (std::size_t i = 1; i < phi.size(); ++i) {
        if (phi.terms()[i].exponent.numeric(*phi.basis()).certainly_greater(rep.threshold)) {
            ++expected;
        }
    }
    EXPECT_GT(expected, 0u);
    EXPECT_EQ(rep.verified_indices.size(), expected);
    // Truncation stability: any prefix past Lambda reproduces the initial terms.
    for (std::size_t k = rep.Lambda_prefix; k <= phi.size(); k += 3) {
        auto prefix = phi.truncate(phi.terms()[k - 1].exponent);
        for (const auto &[z, it] : rep.initial.terms) {
            auto lead = substitute_series(riccati.partial(z), prefix).leading_term();
            ASSERT_TRUE(lead);
            EXPECT_EQ(lead->exponent, it.lambda);
            EXPECT_EQ(FormalSeries::scalar(*lead), it.b);
        }
    }
}

TEST(Prop3, SingleExponentialHasNothingToVerify)
{
    auto B = SymbolBasis::make({{"lam", "log(3)"}});
    auto phi = make_series(B, {{Exponent::symbol("lam"), c(1)}}, std::nullopt);
    auto rep = prop3_threshold(poly("f' + lam*f", {"lam"}), phi);
    EXPECT_TRUE(rep.verified_indices.empty());
    EXPECT_EQ(rep.n, 1u);
}

TEST(Prop3, NonSolutionIsRejected)
{
    EXPECT_EQ(error_code_of([] { prop3_threshold(poly("f' + f"), geometric(5, true)); }),
              ErrorCode::NotFormallySatisfied);
}

// phi = 1 / ((1 - 2^{-s})(1 - 3^{-s})) over the 3-smooth numbers. With P = 1/(1-u),
// Q = 1/(1-v): P' = -L2 P (P - 1), Q' = -L3 Q (Q - 1) and phi = P Q. Eliminating P
// and Q by hand gives the degree-6 equation built below.
TEST(Prop3, TwoSymbolLatticeProduct)
{
    const std::vector<std::uint64_t> ps = {2, 3};
    std::vector<std::uint64_t> smooth;
    for (std::uint64_t a = 1; a <= 4096; a *= 2) {
        for (std::uint64_t b = a; b <= 4096; b *= 3) {
            smooth.push_back(b);
        }
    }
    auto phi = dirichlet(smooth, ps, L(2, 12));
    const std::vector<std::string> syms = {"L2", "L3"};
    DiffPolynomial f = poly("f"), fp = poly("f'"), fpp = poly("f''");
    DiffPolynomial l2 = poly("L2", syms), l3 = poly("L3", syms);
    // St = phi * S with S = L2 P + L3 Q = L2 + L3 - phi'/phi.
    DiffPolynomial St = (l2 + l3) * f - fp;
    DiffPolynomial Stp = (l2 + l3) * fp - fpp;
    // (L2 - L3) phi^2 a = N with a = L2 P.
    DiffPolynomial N = Stp * f - St * fp + St * St - DiffPolynomial(2) * l2 * l3 * f.pow(3) - l3 * St * f;
    // a^2 - S a + L2 L3 phi = 0, scaled by (L2 - L3)^2 phi^4.
    DiffPolynomial F = N * N - (l2 - l3) * f * St * N + l2 * l3 * (l2 - l3).pow(2) * f.pow(5);
    auto r = substitute(F, phi);
    ASSERT_TRUE(r.is_zero()) << r.leading->exponent.to_string();
    auto rep = prop3_threshold(F, phi);
    auto lattice = integer_basis({L(2), L(3)});
    for (auto i : rep.verified_indices) {
        EXPECT_TRUE(express(phi.terms()[i].exponent, lattice).has_value());
    }
    EXPECT_EQ(rep.n, 6u - rep.restarts.size());
    EXPECT_GT(rep.verified_indices.size(), phi.size() / 2);
}
