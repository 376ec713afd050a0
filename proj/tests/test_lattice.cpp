#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace
{

std::set<std::uint64_t> primes_by_sieve(const std::vector<std::uint64_t> &ns)
{
    std::set<std::uint64_t> out;
    for (auto n : ns) {
        for (std::uint64_t p = 2; p <= n; ++p) {
            bool prime = true;
            for (std::uint64_t d = 2; d * d <= p; ++d) {
                prime = prime && p % d != 0;
            }
            if (prime && n % p == 0) {
                out.insert(p);
            }
        }
    }
    return out;
}

} // namespace

// ---- integer_basis -----------------------------------------------------------------

TEST(IntegerBasis, DependentInputs)
{
    std::vector<Exponent> in = {L(2), L(3), L(2) + L(3), L(2, 2) + L(3)};
    auto B = integer_basis(in);
    EXPECT_EQ(B.rank(), 2u);
    EXPECT_TRUE(express(L(2), B).has_value());
    EXPECT_TRUE(express(L(3), B).has_value());
    EXPECT_EQ(B.original_subset, (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(B.subset_is_basis);
}

TEST(IntegerBasis, ConstantsReduceToGcd)
{
    auto B = integer_basis({one(2), one(3)});
    ASSERT_EQ(B.rank(), 1u);
    EXPECT_EQ(B.generators[0], one(1));
    // Neither input alone generates the lattice.
    EXPECT_FALSE(B.subset_is_basis);
}

TEST(IntegerBasis, EmptyInput)
{
    auto B = integer_basis({});
    EXPECT_EQ(B.rank(), 0u);
    EXPECT_TRUE(express(Exponent(), B).has_value());
    EXPECT_FALSE(express(L(2), B).has_value());
}

TEST(IntegerBasis, RationalCoordinatesAreCleared)
{
    auto B = integer_basis({Exponent::symbol("L2", Rational(1, 2)), Exponent::symbol("L2", Rational(1, 3))});
    ASSERT_EQ(B.rank(), 1u);
    EXPECT_EQ(B.generators[0], Exponent::symbol("L2", Rational(1, 6)));
}

TEST(IntegerBasis, RankAndLatticeMatchMinorOracles)
{
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> ent(-3, 3), rows(1, 4);
    auto basis = primes_basis({2, 3, 5, 7});
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<Exponent> in;
        const int R = rows(rng);
        for (int r = 0; r < R; ++r) {
            Exponent e;
            for (const auto &a : AXES) {
                e += Exponent::symbol(a, ent(rng));
            }
            in.push_back(e);
        }
        auto B = integer_basis(in, basis.get());
        const IntMatrix M = to_matrix(in);
        const std::size_t r = rank_oracle(M);
        ASSERT_EQ(B.rank(), r);
        for (const auto &g : B.generators) {
            EXPECT_TRUE(g.numeric(*basis).certainly_positive()) << g.to_string();
        }
        // Same lattice: inputs lie in L(generators) and both have equal d_r.
        for (std::size_t i = 0; i < in.size(); ++i) {
            auto c = express(in[i], B);
            ASSERT_TRUE(c.has_value());
            EXPECT_EQ(reconstruct(*c, B), in[i]);
            EXPECT_EQ(reconstruct(B.change_of_basis[i], B), in[i]);
        }
        if (r > 0) {
            EXPECT_EQ(gcd_of_minors(M, r), gcd_of_minors(to_matrix(B.generators), r));
        }
    }
}

TEST(IntegerBasis, Idempotent)
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> ent(-4, 4);
    auto basis = primes_basis({2, 3, 5, 7});
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<Exponent> in;
        for (int r = 0; r < 5; ++r) {
            in.push_back(L(2, ent(rng)) + L(3, ent(rng)) + L(5, ent(rng)));
        }
        auto B = integer_basis(in, basis.get());
        auto again = integer_basis(B.generators, basis.get());
        ASSERT_EQ(again.rank(), B.rank());
        EXPECT_EQ(again.generators, B.generators);
        for (std::size_t i = 0; i < B.rank(); ++i) {
            IntVector unit(B.rank());
            unit[i] = 1;
            EXPECT_EQ(again.change_of_basis[i], unit);
        }
    }
}

// ---- express ----------------------------------------------------------------------

TEST(Express, Examples)
{
    auto B = LatticeBasis::from_generators({L(2), L(3)});
    EXPECT_EQ(*express(L(2, 5) + L(3, 2), B), (IntVector{5, 2}));
    auto half = LatticeBasis::from_generators({L(2)});
    EXPECT_FALSE(express(Exponent::symbol("L2", Rational(1, 2)), half).has_value());
    auto hnf = integer_basis({L(2), L(3), L(2) + L(3), L(2, 2) + L(3)});
    auto c = express(L(2, 2) + L(3), hnf);
    ASSERT_TRUE(c);
    EXPECT_EQ(reconstruct(*c, hnf), L(2, 2) + L(3));
    EXPECT_FALSE(express(L(5), hnf).has_value());
}

// ---- prime support ------------------------------------------------------------------

TEST(PrimeSupport, Examples)
{
    EXPECT_EQ(prime_support({1, 2, 3, 4, 6, 12}).primes, (std::vector<std::uint64_t>{2, 3}));
    std::vector<std::uint64_t> upto20(20);
    std::iota(upto20.begin(), upto20.end(), 1);
    EXPECT_EQ(prime_support(upto20).primes, (std::vector<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19}));
    EXPECT_TRUE(prime_support({}).primes.empty());
    EXPECT_EQ(prime_support(upto20).sample_size, 20u);
}

TEST(PrimeSupport, FactorLimit)
{
    // 1000003 is prime; a limit of 100 cannot certify it.
    auto s = prime_support({1000003, 6}, 100);
    EXPECT_EQ(s.unfactored, (std::vector<std::uint64_t>{1000003}));
    EXPECT_EQ(s.primes, (std::vector<std::uint64_t>{2, 3}));
    EXPECT_EQ(error_code_of([] { prime_support({1000003}, 100, true); }), ErrorCode::FactorLimitExceeded);
    EXPECT_EQ(prime_support({1000003}).primes, (std::vector<std::uint64_t>{1000003}));
    EXPECT_EQ(error_code_of([] { prime_support({0}); }), ErrorCode::DegenerateInput);
}

TEST(PrimeSupport, UnionAndOracle)
{
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<std::uint64_t> n(1, 500);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<std::uint64_t> a(1 + rng() % 10), b(1 + rng() % 10);
        for (auto &x : a) {
            x = n(rng);
        }
        for (auto &x : b) {
            x = n(rng);
        }
        std::vector<std::uint64_t> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        auto pa = prime_support(a).primes, pb = prime_support(b).primes;
        std::set<std::uint64_t> uni(pa.begin(), pa.end());
        uni.insert(pb.begin(), pb.end());
        auto pab = prime_support(ab).primes;
        EXPECT_EQ(std::set<std::uint64_t>(pab.begin(), pab.end()), uni);
        EXPECT_EQ(uni, primes_by_sieve(ab));
    }
}

TEST(ExponentOfIndex, MatchesRepeatedDivision)
{
    for (std::uint64_t n = 1; n <= 300; ++n) {
        Exponent e = exponent_of_index(n);
        std::uint64_t back = 1;
        for (const auto &[name, q] : e.coords()) {
            const std::uint64_t p = std::stoull(name.substr(1));
            for (long k = 0; k < q.get_num().get_si(); ++k) {
                back *= p;
            }
        }
        EXPECT_EQ(back, n);
    }
}

// ---- omega rewriting ------------------------------------------------------------------

TEST(OmegaRewrite, ZetaPrefix)
{
    auto z = dirichlet({1, 2, 3}, {2, 3});
    auto B = LatticeBasis::from_generators({L(2), L(3)});
    auto om = omega_rewrite(z, B);
    ASSERT_EQ(om.size(), 3u);
    EXPECT_TRUE(om.count(IntVector{0, 0}));
    EXPECT_TRUE(om.count(IntVector{1, 0}));
    EXPECT_TRUE(om.count(IntVector{0, 1}));
}

TEST(OmegaRewrite, Geometric)
{
    auto basis = SymbolBasis::make({{"lam", "log(3)"}});
    std::vector<Term> terms;
    for (long n = 1; n <= 6; ++n) {
        terms.push_back({Exponent::symbol("lam", n), xpoly::constant(Coefficient(1))});
    }
    auto phi = make_series(basis, terms, std::nullopt);
    auto om = omega_rewrite(phi, LatticeBasis::from_generators({Exponent::symbol("lam")}));
    for (long n = 1; n <= 6; ++n) {
        EXPECT_TRUE(om.count(IntVector{n}));
    }
}

TEST(OmegaRewrite, ProductMatchesConvolution)
{
    auto basis = primes_basis({2, 3});
    auto a = dirichlet({1, 2, 4}, {2, 3});
    auto b = dirichlet({1, 3, 9}, {2, 3});
    auto om = omega_rewrite(a * b, integer_basis({L(2), L(3)}, basis.get()));
    for (long m = 0; m <= 2; ++m) {
        for (long k = 0; k <= 2; ++k) {
            auto it = om.find(IntVector{m, k});
            ASSERT_NE(it, om.end());
            EXPECT_EQ(it->second, xpoly::constant(Coefficient(1)));
        }
    }
    EXPECT_EQ(om.size(), 9u);
    EXPECT_EQ(error_code_of([&] { omega_rewrite(dirichlet({5}, {5}), LatticeBasis::from_generators({L(2)})); }),
              ErrorCode::NotInLattice);
}

// ---- gap ratios ---------------------------------------------------------------------

TEST(GapRatios, Factorials)
{
    auto basis = SymbolBasis::make({});
    std::vector<Exponent> es;
    long f = 1;
    for (long i = 1; i <= 8; ++i) {
        f *= i;
        es.push_back(one(f));
    }
    auto g = gap_ratios(es, *basis);
    ASSERT_EQ(g.size(), 7u);
    for (std::size_t i = 0; i < g.size(); ++i) {
        ASSERT_TRUE(g[i].exact);
        EXPECT_EQ(*g[i].exact, Rational(static_cast<long>(i) + 2));
    }
}

TEST(GapRatios, LinearTendsToOne)
{
    auto basis = SymbolBasis::make({});
    std::vector<Exponent> es;
    for (long i = 1; i <= 50; ++i) {
        es.push_back(one(i));
    }
    auto g = gap_ratios(es, *basis);
    EXPECT_EQ(*g.back().exact, Rational(50, 49));
    // The envelope keeps the first and largest ratio, 2.
    EXPECT_TRUE(g.back().envelope.certainly_greater(Interval::exact(Rational(19, 10), 128)));
    EXPECT_TRUE(g.back().envelope.certainly_less(Interval::exact(Rational(21, 10), 128)));
}

TEST(GapRatios, DoublyExponential)
{
    auto basis = SymbolBasis::make({});
    std::vector<Exponent> es;
    for (int i = 1; i <= 6; ++i) {
        es.push_back(one(Rational(Integer(1) << (i * i))));
    }
    auto g = gap_ratios(es, *basis);
    const long expect[] = {8, 32, 128, 512, 2048};
    ASSERT_EQ(g.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(*g[i].exact, Rational(expect[i]));
    }
}

TEST(GapRatios, NonPositivePrefixDropped)
{
    auto basis = primes_basis({2, 3});
    auto g = gap_ratios({one(-1), Exponent(), L(2), L(3), L(2, 2)}, *basis);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].index, 3u);
    EXPECT_FALSE(g[0].exact.has_value());
    EXPECT_TRUE(g[0].value.certainly_greater(Interval::exact(Rational(3, 2), 128)));
    // 2 L2 / L3 is irrational: only the enclosure is available.
    EXPECT_FALSE(g[1].exact.has_value());
    EXPECT_TRUE(g[1].value.certainly_less(Interval::exact(Rational(13, 10), 128)));
}
