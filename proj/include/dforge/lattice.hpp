#ifndef DFORGE_LATTICE_HPP
#define DFORGE_LATTICE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/error.hpp>
#include <dforge/exponent.hpp>
#include <dforge/interval.hpp>
#include <dforge/rational.hpp>
#include <dforge/series.hpp>
#include <dforge/symbol_basis.hpp>

namespace dforge
{

using IntVector = std::vector<Integer>;

// Integer row space of exponent coordinate vectors, kept in Hermite normal form.
//
// Axes are the symbols in lexicographic order followed by ONE. Rational
// coordinates are scaled by a common denominator D, so the stored rows are
// integer vectors of D * exponent. Rows are in echelon form with strictly
// increasing pivot columns, positive pivots, and entries above each pivot
// reduced into [0, pivot).
class HermiteLattice
{
public:
    HermiteLattice() = default;

    std::size_t rank() const
    {
        return m_rows.size();
    }
    const std::vector<std::string> &axes() const
    {
        return m_axes;
    }
    const Integer &denominator() const
    {
        return m_den;
    }

    // Add an exponent to the generating set; returns true if the rank grew.
    bool insert(const Exponent &e)
    {
        extend_axes(e);
        rescale_for(e);
        IntVector v = to_vector(e);
        const std::size_t before = m_rows.size();
        reduce_into(std::move(v));
        normalize();
        return m_rows.size() > before;
    }

    bool contains(const Exponent &e) const
    {
        return coordinates(e).has_value();
    }

    // Coordinates over the HNF rows, if e lies in the lattice.
    std::optional<IntVector> coordinates(const Exponent &e) const
    {
        if (m_axes.empty()) {
            return e.is_zero() ? std::optional<IntVector>(IntVector{}) : std::nullopt;
        }
        for (const auto &[name, _] : e.coords()) {
            if (!std::binary_search(m_axes.begin(), m_axes.end() - 1, name)) {
                return std::nullopt;
            }
        }
        // Scaled vector must be integral.
        IntVector v(m_axes.size());
        for (std::size_t i = 0; i < m_axes.size(); ++i) {
            Rational q = e.coord(m_axes[i]) * Rational(m_den);
            if (q.get_den() != 1) {
                return std::nullopt;
            }
            v[i] = q.get_num();
        }
        IntVector out(m_rows.size());
        for (std::size_t r = 0; r < m_rows.size(); ++r) {
            const std::size_t p = m_pivots[r];
            // Columns before this pivot must already be clear.
            for (std::size_t c = (r == 0 ? 0 : m_pivots[r - 1] + 1); c < p; ++c) {
                if (v[c] != 0) {
                    return std::nullopt;
                }
            }
            if (!mpz_divisible_p(v[p].get_mpz_t(), m_rows[r][p].get_mpz_t())) {
                return std::nullopt;
            }
            Integer k = v[p] / m_rows[r][p];
            out[r] = k;
            if (k != 0) {
                for (std::size_t c = p; c < v.size(); ++c) {
                    v[c] -= k * m_rows[r][c];
                }
            }
        }
        for (const auto &x : v) {
            if (x != 0) {
                return std::nullopt;
            }
        }
        return out;
    }

    // HNF rows as exponents.
    std::vector<Exponent> generators() const
    {
        std::vector<Exponent> out;
        for (const auto &row : m_rows) {
            out.push_back(to_exponent(row));
        }
        return out;
    }

    Exponent to_exponent(const IntVector &row) const
    {
        Exponent e;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c] == 0) {
                continue;
            }
            Rational q(row[c], m_den);
            q.canonicalize();
            e += Exponent::symbol(m_axes[c], q);
        }
        return e;
    }

    const std::vector<IntVector> &rows() const
    {
        return m_rows;
    }

private:
    void extend_axes(const Exponent &e)
    {
        if (m_axes.empty()) {
            m_axes.push_back(std::string(one_symbol));
        }
        for (const auto &[name, _] : e.coords()) {
            auto end = m_axes.end() - 1;
            auto it = std::lower_bound(m_axes.begin(), end, name);
            if (it != end && *it == name) {
                continue;
            }
            const std::size_t col = static_cast<std::size_t>(it - m_axes.begin());
            m_axes.insert(it, name);
            for (auto &row : m_rows) {
                row.insert(row.begin() + static_cast<std::ptrdiff_t>(col), Integer(0));
            }
            for (auto &p : m_pivots) {
                if (p >= col) {
                    ++p;
                }
            }
        }
    }

    void rescale_for(const Exponent &e)
    {
        Integer d = m_den;
        d = integer_lcm(d, e.constant_part().get_den());
        for (const auto &[_, q] : e.coords()) {
            d = integer_lcm(d, q.get_den());
        }
        if (d == m_den) {
            return;
        }
        const Integer factor = d / m_den;
        for (auto &row : m_rows) {
            for (auto &x : row) {
                x *= factor;
            }
        }
        m_den = d;
    }

    IntVector to_vector(const Exponent &e) const
    {
        IntVector v(m_axes.size());
        for (std::size_t i = 0; i < m_axes.size(); ++i) {
            Rational q = e.coord(m_axes[i]) * Rational(m_den);
            v[i] = q.get_num();
        }
        return v;
    }

    // Merge v into the echelon rows with unimodular operations.
    void reduce_into(IntVector v)
    {
        std::size_t r = 0;
        for (std::size_t c = 0; c < v.size(); ++c) {
            if (v[c] == 0) {
                while (r < m_rows.size() && m_pivots[r] == c) {
                    ++r;
                }
                continue;
            }
            if (r < m_rows.size() && m_pivots[r] == c) {
                // Extended gcd on (row[c], v[c]).
                IntVector &row = m_rows[r];
                Integer g, s, t;
                mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), row[c].get_mpz_t(), v[c].get_mpz_t());
                const Integer a = row[c] / g;
                const Integer b = v[c] / g;
                for (std::size_t k = c; k < v.size(); ++k) {
                    Integer nr = s * row[k] + t * v[k];
                    Integer nv = a * v[k] - b * row[k];
                    row[k] = std::move(nr);
                    v[k] = std::move(nv);
                }
                ++r;
                continue;
            }
            // New pivot column.
            m_rows.insert(m_rows.begin() + static_cast<std::ptrdiff_t>(r), std::move(v));
            m_pivots.insert(m_pivots.begin() + static_cast<std::ptrdiff_t>(r), c);
            return;
        }
    }

    void normalize()
    {
        for (std::size_t r = 0; r < m_rows.size(); ++r) {
            const std::size_t p = m_pivots[r];
            if (m_rows[r][p] < 0) {
                for (auto &x : m_rows[r]) {
                    x = -x;
                }
            }
        }
        for (std::size_t r = 0; r < m_rows.size(); ++r) {
            const std::size_t p = m_pivots[r];
            const Integer &piv = m_rows[r][p];
            for (std::size_t u = 0; u < r; ++u) {
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), m_rows[u][p].get_mpz_t(), piv.get_mpz_t());
                if (q != 0) {
                    for (std::size_t c = p; c < m_rows[u].size(); ++c) {
                        m_rows[u][c] -= q * m_rows[r][c];
                    }
                }
            }
        }
    }

    std::vector<std::string> m_axes;
    std::vector<IntVector> m_rows;
    std::vector<std::size_t> m_pivots;
    Integer m_den{1};
};

// Integer lattice generated by a finite set of exponents.
//   generators: the HNF basis, each sign-adjusted to be numerically positive;
//   change_of_basis[i]: integer coordinates of input i over the generators;
//   original_subset: indices of inputs generating the same lattice, chosen
//   greedily in input order (a basis when its size equals the rank).
struct LatticeBasis {
    std::vector<Exponent> generators;
    std::vector<IntVector> change_of_basis;
    std::vector<std::size_t> original_subset;
    bool subset_is_basis = true;
    bool precision_tie = false;

    std::size_t rank() const
    {
        return generators.size();
    }

    // Lattice built directly on independent generators (no reduction).
    static LatticeBasis from_generators(std::vector<Exponent> gens)
    {
        LatticeBasis b;
        b.generators = std::move(gens);
        for (std::size_t i = 0; i < b.generators.size(); ++i) {
            IntVector v(b.generators.size());
            v[i] = 1;
            b.change_of_basis.push_back(std::move(v));
            b.original_subset.push_back(i);
        }
        return b;
    }
};

namespace detail
{

// Solve sum_j y_j g_j = e over the integers by rational Gaussian elimination
// on the coordinate system of all symbols involved.
inline std::optional<IntVector> solve_integer_combination(const std::vector<Exponent> &gens, const Exponent &e)
{
    std::set<std::string> names;
    names.insert(std::string(one_symbol));
    for (const auto &g : gens) {
        for (const auto &[n, _] : g.coords()) {
            names.insert(n);
        }
    }
    for (const auto &[n, _] : e.coords()) {
        names.insert(n);
    }
    const std::vector<std::string> axes(names.begin(), names.end());
    const std::size_t k = gens.size();
    // Augmented matrix: rows = axes, cols = generators + rhs.
    std::vector<std::vector<Rational>> a(axes.size(), std::vector<Rational>(k + 1));
    for (std::size_t i = 0; i < axes.size(); ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            a[i][j] = gens[j].coord(axes[i]);
        }
        a[i][k] = e.coord(axes[i]);
    }
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < k && row < a.size(); ++col) {
        std::size_t p = row;
        while (p < a.size() && a[p][col] == 0) {
            ++p;
        }
        if (p == a.size()) {
            continue;
        }
        std::swap(a[p], a[row]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == row || a[i][col] == 0) {
                continue;
            }
            Rational f = a[i][col] / a[row][col];
            for (std::size_t j = col; j <= k; ++j) {
                a[i][j] -= f * a[row][j];
            }
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (std::size_t i = row; i < a.size(); ++i) {
        if (a[i][k] != 0) {
            return std::nullopt;
        }
    }
    IntVector y(k);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) {
        Rational v = a[i][k] / a[i][pivot_col[i]];
        if (v.get_den() != 1) {
            return std::nullopt;
        }
        y[pivot_col[i]] = v.get_num();
    }
    return y;
}

} // namespace detail

// Integer coordinates of e over B's generators, or nullopt (NotInLattice).
// Generators must be linearly independent (always true for integer_basis).
inline std::optional<IntVector> express(const Exponent &e, const LatticeBasis &B)
{
    return detail::solve_integer_combination(B.generators, e);
}

inline LatticeBasis integer_basis(const std::vector<Exponent> &exponents, const SymbolBasis *basis = nullptr)
{
    HermiteLattice hnf;
    LatticeBasis out;
    HermiteLattice subset;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        hnf.insert(exponents[i]);
        if (!subset.contains(exponents[i])) {
            subset.insert(exponents[i]);
            out.original_subset.push_back(i);
        }
    }
    out.subset_is_basis = out.original_subset.size() == hnf.rank();
    std::vector<bool> flipped;
    for (auto g : hnf.generators()) {
        bool flip = false;
        if (basis) {
            Interval v = g.numeric(*basis);
            if (v.certainly_negative()) {
                flip = true;
            } else if (!v.certainly_positive()) {
                out.precision_tie = true;
            }
        }
        out.generators.push_back(flip ? -g : g);
        flipped.push_back(flip);
    }
    for (const auto &e : exponents) {
        auto c = hnf.coordinates(e);
        if (!c) {
            throw Error(ErrorCode::VerificationFailed, "input exponent not in its own lattice");
        }
        for (std::size_t j = 0; j < c->size(); ++j) {
            if (flipped[j]) {
                (*c)[j] = -(*c)[j];
            }
        }
        out.change_of_basis.push_back(std::move(*c));
    }
    return out;
}

inline Exponent reconstruct(const IntVector &coords, const LatticeBasis &B)
{
    Exponent e;
    for (std::size_t j = 0; j < coords.size() && j < B.generators.size(); ++j) {
        e += Rational(coords[j]) * B.generators[j];
    }
    return e;
}

// ---- prime support ----------------------------------------------------------

struct PrimeSupport {
    std::vector<std::uint64_t> primes;
    std::size_t sample_size = 0;
    std::vector<std::uint64_t> unfactored;
};

struct Factorization {
    std::vector<std::pair<std::uint64_t, unsigned>> factors;
    // Cofactor left after trial division when it could not be certified prime.
    std::uint64_t remainder = 1;
};

// Trial division by d <= limit. A cofactor r > 1 is prime once every d <= sqrt(r)
// has been tried; otherwise it stays unfactored.
inline Factorization trial_factor(std::uint64_t n, std::uint64_t limit)
{
    Factorization out;
    if (n == 0) {
        throw Error(ErrorCode::DegenerateInput, "cannot factor 0");
    }
    bool sqrt_reached = false;
    for (std::uint64_t d = 2;; d += (d == 2 ? 1 : 2)) {
        if (d > n / d) {
            sqrt_reached = true;
            break;
        }
        if (d > limit) {
            break;
        }
        unsigned k = 0;
        while (n % d == 0) {
            n /= d;
            ++k;
        }
        if (k) {
            out.factors.emplace_back(d, k);
        }
    }
    if (n > 1) {
        if (sqrt_reached) {
            out.factors.emplace_back(n, 1);
        } else {
            out.remainder = n;
        }
    }
    std::sort(out.factors.begin(), out.factors.end());
    return out;
}

inline PrimeSupport prime_support(const std::vector<std::uint64_t> &indices, std::uint64_t factor_limit = 1000000,
                                  bool strict = false)
{
    PrimeSupport out;
    std::set<std::uint64_t> primes;
    for (auto n : indices) {
        if (n == 0) {
            throw Error(ErrorCode::DegenerateInput, "indices must be positive");
        }
        ++out.sample_size;
        auto f = trial_factor(n, factor_limit);
        for (const auto &[p, _] : f.factors) {
            primes.insert(p);
        }
        if (f.remainder != 1) {
            if (strict) {
                throw Error(ErrorCode::FactorLimitExceeded, "index " + std::to_string(n) + " not fully factored");
            }
            out.unfactored.push_back(n);
        }
    }
    out.primes.assign(primes.begin(), primes.end());
    return out;
}

// log n as an exponent over the prime symbols L<p>.
inline Exponent exponent_of_index(std::uint64_t n, std::uint64_t factor_limit = 1000000)
{
    auto f = trial_factor(n, factor_limit);
    if (f.remainder != 1) {
        throw Error(ErrorCode::FactorLimitExceeded, "index " + std::to_string(n) + " not fully factored");
    }
    Exponent e;
    for (const auto &[p, k] : f.factors) {
        e += Exponent::symbol(prime_symbol_name(p), Rational(static_cast<long>(k)));
    }
    return e;
}

// ---- omega rewriting --------------------------------------------------------

// Series as a multi-index map: sum_i n_i omega_i = exponent of the term.
using OmegaSeries = std::map<IntVector, XPoly>;

inline OmegaSeries omega_rewrite(const FormalSeries &phi, const LatticeBasis &B)
{
    OmegaSeries out;
    for (const auto &t : phi.terms()) {
        auto c = express(t.exponent, B);
        if (!c) {
            throw Error(ErrorCode::NotInLattice, "exponent " + t.exponent.to_string() + " not in the lattice");
        }
        out.emplace(std::move(*c), t.coeff);
    }
    return out;
}

// ---- gap ratios ---------------------------------------------------------------

struct GapRatio {
    std::size_t index = 0;              // position i of lambda_i in the input
    std::optional<Rational> exact;      // when lambda_i / lambda_{i-1} is rational
    Interval value;                     // enclosure of the ratio
    Interval envelope;                  // running maximum (by upper endpoint)
};

namespace detail
{

// lambda_a / lambda_b when the two are proportional.
inline std::optional<Rational> exact_ratio(const Exponent &a, const Exponent &b)
{
    if (b.is_zero()) {
        return std::nullopt;
    }
    std::optional<Rational> r;
    auto consider = [&](const Rational &x, const Rational &y) {
        if (y == 0) {
            return x == 0;
        }
        Rational q = x / y;
        if (r && *r != q) {
            return false;
        }
        r = q;
        return true;
    };
    if (!consider(a.constant_part(), b.constant_part())) {
        return std::nullopt;
    }
    std::set<std::string> names;
    for (const auto &[n, _] : a.coords()) {
        names.insert(n);
    }
    for (const auto &[n, _] : b.coords()) {
        names.insert(n);
    }
    for (const auto &n : names) {
        if (!consider(a.coord(n), b.coord(n))) {
            return std::nullopt;
        }
    }
    return r;
}

} // namespace detail

// Ratios lambda_i / lambda_{i-1}, after dropping the prefix of non-positive
// exponents. Indices refer to positions in the input list.
inline std::vector<GapRatio> gap_ratios(const std::vector<Exponent> &exponents, const SymbolBasis &basis)
{
    std::vector<GapRatio> out;
    std::size_t start = 0;
    while (start < exponents.size() && !exponents[start].numeric(basis).certainly_positive()) {
        ++start;
    }
    std::optional<Interval> env;
    for (std::size_t i = start + 1; i < exponents.size(); ++i) {
        GapRatio g;
        g.index = i;
        g.exact = detail::exact_ratio(exponents[i], exponents[i - 1]);
        if (g.exact) {
            g.value = Interval::exact(*g.exact, basis.precision());
        } else {
            g.value = exponents[i].numeric(basis) / exponents[i - 1].numeric(basis);
        }
        if (!env || mpfr_greater_p(g.value.hi().get(), env->hi().get())) {
            env = g.value;
        }
        g.envelope = *env;
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace dforge

#endif
