#ifndef DFORGE_WRONSKIAN_HPP
#define DFORGE_WRONSKIAN_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <dforge/coefficient.hpp>
#include <dforge/determinant.hpp>
#include <dforge/diff_poly.hpp>
#include <dforge/error.hpp>
#include <dforge/formal_eval.hpp>
#include <dforge/series.hpp>

namespace dforge
{

// prod (f^(order))^power. Weight = sum (order + 1) * power.
struct PowerProduct {
    std::map<unsigned, unsigned> powers;

    unsigned weight() const
    {
        unsigned w = 0;
        for (const auto &[o, k] : powers) {
            w += (o + 1) * k;
        }
        return w;
    }
    unsigned max_order() const
    {
        return powers.empty() ? 0 : powers.rbegin()->first;
    }
    DiffPolynomial to_diffpoly() const
    {
        DiffPolynomial p(1);
        for (const auto &[o, k] : powers) {
            p *= DiffPolynomial::f(o).pow(k);
        }
        return p;
    }
    std::string to_string() const
    {
        return powers.empty() ? "1" : to_diffpoly().to_string();
    }

    friend bool operator==(const PowerProduct &, const PowerProduct &) = default;
};

// Graded order: weight, then highest derivative order, then powers compared from
// the highest order downwards.
inline bool product_less(const PowerProduct &a, const PowerProduct &b)
{
    if (a.weight() != b.weight()) {
        return a.weight() < b.weight();
    }
    if (a.max_order() != b.max_order()) {
        return a.max_order() < b.max_order();
    }
    auto ia = a.powers.rbegin();
    auto ib = b.powers.rbegin();
    for (; ia != a.powers.rend() && ib != b.powers.rend(); ++ia, ++ib) {
        if (ia->first != ib->first) {
            return ia->first < ib->first;
        }
        if (ia->second != ib->second) {
            return ia->second < ib->second;
        }
    }
    return ia == a.powers.rend() && ib != b.powers.rend();
}

// All non-empty power products of weight <= W, in graded order.
inline std::vector<PowerProduct> enumerate_products(unsigned W)
{
    if (W < 1) {
        throw Error(ErrorCode::DegenerateInput, "maximal weight must be at least 1");
    }
    std::vector<PowerProduct> out;
    PowerProduct cur;
    // Choose the power of each order o = max_o .. 0 with remaining budget.
    auto rec = [&](auto &&self, unsigned order, unsigned budget) -> void {
        if (order == static_cast<unsigned>(-1)) {
            if (!cur.powers.empty()) {
                out.push_back(cur);
            }
            return;
        }
        for (unsigned k = 0; k * (order + 1) <= budget; ++k) {
            if (k) {
                cur.powers[order] = k;
            } else {
                cur.powers.erase(order);
            }
            self(self, order - 1, budget - k * (order + 1));
        }
        cur.powers.erase(order);
    };
    rec(rec, W - 1, W);
    std::sort(out.begin(), out.end(), product_less);
    return out;
}

// ---- modular specialisation -----------------------------------------------------

namespace detail
{

inline constexpr std::uint64_t mod_p = (std::uint64_t(1) << 61) - 1;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b)
{
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % mod_p);
}
inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = a + b;
    return r >= mod_p ? r - mod_p : r;
}
inline std::uint64_t submod(std::uint64_t a, std::uint64_t b)
{
    return a >= b ? a - b : a + mod_p - b;
}
inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e)
{
    std::uint64_t r = 1;
    while (e) {
        if (e & 1) {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    return r;
}
inline std::uint64_t invmod(std::uint64_t a)
{
    return powmod(a, mod_p - 2);
}
inline std::uint64_t integer_mod(const Integer &z)
{
    return static_cast<std::uint64_t>(mpz_fdiv_ui(z.get_mpz_t(), mod_p));
}

// Ring homomorphism Q[symbols, symbols^-1] -> Z/p fixed by random symbol values.
class Specializer
{
public:
    explicit Specializer(std::uint64_t seed) : m_rng(seed) {}

    std::optional<std::uint64_t> operator()(const Coefficient &c)
    {
        std::uint64_t acc = 0;
        for (const auto &[m, q] : c.terms()) {
            if (!m.shift.is_zero()) {
                return std::nullopt;
            }
            const std::uint64_t den = integer_mod(q.get_den());
            if (den == 0) {
                return std::nullopt;
            }
            std::uint64_t v = mulmod(integer_mod(q.get_num()), invmod(den));
            for (const auto &[name, k] : m.powers) {
                std::uint64_t s = symbol_value(name);
                v = mulmod(v, k >= 0 ? powmod(s, static_cast<std::uint64_t>(k))
                                     : invmod(powmod(s, static_cast<std::uint64_t>(-k))));
            }
            acc = addmod(acc, v);
        }
        return acc;
    }

private:
    std::uint64_t symbol_value(const std::string &name)
    {
        auto it = m_values.find(name);
        if (it != m_values.end()) {
            return it->second;
        }
        std::uniform_int_distribution<std::uint64_t> dist(2, mod_p - 1);
        return m_values.emplace(name, dist(m_rng)).first->second;
    }

    std::mt19937_64 m_rng;
    std::map<std::string, std::uint64_t> m_values;
};

struct ModRank {
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_rows; // rows of the original matrix
    std::vector<std::size_t> pivot_cols;
};

// Gaussian elimination over Z/p; rows x cols dense.
inline ModRank mod_rank(std::vector<std::vector<std::uint64_t>> a)
{
    ModRank out;
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<std::size_t> row_id(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        row_id[i] = i;
    }
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(a[p], a[r]);
        std::swap(row_id[p], row_id[r]);
        const std::uint64_t inv = invmod(a[r][c]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (a[i][c] == 0) {
                continue;
            }
            const std::uint64_t f = mulmod(a[i][c], inv);
            for (std::size_t j = c; j < cols; ++j) {
                a[i][j] = submod(a[i][j], mulmod(f, a[r][j]));
            }
        }
        out.pivot_rows.push_back(row_id[r]);
        out.pivot_cols.push_back(c);
        ++r;
    }
    out.rank = r;
    return out;
}

// Kernel vector of a rows x cols matrix over Z/p of nullity >= 1, supported on
// the pivot columns plus column `free_col`.
inline std::vector<std::uint64_t> mod_null_vector(const std::vector<std::vector<std::uint64_t>> &a,
                                                  const ModRank &mr, std::size_t free_col)
{
    const std::size_t r = mr.rank;
    // Solve A_PC y = -a_P,free with c_free = 1.
    std::vector<std::vector<std::uint64_t>> m(r, std::vector<std::uint64_t>(r + 1));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            m[i][j] = a[mr.pivot_rows[i]][mr.pivot_cols[j]];
        }
        m[i][r] = submod(0, a[mr.pivot_rows[i]][free_col]);
    }
    for (std::size_t c = 0; c < r; ++c) {
        std::size_t p = c;
        while (p < r && m[p][c] == 0) {
            ++p;
        }
        std::swap(m[p], m[c]);
        const std::uint64_t inv = invmod(m[c][c]);
        for (auto &x : m[c]) {
            x = mulmod(x, inv);
        }
        for (std::size_t i = 0; i < r; ++i) {
            if (i == c || m[i][c] == 0) {
                continue;
            }
            const std::uint64_t f = m[i][c];
            for (std::size_t j = c; j <= r; ++j) {
                m[i][j] = submod(m[i][j], mulmod(f, m[c][j]));
            }
        }
    }
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    std::vector<std::uint64_t> y(cols, 0);
    y[free_col] = 1;
    for (std::size_t j = 0; j < r; ++j) {
        y[mr.pivot_cols[j]] = m[j][r];
    }
    return y;
}

} // namespace detail

// ---- term matrix ----------------------------------------------------------------

// Coefficients of the evaluated products S_j = Pi_j(phi) at a set of exponents.
struct TermMatrix {
    std::vector<Exponent> rows;
    std::vector<std::vector<Coefficient>> entries; // rows x cols
};

inline TermMatrix term_matrix(const std::vector<const FormalSeries *> &series, const FormalSeries::Bound &upto,
                              const SymbolBasis &basis)
{
    std::map<Exponent, std::size_t, ExponentLess> index;
    std::vector<Exponent> rows;
    for (const auto *s : series) {
        for (const auto &t : s->terms()) {
            if (upto && compare(t.exponent, *upto, basis).sign > 0) {
                continue;
            }
            if (index.emplace(t.exponent, rows.size()).second) {
                rows.push_back(t.exponent);
            }
        }
    }
    // Numeric order of rows.
    std::vector<std::size_t> perm(rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        perm[i] = i;
    }
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return compare(rows[a], rows[b], basis).sign < 0; });
    TermMatrix out;
    std::map<Exponent, std::size_t, ExponentLess> pos;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        out.rows.push_back(rows[perm[i]]);
        pos.emplace(rows[perm[i]], i);
    }
    out.entries.assign(out.rows.size(), std::vector<Coefficient>(series.size()));
    for (std::size_t j = 0; j < series.size(); ++j) {
        for (const auto &t : series[j]->terms()) {
            auto it = pos.find(t.exponent);
            if (it != pos.end()) {
                out.entries[it->second][j] = FormalSeries::scalar(t);
            }
        }
    }
    return out;
}

// ---- dependence -----------------------------------------------------------------------

enum class DependenceKind { Independent, Dependent };

struct DependenceResult {
    DependenceKind kind = DependenceKind::Independent;
    std::vector<Coefficient> null_vector; // c_1..c_k when Dependent
    std::size_t rank = 0;
    std::size_t rows_used = 0;
    FormalSeries::Bound horizon;
    // Wronskian determinant series (rows d^r/ds^r of each product).
    std::optional<FormalSeries> wronskian;
    bool wronskian_zero = false;
    // Term matrix full rank but the Wronskian vanishes up to its horizon.
    bool wronskian_inconclusive = false;
};

struct DependenceOptions {
    bool compute_wronskian = true;
    std::uint64_t seed = 20240611;
};

namespace detail
{

inline std::vector<std::vector<std::uint64_t>> specialize_matrix(const TermMatrix &m,
                                                                 const std::vector<std::size_t> &cols,
                                                                 Specializer &spec)
{
    std::vector<std::vector<std::uint64_t>> a(m.rows.size(), std::vector<std::uint64_t>(cols.size()));
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            auto v = spec(m.entries[i][cols[j]]);
            if (!v) {
                throw Error(ErrorCode::ShiftPresent, "dependence search needs coefficients free of shift multipliers");
            }
            a[i][j] = *v;
        }
    }
    return a;
}

inline Coefficient det_coeff(const Matrix<Coefficient> &m)
{
    return determinant(m, Coefficient(), Coefficient(1), [](const Coefficient &c) { return c.is_zero(); });
}

// Exact kernel vector from the nonsingular minor (pivot_rows x pivot_cols) by
// Cramer's rule, with c_free = det(minor).
inline std::vector<Coefficient> cramer_null_vector(const TermMatrix &m, const std::vector<std::size_t> &cols,
                                                   const std::vector<std::size_t> &prow,
                                                   const std::vector<std::size_t> &pcol, std::size_t free_col)
{
    const std::size_t r = prow.size();
    Matrix<Coefficient> A(r, std::vector<Coefficient>(r));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            A[i][j] = m.entries[prow[i]][cols[pcol[j]]];
        }
    }
    std::vector<Coefficient> c(cols.size());
    c[free_col] = det_coeff(A);
    for (std::size_t t = 0; t < r; ++t) {
        Matrix<Coefficient> At = A;
        for (std::size_t i = 0; i < r; ++i) {
            At[i][t] = m.entries[prow[i]][cols[free_col]];
        }
        c[pcol[t]] = -det_coeff(At);
    }
    return c;
}

inline bool kernel_check(const TermMatrix &m, const std::vector<std::size_t> &cols, const std::vector<Coefficient> &c)
{
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        Coefficient s;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (!c[j].is_zero() && !m.entries[i][cols[j]].is_zero()) {
                s += c[j] * m.entries[i][cols[j]];
            }
        }
        if (!s.is_zero()) {
            return false;
        }
    }
    return true;
}

// Exact rank by greedy extension of a nonsingular minor (Schur-complement argument:
// a column independent of the chosen ones extends the minor with some row).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
exact_pivots(const TermMatrix &m, const std::vector<std::size_t> &cols)
{
    std::vector<std::size_t> prow, pcol;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            if (std::find(prow.begin(), prow.end(), i) != prow.end()) {
                continue;
            }
            const std::size_t r = prow.size() + 1;
            Matrix<Coefficient> A(r, std::vector<Coefficient>(r));
            auto rr = prow;
            rr.push_back(i);
            auto cc = pcol;
            cc.push_back(j);
            for (std::size_t a = 0; a < r; ++a) {
                for (std::size_t b = 0; b < r; ++b) {
                    A[a][b] = m.entries[rr[a]][cols[cc[b]]];
                }
            }
            if (!det_coeff(A).is_zero()) {
                prow = std::move(rr);
                pcol = std::move(cc);
                break;
            }
        }
    }
    return {prow, pcol};
}

// Strip the common monomial and rational content of a coefficient vector.
inline std::vector<Coefficient> primitive_vector(std::vector<Coefficient> c)
{
    std::vector<const Coefficient *> ptrs;
    for (const auto &x : c) {
        if (!x.is_zero()) {
            ptrs.push_back(&x);
        }
    }
    if (ptrs.empty()) {
        return c;
    }
    CoeffMonomial g = Coefficient::monomial_content(ptrs);
    Integer num_gcd(0), den_lcm(1);
    for (auto &x : c) {
        x = x.divided_by(g);
        for (const auto &[_, q] : x.terms()) {
            num_gcd = integer_gcd(num_gcd, q.get_num());
            den_lcm = integer_lcm(den_lcm, q.get_den());
        }
    }
    Rational scale(den_lcm, num_gcd);
    scale.canonicalize();
    // Sign: first nonzero entry has a positive leading rational.
    for (const auto &x : c) {
        if (!x.is_zero()) {
            if (x.terms().rbegin()->second < 0) {
                scale = -scale;
            }
            break;
        }
    }
    for (auto &x : c) {
        x = scale * x;
    }
    return c;
}

} // namespace detail

// Evaluate each product on phi.
inline std::vector<FormalSeries> evaluate_products(const std::vector<PowerProduct> &products, const FormalSeries &phi)
{
    std::vector<FormalSeries> out;
    out.reserve(products.size());
    for (const auto &p : products) {
        out.push_back(substitute_series(p.to_diffpoly(), phi));
    }
    return out;
}

// Wronskian det[ d^r/ds^r S_j ], r = 0..k-1.
inline FormalSeries wronskian_series(const std::vector<FormalSeries> &S)
{
    if (S.empty()) {
        throw Error(ErrorCode::DegenerateInput, "Wronskian of no functions");
    }
    const BasisPtr &basis = S.front().basis();
    const std::size_t k = S.size();
    Matrix<FormalSeries> M(k, std::vector<FormalSeries>(k, FormalSeries::zero(basis)));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t j = 0; j < k; ++j) {
            M[r][j] = S[j].differentiate_s(static_cast<unsigned>(r));
        }
    }
    return determinant(M, FormalSeries::zero(basis), FormalSeries::constant(basis, Coefficient(1)),
                       [](const FormalSeries &s) { return s.is_zero() && s.is_exact(); });
}

inline FormalSeries::Bound common_validity(const std::vector<const FormalSeries *> &S, const SymbolBasis &basis)
{
    FormalSeries::Bound v;
    bool tie = false;
    for (const auto *s : S) {
        v = FormalSeries::min_bound(v, s->truncation(), basis, tie);
    }
    return v;
}

// Linear dependence over constants of the products evaluated on phi, decided on
// the coefficient matrix of all exponents up to `horizon` (default: as far as
// every evaluated product is known). Full column rank certifies independence;
// otherwise a kernel vector is returned, exact on every row used.
inline DependenceResult wronskian_dependence(const std::vector<PowerProduct> &products, const FormalSeries &phi,
                                             const FormalSeries::Bound &horizon = std::nullopt,
                                             const DependenceOptions &opts = {})
{
    if (products.size() < 2) {
        throw Error(ErrorCode::DegenerateInput, "dependence needs at least two products");
    }
    const SymbolBasis &basis = *phi.basis();
    auto S = evaluate_products(products, phi);
    std::vector<const FormalSeries *> ptrs;
    for (const auto &s : S) {
        ptrs.push_back(&s);
    }
    FormalSeries::Bound valid = common_validity(ptrs, basis);
    FormalSeries::Bound upto = horizon ? horizon : valid;
    if (horizon && valid && compare(*horizon, *valid, basis).sign > 0) {
        throw Error(ErrorCode::HorizonTooShort, "requested horizon " + horizon->to_string()
                                                    + " exceeds the validity " + valid->to_string()
                                                    + " of the evaluated products");
    }
    TermMatrix tm = term_matrix(ptrs, upto, basis);
    std::vector<std::size_t> cols(products.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        cols[j] = j;
    }
    DependenceResult out;
    out.rows_used = tm.rows.size();
    out.horizon = upto;

    bool decided = false;
    for (std::uint64_t attempt = 0; attempt < 3 && !decided; ++attempt) {
        detail::Specializer spec(opts.seed + attempt);
        auto a = detail::specialize_matrix(tm, cols, spec);
        auto mr = detail::mod_rank(a);
        if (mr.rank == cols.size()) {
            out.kind = DependenceKind::Independent;
            out.rank = mr.rank;
            decided = true;
            break;
        }
        std::size_t free_col = 0;
        while (std::find(mr.pivot_cols.begin(), mr.pivot_cols.end(), free_col) != mr.pivot_cols.end()) {
            ++free_col;
        }
        std::vector<std::size_t> pcol(mr.pivot_cols.begin(), mr.pivot_cols.end());
        auto c = detail::cramer_null_vector(tm, cols, mr.pivot_rows, pcol, free_col);
        if (detail::kernel_check(tm, cols, c)) {
            out.kind = DependenceKind::Dependent;
            out.rank = mr.rank;
            out.null_vector = detail::primitive_vector(std::move(c));
            decided = true;
        }
    }
    if (!decided) {
        auto [prow, pcol] = detail::exact_pivots(tm, cols);
        out.rank = prow.size();
        if (prow.size() == cols.size()) {
            out.kind = DependenceKind::Independent;
        } else {
            std::size_t free_col = 0;
            while (std::find(pcol.begin(), pcol.end(), free_col) != pcol.end()) {
                ++free_col;
            }
            out.kind = DependenceKind::Dependent;
            out.null_vector = detail::primitive_vector(detail::cramer_null_vector(tm, cols, prow, pcol, free_col));
        }
    }
    if (opts.compute_wronskian) {
        FormalSeries w = wronskian_series(S);
        if (upto && (!w.truncation() || compare(*upto, *w.truncation(), basis).sign < 0)) {
            w = w.truncate(*upto);
        }
        out.wronskian_zero = w.is_zero();
        out.wronskian_inconclusive = out.kind == DependenceKind::Independent && out.wronskian_zero;
        out.wronskian = std::move(w);
    }
    return out;
}

// ---- ADE derivation ---------------------------------------------------------------------

struct AdeCandidate {
    std::vector<std::size_t> subset;     // indices into the product list
    Exponent refuted_at;                 // first exponent with a nonzero residual
};

struct AdeOptions {
    std::uint64_t seed = 20240611;
    // Largest subset size tried (default: number of rows + 1).
    std::optional<std::size_t> max_subset;
};

struct AdeResult {
    bool found = false;
    std::vector<PowerProduct> products;  // the enumerated pool
    std::vector<std::size_t> subset;     // indices of the products used
    std::vector<Coefficient> coefficients;
    DiffPolynomial equation;
    FormalSeries::Bound horizon;          // rows used for detection
    FormalSeries::Bound check_horizon;    // horizon of the substitute cross-check
    std::optional<Residual> check;
    std::optional<DependenceResult> dependence;
    std::vector<AdeCandidate> refuted;
    std::size_t subsets_examined = 0;
};

namespace detail
{

inline std::vector<std::vector<std::size_t>> ordered_subsets(const std::vector<PowerProduct> &P, std::size_t k)
{
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    auto rec = [&](auto &&self, std::size_t start) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i + (k - cur.size()) <= P.size(); ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    auto weight = [&](const std::vector<std::size_t> &s) {
        unsigned w = 0;
        for (auto i : s) {
            w += P[i].weight();
        }
        return w;
    };
    std::stable_sort(out.begin(), out.end(), [&](const auto &a, const auto &b) { return weight(a) < weight(b); });
    return out;
}

} // namespace detail

// Search product subsets (by size, then total weight, then index order) for a
// constant-coefficient relation sum c_t Pi_t(phi) = 0 detected on the exponents up
// to `horizon`. Only minimal relations (kernel of dimension one, every c_t
// nonzero) are candidates. A candidate is refuted when its residual on the whole
// known part of phi is nonzero; the first survivor is cross-checked exactly with
// substitute and returned.
//
// Refutation uses the image of the residual under a random specialisation of the
// symbols modulo p = 2^61 - 1. The candidate's kernel vector specialises to the
// modular kernel vector (the pivot minor is nonzero mod p), so a nonzero image
// proves a nonzero exact residual.
inline AdeResult derive_ade(const FormalSeries &phi, unsigned W, const FormalSeries::Bound &horizon = std::nullopt,
                            const AdeOptions &opts = {})
{
    if (W < 2) {
        throw Error(ErrorCode::DegenerateInput, "maximal weight must be at least 2");
    }
    const SymbolBasis &basis = *phi.basis();
    AdeResult out;
    out.products = enumerate_products(W);
    const auto &P = out.products;
    auto S = evaluate_products(P, phi);

    std::vector<const FormalSeries *> all;
    for (const auto &s : S) {
        all.push_back(&s);
    }
    FormalSeries::Bound valid = common_validity(all, basis);
    if (horizon && valid && compare(*horizon, *valid, basis).sign > 0) {
        throw Error(ErrorCode::HorizonTooShort, "requested horizon " + horizon->to_string()
                                                    + " exceeds the validity " + valid->to_string()
                                                    + " of the evaluated products");
    }
    out.horizon = horizon ? horizon : valid;
    out.check_horizon = valid;
    TermMatrix detect = term_matrix(all, out.horizon, basis);
    TermMatrix full = term_matrix(all, valid, basis);

    detail::Specializer spec(opts.seed);
    std::vector<std::size_t> every(P.size());
    for (std::size_t j = 0; j < every.size(); ++j) {
        every[j] = j;
    }
    const auto a_detect = detail::specialize_matrix(detect, every, spec);
    const auto a_full = detail::specialize_matrix(full, every, spec);

    const std::size_t kmax = std::min(P.size(), opts.max_subset.value_or(detect.rows.size() + 1));
    for (std::size_t k = 2; k <= kmax; ++k) {
        for (const auto &subset : detail::ordered_subsets(P, k)) {
            ++out.subsets_examined;
            std::vector<std::vector<std::uint64_t>> a(a_detect.size(), std::vector<std::uint64_t>(k));
            for (std::size_t i = 0; i < a_detect.size(); ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    a[i][j] = a_detect[i][subset[j]];
                }
            }
            auto mr = detail::mod_rank(a);
            if (mr.rank + 1 != k) {
                continue;
            }
            std::size_t free_col = 0;
            while (std::find(mr.pivot_cols.begin(), mr.pivot_cols.end(), free_col) != mr.pivot_cols.end()) {
                ++free_col;
            }
            auto y = detail::mod_null_vector(a, mr, free_col);
            if (std::any_of(y.begin(), y.end(), [](std::uint64_t v) { return v == 0; })) {
                continue; // not minimal: a smaller subset carries the relation
            }
            // Residual image on every known exponent.
            std::optional<std::size_t> bad_row;
            for (std::size_t i = 0; i < a_full.size() && !bad_row; ++i) {
                std::uint64_t s = 0;
                for (std::size_t j = 0; j < k; ++j) {
                    s = detail::addmod(s, detail::mulmod(a_full[i][subset[j]], y[j]));
                }
                if (s != 0) {
                    bad_row = i;
                }
            }
            if (bad_row) {
                out.refuted.push_back({subset, full.rows[*bad_row]});
                continue;
            }
            // Survivor: exact kernel vector and exact cross-check.
            std::vector<PowerProduct> chosen;
            for (auto i : subset) {
                chosen.push_back(P[i]);
            }
            DependenceOptions dopts;
            dopts.seed = opts.seed;
            DependenceResult dep = wronskian_dependence(chosen, phi, out.horizon, dopts);
            if (dep.kind != DependenceKind::Dependent) {
                continue;
            }
            DiffPolynomial F;
            for (std::size_t j = 0; j < k; ++j) {
                F += chosen[j].to_diffpoly().scaled(dep.null_vector[j]);
            }
            Residual check = substitute(F, phi);
            if (!check.is_zero()) {
                out.refuted.push_back({subset, check.leading->exponent});
                continue;
            }
            out.found = true;
            out.subset = subset;
            out.coefficients = dep.null_vector;
            out.equation = F;
            out.check = std::move(check);
            out.dependence = std::move(dep);
            return out;
        }
    }
    return out;
}

} // namespace dforge

#endif
