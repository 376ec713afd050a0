#ifndef DFORGE_DETERMINANT_HPP
#define DFORGE_DETERMINANT_HPP

#include <bit>
#include <cstdint>
#include <vector>

#include <dforge/error.hpp>

namespace dforge
{

template <typename T>
using Matrix = std::vector<std::vector<T>>;

// Determinant of a square matrix over a commutative ring by Laplace expansion
// along rows with memoisation over column subsets (n * 2^n ring products, no
// division). `is_zero` lets sparse entries be skipped.
template <typename T, typename IsZero>
T determinant(const Matrix<T> &m, const T &zero, const T &one, IsZero &&is_zero)
{
    const std::size_t n = m.size();
    if (n == 0) {
        return one;
    }
    if (n > 24) {
        throw Error(ErrorCode::DegenerateInput, "determinant dimension too large for expansion");
    }
    for (const auto &row : m) {
        if (row.size() != n) {
            throw Error(ErrorCode::DegenerateInput, "determinant of a non-square matrix");
        }
    }
    // dp[mask]: signed sum over placements of the first popcount(mask) rows
    // into the columns of mask.
    const std::uint32_t full = (1u << n) - 1u;
    std::vector<T> dp(static_cast<std::size_t>(full) + 1, zero);
    std::vector<bool> live(dp.size(), false);
    dp[0] = one;
    live[0] = true;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        if (!live[mask]) {
            continue;
        }
        const std::size_t row = static_cast<std::size_t>(std::popcount(mask));
        for (std::size_t col = 0; col < n; ++col) {
            const std::uint32_t bit = 1u << col;
            if ((mask & bit) || is_zero(m[row][col])) {
                continue;
            }
            // Sign: parity of already-used columns to the right of `col`.
            const int above = std::popcount(mask >> (col + 1));
            T term = dp[mask] * m[row][col];
            if (above % 2) {
                dp[mask | bit] = dp[mask | bit] - term;
            } else {
                dp[mask | bit] = dp[mask | bit] + term;
            }
            live[mask | bit] = true;
        }
    }
    return dp[full];
}

} // namespace dforge

#endif
