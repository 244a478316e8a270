#ifndef SPLITFIT_MATRIX_HPP
#define SPLITFIT_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "splitfit/errors.hpp"

namespace splitfit {

/// Relative singular-value cutoff used everywhere a rank decision is made.
inline constexpr double kDefaultRankTol = 1e-12;

/// Dense real matrix, row-major. Entries are unitless; units are carried by
/// the callers.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    const std::vector<double>& entries() const { return entries_; }

    /// Throws InvalidArgument if any entry is not finite.
    void check_finite() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

/// Result of a minimum-norm least-squares solve.
struct LsqSolution {
    std::vector<double> solution;
    std::size_t effective_rank = 0;
    double residual_norm = 0.0;
    /// Nonincreasing, all min(rows, cols) of them.
    std::vector<double> singular_values;
};

/// Minimum-norm minimizer of ||a*x - f||^2 by singular value decomposition.
/// Singular values below rank_tol times the largest are treated as zero.
LsqSolution lstsq_min_norm(const DenseMatrix& a, std::span<const double> f,
                           double rank_tol = kDefaultRankTol);

/// a^T a, symmetric positive semidefinite.
DenseMatrix gram(const DenseMatrix& a);

/// True iff the smallest eigenvalue exceeds tol times the largest.
/// Requires m square and symmetric within tol (relative to the largest entry).
bool is_positive_definite(const DenseMatrix& m, double tol = kDefaultRankTol);

} // namespace splitfit

#endif
