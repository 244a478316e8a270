#include "splitfit/matrix.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace splitfit {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> as_eigen(const DenseMatrix& m) {
    return {m.entries().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

void check_rank_tol(double rank_tol) {
    if (!(rank_tol > 0.0 && rank_tol < 1.0))
        throw InvalidArgument("rank tolerance must lie in (0, 1), got " + std::to_string(rank_tol));
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be at least 1x1");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be at least 1x1");
    if (entries_.size() != rows * cols)
        throw DimensionError("entry count does not match matrix shape");
    check_finite();
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::check_finite() const {
    for (double v : entries_)
        if (!std::isfinite(v)) throw InvalidArgument("matrix has non-finite entries");
}

LsqSolution lstsq_min_norm(const DenseMatrix& a, std::span<const double> f, double rank_tol) {
    check_rank_tol(rank_tol);
    a.check_finite();
    if (f.size() != a.rows())
        throw DimensionError("right-hand side length " + std::to_string(f.size()) +
                             " does not match row count " + std::to_string(a.rows()));
    for (double v : f)
        if (!std::isfinite(v)) throw InvalidArgument("right-hand side has non-finite entries");

    Eigen::Map<const Eigen::VectorXd> rhs(f.data(), static_cast<Eigen::Index>(f.size()));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rank_tol);

    LsqSolution out;
    Eigen::VectorXd x = svd.solve(rhs);
    out.solution.assign(x.data(), x.data() + x.size());
    out.effective_rank = static_cast<std::size_t>(svd.rank());
    out.residual_norm = (as_eigen(a) * x - rhs).norm();
    const auto& sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    return out;
}

DenseMatrix gram(const DenseMatrix& a) {
    a.check_finite();
    const std::size_t n = a.cols();
    DenseMatrix g(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k; l < n; ++l) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, k) * a(i, l);
            g(k, l) = s;
            g(l, k) = s;
        }
    }
    return g;
}

bool is_positive_definite(const DenseMatrix& m, double tol) {
    check_rank_tol(tol);
    m.check_finite();
    if (m.rows() != m.cols()) throw DimensionError("positive definiteness needs a square matrix");

    double max_abs = 0.0;
    for (double v : m.entries()) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol * std::max(max_abs, 1.0))
                throw InvalidArgument("matrix is not symmetric within tolerance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(m), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues(); // ascending
    const double smallest = ev(0);
    const double largest = ev(ev.size() - 1);
    return smallest > tol * largest;
}

} // namespace splitfit
