#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace emloc {

/// Symmetric block-tridiagonal matrix with square blocks of equal size.
/// Row-block k holds upper(k-1)ᵀ, diag(k), upper(k).
///
/// Second variations of discrete actions have exactly this structure: time
/// slices couple only to their neighbours.
template <typename Scalar> class BlockTridiagonal {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BlockTridiagonal(Eigen::Index blocks, Eigen::Index block_size)
      : block_size_(block_size),
        diag_(static_cast<std::size_t>(blocks), Matrix::Zero(block_size, block_size)),
        upper_(static_cast<std::size_t>(blocks > 0 ? blocks - 1 : 0),
               Matrix::Zero(block_size, block_size)) {}

  Eigen::Index blocks() const { return static_cast<Eigen::Index>(diag_.size()); }
  Eigen::Index block_size() const { return block_size_; }
  Eigen::Index rows() const { return blocks() * block_size_; }

  Matrix &diag(Eigen::Index k) { return diag_[static_cast<std::size_t>(k)]; }
  const Matrix &diag(Eigen::Index k) const { return diag_[static_cast<std::size_t>(k)]; }
  Matrix &upper(Eigen::Index k) { return upper_[static_cast<std::size_t>(k)]; }
  const Matrix &upper(Eigen::Index k) const { return upper_[static_cast<std::size_t>(k)]; }

  void add_to_diagonal(Scalar delta) {
    for (auto &d : diag_)
      d.diagonal().array() += delta;
  }

  Vector operator*(const Vector &x) const {
    const Eigen::Index m = block_size_;
    Vector y(x.size());
    for (Eigen::Index k = 0; k < blocks(); ++k) {
      auto yk = y.segment(k * m, m);
      yk.noalias() = diag(k) * x.segment(k * m, m);
      if (k > 0)
        yk.noalias() += upper(k - 1).transpose() * x.segment((k - 1) * m, m);
      if (k + 1 < blocks())
        yk.noalias() += upper(k) * x.segment((k + 1) * m, m);
    }
    return y;
  }

  /// Max absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (Eigen::Index k = 0; k < blocks(); ++k) {
      Eigen::ArrayXd rows = diag(k).cwiseAbs().rowwise().sum().template cast<double>();
      if (k > 0)
        rows += upper(k - 1).transpose().cwiseAbs().rowwise().sum().template cast<double>().array();
      if (k + 1 < blocks())
        rows += upper(k).cwiseAbs().rowwise().sum().template cast<double>().array();
      best = std::max(best, rows.maxCoeff());
    }
    return best;
  }

  Matrix to_dense() const {
    const Eigen::Index m = block_size_;
    Matrix a = Matrix::Zero(rows(), rows());
    for (Eigen::Index k = 0; k < blocks(); ++k) {
      a.block(k * m, k * m, m, m) = diag(k);
      if (k + 1 < blocks()) {
        a.block(k * m, (k + 1) * m, m, m) = upper(k);
        a.block((k + 1) * m, k * m, m, m) = upper(k).transpose();
      }
    }
    return a;
  }

private:
  Eigen::Index block_size_;
  std::vector<Matrix> diag_;
  std::vector<Matrix> upper_;
};

/// Block LU (block Thomas) factorization of a BlockTridiagonal.
template <typename Scalar> class BlockTridiagonalLU {
public:
  using Matrix = typename BlockTridiagonal<Scalar>::Matrix;
  using Vector = typename BlockTridiagonal<Scalar>::Vector;

  explicit BlockTridiagonalLU(const BlockTridiagonal<Scalar> &a) : a_(&a) {
    const Eigen::Index n = a.blocks();
    pivots_.reserve(static_cast<std::size_t>(n));
    Matrix p = a.diag(0);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k > 0) {
        const Matrix &c = a.upper(k - 1);
        p = a.diag(k) - c.transpose() * pivots_.back().solve(c);
      }
      pivots_.emplace_back(p);
      const Scalar det = pivots_.back().determinant();
      if (!std::isfinite(std::abs(det)) || det == Scalar(0) || !p.allFinite()) {
        ok_ = false;
      } else {
        log_abs_det_ += std::log(std::abs(det));
        if (det < Scalar(0))
          sign_ = -sign_;
      }
    }
  }

  /// False if a pivot block was exactly singular or non-finite.
  bool ok() const { return ok_; }
  double log_abs_determinant() const { return log_abs_det_; }
  int determinant_sign() const { return sign_; }

  Matrix solve(const Matrix &rhs) const {
    const BlockTridiagonal<Scalar> &a = *a_;
    const Eigen::Index m = a.block_size();
    const Eigen::Index n = a.blocks();
    Matrix y = rhs;
    for (Eigen::Index k = 1; k < n; ++k) {
      y.middleRows(k * m, m) -=
          a.upper(k - 1).transpose() *
          pivots_[static_cast<std::size_t>(k - 1)].solve(y.middleRows((k - 1) * m, m));
    }
    Matrix x(rhs.rows(), rhs.cols());
    x.middleRows((n - 1) * m, m) =
        pivots_[static_cast<std::size_t>(n - 1)].solve(y.middleRows((n - 1) * m, m));
    for (Eigen::Index k = n - 2; k >= 0; --k) {
      x.middleRows(k * m, m) = pivots_[static_cast<std::size_t>(k)].solve(
          y.middleRows(k * m, m) - a.upper(k) * x.middleRows((k + 1) * m, m));
    }
    return x;
  }

  Vector solve(const Vector &rhs) const {
    return solve(Matrix(rhs)).col(0);
  }

private:
  const BlockTridiagonal<Scalar> *a_;
  std::vector<Eigen::PartialPivLU<Matrix>> pivots_;
  bool ok_ = true;
  double log_abs_det_ = 0.0;
  int sign_ = 1;
};

/// Estimate of min |λ| / ‖A‖_∞ for a symmetric block-tridiagonal matrix via
/// inverse iteration. Returns 0 when the factorization breaks down.
template <typename Scalar>
double relative_min_eigenvalue(const BlockTridiagonal<Scalar> &a,
                               int iterations = 40) {
  const BlockTridiagonalLU<Scalar> lu(a);
  const double scale = a.norm_inf();
  if (!lu.ok() || scale == 0.0)
    return 0.0;
  using Vector = typename BlockTridiagonal<Scalar>::Vector;
  Vector x(a.rows());
  // Deterministic start vector with components in every direction.
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x(i) = Scalar(1.0 + 0.37 * std::sin(1.0 + 2.3 * static_cast<double>(i)));
  x.normalize();
  double growth = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = lu.solve(x);
    growth = y.norm();
    if (!std::isfinite(growth))
      return 0.0;
    if (growth == 0.0)
      break;
    x = y / growth;
  }
  if (growth == 0.0)
    return std::numeric_limits<double>::infinity();
  return (1.0 / growth) / scale;
}

} // namespace emloc
