#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace hbs {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Per-column min-max map onto [0,1]. Constant columns map to 0.5.
struct Scaler {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dims() const noexcept { return lower.size(); }
  bool constant(std::size_t j) const noexcept { return !(upper[j] > lower[j]); }

  double apply(std::size_t j, double value) const noexcept {
    return constant(j) ? 0.5 : (value - lower[j]) / (upper[j] - lower[j]);
  }
  /// Defined only for non-constant columns.
  double invert(std::size_t j, double scaled) const noexcept {
    return lower[j] + scaled * (upper[j] - lower[j]);
  }

  /// Scale raw rows; coordinates falling outside [0,1] are clamped and counted.
  Matrix transform(const Matrix& raw, std::size_t* clamped = nullptr) const;

  static Scaler fit(const Matrix& raw);
  static Scaler identity(std::size_t dims);
};

/// Predictors scaled to [0,1]^d, responses, and the scaling that produced them.
struct Dataset {
  Matrix X;
  Vector y;
  Scaler scaler;

  std::size_t n() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

/// Column-wise min-max scaling. Throws IngestionError naming the first
/// non-finite cell, InvalidInput for an empty matrix or a y length mismatch.
/// An empty y is allowed (responses unavailable).
Dataset scale_to_unit_cube(const Matrix& raw, const Vector& y);

/// Wraps predictors already in [0,1]^d with an identity scaler.
Dataset unit_dataset(Matrix X, Vector y);

}  // namespace hbs
