#include "hbs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbs/error.hpp"

namespace hbs {

namespace {

void require_finite(const Matrix& raw) {
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      if (!std::isfinite(raw(i, j))) {
        throw IngestionError("non-finite value at row " + std::to_string(i) +
                                 ", column " + std::to_string(j),
                             static_cast<long>(i), static_cast<long>(j));
      }
    }
  }
}

}  // namespace

Scaler Scaler::fit(const Matrix& raw) {
  Scaler s;
  const auto d = static_cast<std::size_t>(raw.cols());
  s.lower.resize(d);
  s.upper.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    s.lower[j] = raw.col(static_cast<Eigen::Index>(j)).minCoeff();
    s.upper[j] = raw.col(static_cast<Eigen::Index>(j)).maxCoeff();
  }
  return s;
}

Scaler Scaler::identity(std::size_t dims) {
  return Scaler{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

Matrix Scaler::transform(const Matrix& raw, std::size_t* clamped) const {
  if (static_cast<std::size_t>(raw.cols()) != dims()) {
    throw InvalidInput("data has " + std::to_string(raw.cols()) +
                       " columns, scaler expects " + std::to_string(dims()));
  }
  Matrix out(raw.rows(), raw.cols());
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      double v = apply(static_cast<std::size_t>(j), raw(i, j));
      if (v < 0.0 || v > 1.0) {
        ++count;
        v = std::clamp(v, 0.0, 1.0);
      }
      out(i, j) = v;
    }
  }
  if (clamped != nullptr) *clamped = count;
  return out;
}

Dataset scale_to_unit_cube(const Matrix& raw, const Vector& y) {
  if (raw.rows() < 1 || raw.cols() < 1) {
    throw InvalidInput("dataset needs at least one row and one column");
  }
  if (y.size() != 0 && y.size() != raw.rows()) {
    throw InvalidInput("response length " + std::to_string(y.size()) +
                       " does not match " + std::to_string(raw.rows()) + " rows");
  }
  require_finite(raw);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw IngestionError("non-finite response at row " + std::to_string(i),
                           static_cast<long>(i), -1);
    }
  }
  Dataset data;
  data.scaler = Scaler::fit(raw);
  data.X = data.scaler.transform(raw);
  data.y = y;
  return data;
}

Dataset unit_dataset(Matrix X, Vector y) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!(X(i, j) >= 0.0 && X(i, j) <= 1.0)) {
        throw InvalidInput("unit dataset value outside [0,1] at row " + std::to_string(i));
      }
    }
  }
  Dataset data;
  data.scaler = Scaler::identity(static_cast<std::size_t>(X.cols()));
  data.X = std::move(X);
  data.y = std::move(y);
  return data;
}

}  // namespace hbs
