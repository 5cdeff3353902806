#include "hbs/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hbs/error.hpp"

namespace hbs {

namespace {

inline double k1(double t) { return t - 0.5; }
inline double k2(double t) {
  const double a = t - 0.5;
  return (a * a - 1.0 / 12.0) / 2.0;
}
inline double k4(double t) {
  const double a = t - 0.5;
  const double a2 = a * a;
  return (a2 * a2 - a2 / 2.0 + 7.0 / 240.0) / 24.0;
}
inline double r1(double s, double t) { return k2(s) * k2(t) - k4(std::abs(s - t)); }

void check_unit(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInput(std::string(what) + ": argument " + std::to_string(t) + " outside [0,1]");
  }
}

void check_point(std::span<const double> x, const AnovaSpec& spec) {
  if (static_cast<int>(x.size()) != spec.dims) {
    throw InvalidInput("point has " + std::to_string(x.size()) + " coordinates, spec has " +
                       std::to_string(spec.dims));
  }
  for (const double v : x) check_unit(v, "kernel");
}

// Unit-scale kernel of one term given per-dimension R1 and k1 k1 products.
inline double term_value(const AnovaTerm& term, const double* r, const double* p) {
  if (!term.is_interaction()) return r[term.first];
  const int a = term.first;
  const int b = term.second;
  return r[a] * r[b] + r[a] * p[b] + p[a] * r[b];
}

// Fills per-dimension R1(x_j, z_j) and k1(x_j) k1(z_j).
inline void per_dim(const double* x, const double* z, int dims, double* r, double* p) {
  for (int j = 0; j < dims; ++j) {
    r[j] = r1(x[j], z[j]);
    p[j] = k1(x[j]) * k1(z[j]);
  }
}

}  // namespace

double bernoulli_k(int level, double t) {
  check_unit(t, "bernoulli_k");
  switch (level) {
    case 1: return k1(t);
    case 2: return k2(t);
    case 4: return k4(t);
    default: throw InvalidInput("bernoulli_k level must be 1, 2 or 4");
  }
}

double kernel_main(double s, double t) {
  check_unit(s, "kernel_main");
  check_unit(t, "kernel_main");
  return r1(s, t);
}

AnovaTerm AnovaSpec::term(std::size_t t) const {
  if (t < main_effects.size()) return AnovaTerm{main_effects[t], -1};
  const std::size_t i = t - main_effects.size();
  if (i >= interactions.size()) throw InvalidInput("term index out of range for spec");
  return AnovaTerm{interactions[i].first, interactions[i].second};
}

std::string AnovaSpec::term_label(std::size_t t) const {
  const AnovaTerm tt = term(t);
  if (!tt.is_interaction()) return "x" + std::to_string(tt.first);
  return "x" + std::to_string(tt.first) + ":x" + std::to_string(tt.second);
}

void AnovaSpec::validate() const {
  if (dims < 1) throw InvalidConfig("spec dimension must be positive");
  std::set<int> mains;
  for (const int j : main_effects) {
    if (j < 0 || j >= dims) throw InvalidConfig("main effect " + std::to_string(j) + " out of range");
    if (!mains.insert(j).second) throw InvalidConfig("duplicate main effect " + std::to_string(j));
  }
  std::set<std::pair<int, int>> pairs;
  for (const auto& [a, b] : interactions) {
    if (a == b) throw InvalidConfig("interaction needs two distinct dimensions");
    if (!mains.count(a) || !mains.count(b)) {
      throw InvalidConfig("interaction (" + std::to_string(a) + "," + std::to_string(b) +
                          ") uses a dimension without a main effect");
    }
    if (!pairs.insert(std::minmax(a, b)).second) {
      throw InvalidConfig("duplicate interaction (" + std::to_string(a) + "," +
                          std::to_string(b) + ")");
    }
  }
  if (term_scales.size() != term_count()) {
    throw InvalidConfig("spec has " + std::to_string(term_count()) + " terms but " +
                        std::to_string(term_scales.size()) + " scales");
  }
  for (const double theta : term_scales) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidConfig("term scales must be positive");
  }
}

AnovaSpec AnovaSpec::additive(int dims) {
  AnovaSpec spec;
  spec.dims = dims;
  for (int j = 0; j < dims; ++j) spec.main_effects.push_back(j);
  spec.term_scales.assign(spec.term_count(), 1.0);
  return spec;
}

AnovaSpec AnovaSpec::all_pairs(int dims) {
  AnovaSpec spec = additive(dims);
  for (int a = 0; a < dims; ++a) {
    for (int b = a + 1; b < dims; ++b) spec.interactions.emplace_back(a, b);
  }
  spec.term_scales.assign(spec.term_count(), 1.0);
  return spec;
}

double kernel_term(std::span<const double> x, std::span<const double> z, const AnovaSpec& spec,
                   std::size_t term) {
  check_point(x, spec);
  check_point(z, spec);
  if (term >= spec.term_count()) throw InvalidInput("term not in spec");
  std::vector<double> r(x.size()), p(x.size());
  per_dim(x.data(), z.data(), spec.dims, r.data(), p.data());
  return spec.term_scales[term] * term_value(spec.term(term), r.data(), p.data());
}

double kernel(std::span<const double> x, std::span<const double> z, const AnovaSpec& spec) {
  double total = 0.0;
  for (std::size_t t = 0; t < spec.term_count(); ++t) total += kernel_term(x, z, spec, t);
  return total;
}

Vector null_space_eval(std::span<const double> x, const AnovaSpec& spec) {
  check_point(x, spec);
  Vector out(static_cast<Eigen::Index>(spec.null_dim()));
  out[0] = 1.0;
  for (std::size_t j = 0; j < spec.main_effects.size(); ++j) {
    out[static_cast<Eigen::Index>(j + 1)] = k1(x[static_cast<std::size_t>(spec.main_effects[j])]);
  }
  return out;
}

Matrix kernel_gram(const Matrix& A, const Matrix& B, const AnovaSpec& spec) {
  spec.validate();
  if (A.cols() != spec.dims || B.cols() != spec.dims) {
    throw InvalidInput("Gram inputs do not match the spec dimension");
  }
  for (const Matrix* M : {&A, &B}) {
    if (M->size() > 0 && (M->minCoeff() < 0.0 || M->maxCoeff() > 1.0)) {
      throw InvalidInput("Gram inputs must lie in [0,1]^d");
    }
  }
  const int dims = spec.dims;
  std::vector<AnovaTerm> terms;
  for (std::size_t t = 0; t < spec.term_count(); ++t) terms.push_back(spec.term(t));

  Matrix out(A.rows(), B.rows());
  std::vector<double> r(static_cast<std::size_t>(dims)), p(static_cast<std::size_t>(dims));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      per_dim(A.row(i).data(), B.row(j).data(), dims, r.data(), p.data());
      double total = 0.0;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        total += spec.term_scales[t] * term_value(terms[t], r.data(), p.data());
      }
      out(i, j) = total;
    }
  }
  return out;
}

Matrix null_space_design(const Matrix& X, const AnovaSpec& spec) {
  Matrix S(X.rows(), static_cast<Eigen::Index>(spec.null_dim()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    S.row(i) = null_space_eval(std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())), spec)
                   .transpose();
  }
  return S;
}

KernelMatrices assemble_matrices(const Matrix& X, const Matrix& basis, const AnovaSpec& spec) {
  if (X.cols() != basis.cols()) throw InvalidInput("data and basis dimensions differ");
  if (X.cols() != spec.dims) throw InvalidInput("data dimension does not match the spec");
  KernelMatrices out;
  out.S = null_space_design(X, spec);
  out.Rstar = kernel_gram(X, basis, spec);
  out.Rstarstar = kernel_gram(basis, basis, spec);
  return out;
}

KernelMatrices assemble_matrices(const Dataset& data, const BasisSelection& sel,
                                 const AnovaSpec& spec) {
  return assemble_matrices(data.X, basis_points(data, sel), spec);
}

AnovaSpec rescale_term_weights(const Matrix& basis, const AnovaSpec& spec) {
  spec.validate();
  if (basis.rows() < 1) throw InvalidConfig("no basis points to normalize term scales on");
  AnovaSpec out = spec;
  std::vector<double> r(static_cast<std::size_t>(spec.dims)), p(static_cast<std::size_t>(spec.dims));
  for (std::size_t t = 0; t < spec.term_count(); ++t) {
    const AnovaTerm term = spec.term(t);
    double trace = 0.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      per_dim(basis.row(i).data(), basis.row(i).data(), spec.dims, r.data(), p.data());
      trace += term_value(term, r.data(), p.data());
    }
    if (!(trace > 0.0) || !std::isfinite(trace)) {
      throw InvalidConfig("term " + spec.term_label(t) + " has a degenerate Gram trace");
    }
    out.term_scales[t] = static_cast<double>(basis.rows()) / trace;
  }
  return out;
}

AnovaSpec rescale_term_weights(const Dataset& data, const BasisSelection& sel,
                               const AnovaSpec& spec) {
  return rescale_term_weights(basis_points(data, sel), spec);
}

}  // namespace hbs
