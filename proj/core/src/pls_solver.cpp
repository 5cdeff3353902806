#include "hbs/pls_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <string>

#include "hbs/error.hpp"

namespace hbs {

namespace {

constexpr double kJitterStart = 1e-12;
constexpr double kJitterStop = 1e-6;
// Below this reciprocal condition estimate the normal equations cannot be
// trusted to about 1e-6 and the augmented least-squares problem is solved by
// orthogonal factorization instead.
constexpr double kOrthogonalBelow = 1e-9;

void check_shapes(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar, const Vector& y) {
  if (S.rows() != y.size() || Rstar.rows() != y.size()) {
    throw InvalidInput("design rows do not match the response length");
  }
  if (Rstarstar.rows() != Rstar.cols() || Rstarstar.cols() != Rstar.cols()) {
    throw InvalidInput("R** must be q x q with q = columns of R*");
  }
  if (y.size() < S.cols() + 1) throw InvalidInput("need n >= m + 1 observations");
}

}  // namespace

void LambdaGrid::validate() const {
  if (!(log10_lo < log10_hi)) throw InvalidConfig("lambda grid needs lo < hi");
  if (count < 2) throw InvalidConfig("lambda grid needs at least two points");
}

std::vector<double> LambdaGrid::values() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double e = log10_lo + (log10_hi - log10_lo) * i / (count - 1);
    out[static_cast<std::size_t>(i)] = std::pow(10.0, e);
  }
  return out;
}

PenalizedSystem::PenalizedSystem(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                                 const Vector& y)
    : m_(static_cast<std::size_t>(S.cols())), q_(static_cast<std::size_t>(Rstar.cols())), y_(y) {
  check_shapes(S, Rstar, Rstarstar, y);
  const auto m = static_cast<Eigen::Index>(m_);
  const auto q = static_cast<Eigen::Index>(q_);
  B_.resize(S.rows(), m + q);
  B_.leftCols(m) = S;
  B_.rightCols(q) = Rstar;
  gram_ = B_.transpose() * B_;
  rhs_ = B_.transpose() * y;
  penalty_ = Eigen::MatrixXd::Zero(m + q, m + q);
  penalty_.bottomRightCorner(q, q) = Rstarstar;
  if (q > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Rstarstar.eval());
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    penalty_root_ = root.asDiagonal() * eig.eigenvectors().transpose();
  }
}

// min ||y - B c||^2 + n lambda b' R** b as the stacked problem
// [B; 0 sqrt(n lambda) R**^{1/2}] c ~ [y; 0]. The hat matrix is Q1 Q1' with Q1
// the first n rows of the thin orthogonal factor.
PenalizedSystem::Solution PenalizedSystem::solve_orthogonal(double lambda, bool with_trace) const {
  const auto n = static_cast<Eigen::Index>(this->n());
  const auto m = static_cast<Eigen::Index>(m_);
  const auto q = static_cast<Eigen::Index>(q_);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + q, m + q);
  A.topRows(n) = B_;
  A.bottomRightCorner(q, q) = std::sqrt(static_cast<double>(n) * lambda) * penalty_root_;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + q);
  b.head(n) = y_;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Vector coef = qr.solve(b);
  if (!coef.allFinite()) {
    throw SingularSystem("non-finite coefficients at lambda = " + std::to_string(lambda),
                         std::numeric_limits<double>::infinity());
  }
  Solution out;
  out.alpha = coef.head(m);
  out.beta = coef.tail(q);
  out.fitted = B_ * coef;
  out.rss = (y_ - out.fitted).squaredNorm();
  const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = rdiag.size() > 0 ? rdiag.maxCoeff() : 0.0;
  const double rmin = rdiag.size() > 0 ? rdiag.minCoeff() : 0.0;
  out.condition_estimate = rmin > 0.0 ? (rmax / rmin) * (rmax / rmin)
                                      : std::numeric_limits<double>::infinity();
  if (with_trace) {
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd Q1 = qr.householderQ() * Eigen::MatrixXd::Identity(n + q, rank);
    out.trace_A = Q1.topRows(n).squaredNorm();
    out.gcv = gcv_score(out.rss, out.trace_A, this->n());
  }
  return out;
}

PenalizedSystem::Solution PenalizedSystem::solve(double lambda, bool with_trace,
                                                 bool allow_orthogonal) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be positive");
  const auto m = static_cast<Eigen::Index>(m_);
  const auto q = static_cast<Eigen::Index>(q_);
  const double nl = static_cast<double>(n()) * lambda;
  Eigen::MatrixXd system = gram_ + nl * penalty_;

  // Symmetric diagonal equilibration: the null-space and kernel columns live
  // on very different scales, and Cholesky is far less likely to break down
  // on the unit-diagonal form.
  Eigen::VectorXd equil = system.diagonal();
  for (Eigen::Index i = 0; i < equil.size(); ++i) {
    equil[i] = equil[i] > 0.0 && std::isfinite(equil[i]) ? 1.0 / std::sqrt(equil[i]) : 1.0;
  }
  system = equil.asDiagonal() * system * equil.asDiagonal();

  // Jitter is scaled per block so a huge penalty never ridges the null space.
  const double scale_null = system.topLeftCorner(m, m).trace() / static_cast<double>(m);
  const double scale_kernel = q > 0 ? system.bottomRightCorner(q, q).trace() / static_cast<double>(q) : 0.0;

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  double rcond = 0.0;
  bool ok = false;
  for (double rel = 0.0; rel <= kJitterStop * 1.0000001; rel = rel == 0.0 ? kJitterStart : rel * 10.0) {
    Eigen::MatrixXd attempt = system;
    if (rel > 0.0) {
      attempt.diagonal().head(m).array() += rel * scale_null;
      attempt.diagonal().tail(q).array() += rel * scale_kernel;
    }
    llt.compute(attempt);
    if (llt.info() == Eigen::Success) {
      rcond = llt.rcond();
      if (rcond > 0.0 && std::isfinite(rcond)) {
        jitter = rel;
        ok = true;
        break;
      }
    }
  }
  if (!ok) {
    throw SingularSystem("penalized normal equations are singular at lambda = " +
                             std::to_string(lambda),
                         rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
  }

  if (allow_orthogonal && (jitter > 0.0 || rcond < kOrthogonalBelow)) {
    Solution sol = solve_orthogonal(lambda, with_trace);
    sol.jitter = jitter;  // what the normal equations needed, for diagnostics
    return sol;
  }

  const Vector coef = equil.cwiseProduct(llt.solve(equil.cwiseProduct(rhs_)));
  if (!coef.allFinite()) {
    throw SingularSystem("non-finite coefficients at lambda = " + std::to_string(lambda),
                         1.0 / rcond);
  }
  Solution out;
  out.alpha = coef.head(m);
  out.beta = coef.tail(q);
  out.fitted = B_ * coef;
  out.rss = (y_ - out.fitted).squaredNorm();
  out.jitter = jitter;
  out.condition_estimate = 1.0 / rcond;
  if (with_trace) {
    // tr(M^-1 G) with M = E^-1 Ms E^-1 is tr(Ms^-1 E G E).
    out.trace_A = llt.solve(equil.asDiagonal() * gram_ * equil.asDiagonal()).trace();
    out.gcv = gcv_score(out.rss, out.trace_A, n());
  }
  return out;
}

double gcv_score(double rss, double trace_A, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double denom = 1.0 - trace_A / nn;
  return (rss / nn) / (denom * denom);
}

Coefficients solve_coefficients(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                                const Vector& y, double lambda) {
  const PenalizedSystem system(S, Rstar, Rstarstar, y);
  auto sol = system.solve(lambda, false);
  return Coefficients{std::move(sol.alpha), std::move(sol.beta), sol.jitter, sol.condition_estimate};
}

SmootherResult smoother_diag(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                             const Vector& y, double lambda) {
  const PenalizedSystem system(S, Rstar, Rstarstar, y);
  auto sol = system.solve(lambda, true);
  return SmootherResult{sol.trace_A, std::move(sol.fitted)};
}

double pls_objective(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                     const Vector& y, const Vector& alpha, const Vector& beta, double lambda) {
  const Vector r = y - S * alpha - Rstar * beta;
  return r.squaredNorm() / static_cast<double>(y.size()) +
         lambda * beta.dot(Rstarstar * beta);
}

namespace {

FittedModel make_model(const Dataset& data, const BasisSelection& sel, const AnovaSpec& spec,
                       PenalizedSystem::Solution&& sol, double lambda) {
  FittedModel model;
  model.spec = spec;
  model.basis_points = basis_points(data, sel);
  model.alpha = std::move(sol.alpha);
  model.beta = std::move(sol.beta);
  model.lambda = lambda;
  model.gcv_score = sol.gcv;
  model.scaler = data.scaler;
  model.diagnostics.trace_A = sol.trace_A;
  model.diagnostics.condition_estimate = sol.condition_estimate;
  model.diagnostics.jitter = sol.jitter;
  return model;
}

void check_response(const Dataset& data) {
  if (static_cast<std::size_t>(data.y.size()) != data.n()) {
    throw InvalidInput("fitting needs a response for every row");
  }
}

}  // namespace

FittedModel gcv_select(const Dataset& data, const BasisSelection& sel, const AnovaSpec& spec,
                       const LambdaGrid& grid) {
  check_response(data);
  const std::vector<double> lambdas = grid.values();
  const KernelMatrices km = assemble_matrices(data, sel, spec);
  const PenalizedSystem system(km.S, km.Rstar, km.Rstarstar, data.y);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> scores(lambdas.size(), inf);
  double last_condition = inf;
  int best = -1;
  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    try {
      scores[g] = system.solve(lambdas[g], true, false).gcv;
    } catch (const SingularSystem& e) {
      last_condition = e.condition_estimate();
      continue;
    }
    if (best < 0 || scores[g] < scores[static_cast<std::size_t>(best)]) best = static_cast<int>(g);
  }
  if (best < 0) throw SingularSystem("every lambda on the grid failed to factorize", last_condition);

  double best_log = std::log10(lambdas[static_cast<std::size_t>(best)]);
  double best_score = scores[static_cast<std::size_t>(best)];
  auto consider = [&](double log_lambda) {
    double v = inf;
    try {
      v = system.solve(std::pow(10.0, log_lambda), true, false).gcv;
    } catch (const SingularSystem&) {
    }
    if (v < best_score || (v == best_score && log_lambda < best_log)) {
      best_score = v;
      best_log = log_lambda;
    }
    return v;
  };

  // The scan and the golden-section steps use the normal equations alone;
  // only the returned model pays for the orthogonal re-solve.
  // Golden-section refinement between the neighbours of the grid minimizer.
  const auto last = static_cast<int>(lambdas.size()) - 1;
  double a = std::log10(lambdas[static_cast<std::size_t>(std::max(best - 1, 0))]);
  double b = std::log10(lambdas[static_cast<std::size_t>(std::min(best + 1, last))]);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = consider(c);
  double fd = consider(d);
  for (int iter = 1; iter < 3; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = consider(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = consider(d);
    }
  }

  const double lambda = std::pow(10.0, best_log);
  FittedModel model = make_model(data, sel, spec, system.solve(lambda), lambda);
  model.diagnostics.grid_index = best;
  return model;
}

FittedModel fit_fixed_lambda(const Dataset& data, const BasisSelection& sel,
                             const AnovaSpec& spec, double lambda) {
  check_response(data);
  const KernelMatrices km = assemble_matrices(data, sel, spec);
  const PenalizedSystem system(km.S, km.Rstar, km.Rstarstar, data.y);
  return make_model(data, sel, spec, system.solve(lambda), lambda);
}

FittedModel fit_model(const Dataset& data, const BasisSelection& sel, const AnovaSpec& spec,
                      const FitOptions& options) {
  const AnovaSpec used = options.normalize_terms ? rescale_term_weights(data, sel, spec) : spec;
  if (options.lambda) return fit_fixed_lambda(data, sel, used, *options.lambda);
  return gcv_select(data, sel, used, options.grid);
}

Vector predict_unit(const FittedModel& model, const Matrix& unit) {
  if (unit.cols() != model.basis_points.cols()) {
    throw InvalidInput("prediction data has " + std::to_string(unit.cols()) +
                       " columns, model expects " + std::to_string(model.basis_points.cols()));
  }
  if (unit.rows() == 0) return Vector(0);
  const Matrix S = null_space_design(unit, model.spec);
  const Matrix R = kernel_gram(unit, model.basis_points, model.spec);
  return S * model.alpha + R * model.beta;
}

Prediction predict(const FittedModel& model, const Matrix& raw) {
  if (raw.cols() != model.basis_points.cols()) {
    throw InvalidInput("prediction data has " + std::to_string(raw.cols()) +
                       " columns, model expects " + std::to_string(model.basis_points.cols()));
  }
  if (!raw.allFinite()) throw InvalidInput("prediction data contains a non-finite value");
  Prediction out;
  const Matrix unit = model.scaler.transform(raw, &out.clamped);
  out.values = predict_unit(model, unit);
  return out;
}

double mse(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size()) throw InvalidInput("mse: length mismatch");
  if (pred.size() == 0) throw InvalidInput("mse: empty input");
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace hbs
