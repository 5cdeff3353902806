#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hbs/basis_selection.hpp"
#include "hbs/dataset.hpp"
#include "hbs/rkhs.hpp"

namespace hbs {

/// Log-spaced smoothing parameters 10^lo .. 10^hi.
struct LambdaGrid {
  double log10_lo = -9.0;
  double log10_hi = 1.0;
  int count = 40;

  void validate() const;
  std::vector<double> values() const;
};

struct FitDiagnostics {
  double trace_A = 0.0;
  double condition_estimate = 0.0;
  double jitter = 0.0;
  /// Grid position of the GCV minimizer before refinement; -1 for fixed lambda.
  int grid_index = -1;
};

/// eta(x) = sum_k alpha_k xi_k(x) + sum_i beta_i R(x*_i, x) on scaled inputs.
struct FittedModel {
  AnovaSpec spec;
  Matrix basis_points;
  Vector alpha;
  Vector beta;
  double lambda = 0.0;
  double gcv_score = 0.0;
  Scaler scaler;
  FitDiagnostics diagnostics;
};

struct Coefficients {
  Vector alpha;
  Vector beta;
  double jitter = 0.0;
  double condition_estimate = 0.0;
};

/// Minimizer of (1/n)||y - S a - R* b||^2 + lambda b' R** b.
Coefficients solve_coefficients(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                                const Vector& y, double lambda);

struct SmootherResult {
  double trace_A = 0.0;
  Vector fitted;  ///< A(lambda) y
};

SmootherResult smoother_diag(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                             const Vector& y, double lambda);

/// Value of the penalized objective at (alpha, beta).
double pls_objective(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar,
                     const Vector& y, const Vector& alpha, const Vector& beta, double lambda);

/// Penalized normal equations [B'B + n lambda diag(0, R**)] c = B'y with
/// B = [S, R*]. B'B and B'y are formed once so each lambda costs O((m+q)^3)
/// plus one O(n(m+q)) residual pass.
class PenalizedSystem {
 public:
  PenalizedSystem(const Matrix& S, const Matrix& Rstar, const Matrix& Rstarstar, const Vector& y);

  struct Solution {
    Vector alpha;
    Vector beta;
    Vector fitted;
    double rss = 0.0;
    double trace_A = 0.0;
    double gcv = 0.0;
    double jitter = 0.0;
    double condition_estimate = 0.0;
  };

  /// Cholesky on the equilibrated normal equations, escalating a relative
  /// diagonal jitter on failure. When jitter was needed or the system is
  /// ill-conditioned the same problem is re-solved by a pivoted QR of the
  /// stacked least-squares form, so no ridge bias reaches the solution.
  /// `allow_orthogonal = false` skips that re-solve (cheap scans).
  /// Throws SingularSystem once jitter escalation is exhausted.
  Solution solve(double lambda, bool with_trace = true, bool allow_orthogonal = true) const;

  std::size_t n() const noexcept { return static_cast<std::size_t>(y_.size()); }
  std::size_t null_dim() const noexcept { return m_; }
  std::size_t basis_size() const noexcept { return q_; }

 private:
  Solution solve_orthogonal(double lambda, bool with_trace) const;

  std::size_t m_;
  std::size_t q_;
  Matrix B_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd penalty_;
  Eigen::MatrixXd penalty_root_;  ///< R**^{1/2}, rows for the stacked QR form
  Vector rhs_;
  Vector y_;
};

/// GCV V(lambda) = n^-1 ||(I - A) y||^2 / [n^-1 tr(I - A)]^2.
double gcv_score(double rss, double trace_A, std::size_t n);

/// Evaluates V over the grid, refines with three golden-section steps in
/// log10 lambda between the minimizer's neighbours, and returns the best
/// model. Ties go to the smaller lambda. Uses `spec` as given.
FittedModel gcv_select(const Dataset& data, const BasisSelection& sel, const AnovaSpec& spec,
                       const LambdaGrid& grid = {});

FittedModel fit_fixed_lambda(const Dataset& data, const BasisSelection& sel,
                             const AnovaSpec& spec, double lambda);

struct FitOptions {
  std::optional<double> lambda;  ///< fixed lambda; GCV when empty
  LambdaGrid grid;
  bool normalize_terms = true;   ///< rescale_term_weights on the basis first
};

/// Term normalization followed by GCV or a fixed-lambda solve.
FittedModel fit_model(const Dataset& data, const BasisSelection& sel, const AnovaSpec& spec,
                      const FitOptions& options = {});

struct Prediction {
  Vector values;
  std::size_t clamped = 0;  ///< scaled coordinates pulled back into [0,1]
};

/// Applies the stored scaler (clamping into the unit cube) and evaluates.
Prediction predict(const FittedModel& model, const Matrix& raw);

/// Evaluates at points already in [0,1]^d.
Vector predict_unit(const FittedModel& model, const Matrix& unit);

double mse(const Vector& pred, const Vector& truth);

}  // namespace hbs
