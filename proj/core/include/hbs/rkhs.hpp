#pragma once

// Cubic smoothing-spline ANOVA kernels on [0,1]^d.
//
// Per dimension the null space is spanned by {1, k1(x)} and the penalized
// part has kernel R1(s,t) = k2(s)k2(t) - k4(|s-t|), with k_r the scaled
// Bernoulli polynomials. Two-way interaction terms use the tensor-product
// kernel of the pair with the parametric x parametric piece left inside the
// penalized term, so the null space stays {1, k1(x_j) : j a main effect}.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hbs/basis_selection.hpp"
#include "hbs/dataset.hpp"

namespace hbs {

/// Scaled Bernoulli polynomial k_level(t) for level in {1, 2, 4}, t in [0,1].
double bernoulli_k(int level, double t);

/// R1(s, t) for s, t in [0,1].
double kernel_main(double s, double t);

struct AnovaTerm {
  int first = 0;
  int second = -1;  ///< -1 for a main effect
  bool is_interaction() const noexcept { return second >= 0; }
  friend bool operator==(const AnovaTerm&, const AnovaTerm&) = default;
};

/// Main effects, two-way interactions and one positive scale per term.
/// Terms are ordered mains first (in list order), then interactions.
struct AnovaSpec {
  int dims = 0;
  std::vector<int> main_effects;
  std::vector<std::pair<int, int>> interactions;
  std::vector<double> term_scales;

  std::size_t term_count() const noexcept { return main_effects.size() + interactions.size(); }
  AnovaTerm term(std::size_t t) const;
  /// Null-space dimension m = 1 + #main effects.
  std::size_t null_dim() const noexcept { return 1 + main_effects.size(); }
  std::string term_label(std::size_t t) const;

  /// Throws InvalidConfig on dimension, duplicate, membership or scale errors.
  void validate() const;

  static AnovaSpec additive(int dims);
  static AnovaSpec all_pairs(int dims);
};

/// theta_t times the kernel of term t between x and z.
double kernel_term(std::span<const double> x, std::span<const double> z,
                   const AnovaSpec& spec, std::size_t term);

/// Sum of kernel_term over all terms.
double kernel(std::span<const double> x, std::span<const double> z, const AnovaSpec& spec);

/// (1, k1(x_j) for each main effect j).
Vector null_space_eval(std::span<const double> x, const AnovaSpec& spec);

/// Gram matrix K(A_i, B_j) of the full kernel between row sets.
Matrix kernel_gram(const Matrix& A, const Matrix& B, const AnovaSpec& spec);

/// Null-space design with rows null_space_eval(X_i).
Matrix null_space_design(const Matrix& X, const AnovaSpec& spec);

struct KernelMatrices {
  Matrix S;       ///< n x m
  Matrix Rstar;   ///< n x q, K(x_i, x*_j)
  Matrix Rstarstar;  ///< q x q, K(x*_i, x*_j)
};

KernelMatrices assemble_matrices(const Dataset& data, const BasisSelection& sel,
                                 const AnovaSpec& spec);
KernelMatrices assemble_matrices(const Matrix& X, const Matrix& basis, const AnovaSpec& spec);

/// Sets theta_t = q / trace(unit-scale Gram of term t on the basis points), so
/// every term's Gram has unit average diagonal. Throws InvalidConfig naming a
/// term whose trace is zero or non-finite.
AnovaSpec rescale_term_weights(const Matrix& basis, const AnovaSpec& spec);
AnovaSpec rescale_term_weights(const Dataset& data, const BasisSelection& sel,
                               const AnovaSpec& spec);

}  // namespace hbs
