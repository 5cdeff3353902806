#pragma once

// Empirical check of the stratified-subsample integration rate: with one
// basis point per non-empty curve bin, sum_j (n~_j/n) phi(x*_j) psi(x*_j) has
// squared error O(q^{-1-2/d}), against O(q^{-1}) for a simple random
// subsample of the same data.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hbs/basis_selection.hpp"
#include "hbs/dataset.hpp"
#include "hbs/synthetic.hpp"

namespace hbs {

/// phi(x) = prod_j g(nu_j, x_j), g(0, t) = 1, g(v, t) = sqrt(2) cos(pi v t).
struct EigenSurrogate {
  std::vector<int> frequencies;

  double operator()(std::span<const double> x) const;
};

/// sum_j bin_weight_j phi(x*_j) psi(x*_j).
double stratified_integral_estimate(const Dataset& data, const BasisSelection& sel,
                                    const EigenSurrogate& phi, const EigenSurrogate& psi);

/// (1/q) sum_j phi(x*_j) psi(x*_j), ignoring weights.
double subsample_mean_estimate(const Dataset& data, const BasisSelection& sel,
                               const EigenSurrogate& phi, const EigenSurrogate& psi);

/// (1/n) sum_i phi(x_i) psi(x_i).
double full_sample_mean(const Dataset& data, const EigenSurrogate& phi, const EigenSurrogate& psi);

struct ScalingStudyConfig {
  Distribution distribution = Distribution::D4;
  int dims = 2;
  EigenSurrogate phi{{1, 0}};
  EigenSurrogate psi{{0, 1}};
  std::vector<std::size_t> q_list{16, 32, 64, 128, 256, 512};
  std::size_t replicates = 200;
  std::size_t n = 100000;
  std::size_t reference_points = 10000000;
  std::uint64_t seed = 20211;
  MixtureMode mixture = MixtureMode::Mixture;
  int jobs = 1;
  double stratified_lo = -2.3;
  double stratified_hi = -1.7;
  double random_lo = -1.2;
  double random_hi = -0.8;

  void validate() const;
};

struct ScalingRow {
  std::string method;        ///< "HBS" or "UBS"
  std::size_t q = 0;
  double mean_size = 0.0;    ///< average number of points actually drawn
  double mse = 0.0;          ///< vs the replicate's full-sample mean
  double mse_reference = 0.0;  ///< vs the population reference integral
  double mean_estimate = 0.0;
  double se_estimate = 0.0;  ///< standard error of mean_estimate
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  ///< HBS rows then UBS rows, q ascending
  double stratified_slope = 0.0;
  double random_slope = 0.0;
  double reference_integral = 0.0;
  Scaler population_scaler;
  std::size_t clamped = 0;
  bool stratified_in_window = false;
  bool random_in_window = false;

  bool passed() const noexcept { return stratified_in_window && random_in_window; }
  const ScalingRow& row(const std::string& method, std::size_t q) const;
  std::string summary(const ScalingStudyConfig& cfg) const;
};

/// Min-max box of a seeded scrambled-Sobol sample of `dist`.
Scaler population_scaler(Distribution dist, int dims, std::size_t points, std::uint64_t seed,
                         MixtureMode mode = MixtureMode::Mixture);

/// Quasi-Monte Carlo value of E[phi(X) psi(X)] for X ~ dist mapped through
/// `scaler` (clamped into the unit cube).
double reference_integral(Distribution dist, int dims, const EigenSurrogate& phi,
                          const EigenSurrogate& psi, const Scaler& scaler, std::size_t points,
                          std::uint64_t seed, MixtureMode mode = MixtureMode::Mixture);

/// Ordinary least-squares slope of log(y) on log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

ScalingReport variance_scaling_study(const ScalingStudyConfig& cfg);

void write_scaling_csv(const ScalingReport& report, std::ostream& out);

}  // namespace hbs
