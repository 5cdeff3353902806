#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hbs/basis_selection.hpp"
#include "hbs/dataset.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/random.hpp"

namespace hbs {

/// D1 uniform, D2 mixture of shifted t(10), D3 AR(1) Gaussian with rho 0.9,
/// D4 banana.
enum class Distribution { D1, D2, D3, D4 };
enum class TestFunction { F1, F2, F3, F4 };

/// How D2 combines t(10,-5) and t(10,5): an equal-weight mixture, or the
/// average of one draw from each.
enum class MixtureMode { Mixture, Average };

std::string_view distribution_name(Distribution dist) noexcept;
Distribution parse_distribution(std::string_view name);
std::string_view function_name(TestFunction fn) noexcept;
TestFunction parse_function(std::string_view name);
int function_dims(TestFunction fn) noexcept;

/// Raw (unscaled) n x d sample.
Matrix gen_design(Distribution dist, std::size_t n, int d, std::uint64_t seed,
                  MixtureMode mode = MixtureMode::Mixture);
Matrix gen_design(Distribution dist, std::size_t n, int d, CounterRng& rng,
                  MixtureMode mode = MixtureMode::Mixture);

/// Maps a point u of (0,1)^{k} to a draw from `dist` by inverse transforms;
/// k = d for D1, D3, D4 and 2d for D2 mixtures. Used for quasi-Monte Carlo.
void design_from_uniform(Distribution dist, int d, const double* u, double* out,
                         MixtureMode mode = MixtureMode::Mixture);
int uniform_dims_needed(Distribution dist, int d, MixtureMode mode = MixtureMode::Mixture) noexcept;

double eval_function(TestFunction fn, std::span<const double> x);
Vector eval_function(TestFunction fn, const Matrix& X);

/// sigma = sqrt(var(eta(X)) / snr) over `draws` scaled design points.
double calibrate_noise(TestFunction fn, Distribution dist, double snr, std::uint64_t seed,
                       std::size_t draws = 100000, MixtureMode mode = MixtureMode::Mixture);

struct ExperimentConfig {
  Distribution distribution = Distribution::D4;
  TestFunction function = TestFunction::F1;
  std::size_t n = 2000;
  std::optional<std::size_t> n_test;  ///< defaults to n
  std::vector<std::size_t> q_grid{20, 40, 60, 80, 100};
  std::vector<Method> methods{Method::HBS, Method::UBS, Method::ABS, Method::SBS};
  std::size_t replicates = 100;
  double snr = 2.0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> bins;  ///< HBS bin count; defaults to q
  std::size_t full_cap = 1000;      ///< FULL is skipped above this n
  bool record_timing = true;
  MixtureMode mixture = MixtureMode::Mixture;
  LambdaGrid grid;

  std::size_t test_size() const noexcept { return n_test.value_or(n); }
  /// Throws InvalidConfig listing every problem found.
  void validate() const;
};

struct ExperimentRow {
  Distribution distribution = Distribution::D1;
  TestFunction function = TestFunction::F1;
  Method method = Method::HBS;
  std::size_t q = 0;
  std::size_t replicate = 0;
  double mse = 0.0;
  double fit_seconds = 0.0;
  double lambda = 0.0;
  double cond5 = 0.0;
  bool ok = true;
  std::string error;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  double sigma = 0.0;
};

/// Replicates run as independent tasks on `jobs` threads; rows are ordered
/// by (method as listed, q ascending, replicate) whatever the schedule.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

inline constexpr std::string_view kResultsHeader =
    "distribution,function,method,q,replicate,mse,fit_seconds,lambda,cond5";

/// CSV with kResultsHeader. Failed cells print NA for mse and lambda; with
/// timing off fit_seconds prints NA.
void write_results_csv(const ExperimentResult& result, std::ostream& out, bool timing);

/// Median MSE of successful rows for (method, q); NaN when none.
double median_mse(const ExperimentResult& result, Method method, std::size_t q);

}  // namespace hbs
