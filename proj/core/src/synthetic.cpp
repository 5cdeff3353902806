#include "hbs/synthetic.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hbs/error.hpp"
#include "hbs/format.hpp"
#include "hbs/parallel.hpp"

namespace hbs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRho = 0.9;
constexpr double kBanana = 1.2;
constexpr int kTDof = 10;
constexpr double kTShift = 5.0;

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void check_dims(int d) {
  if (d < 1 || d > 16) throw InvalidInput("design dimension must be in [1, 16]");
}

}  // namespace

std::string_view distribution_name(Distribution dist) noexcept {
  switch (dist) {
    case Distribution::D1: return "D1";
    case Distribution::D2: return "D2";
    case Distribution::D3: return "D3";
    case Distribution::D4: return "D4";
  }
  return "?";
}

Distribution parse_distribution(std::string_view name) {
  const std::string u = upper(name);
  for (auto d : {Distribution::D1, Distribution::D2, Distribution::D3, Distribution::D4}) {
    if (u == distribution_name(d)) return d;
  }
  throw InvalidConfig("unknown distribution '" + std::string(name) + "'");
}

std::string_view function_name(TestFunction fn) noexcept {
  switch (fn) {
    case TestFunction::F1: return "F1";
    case TestFunction::F2: return "F2";
    case TestFunction::F3: return "F3";
    case TestFunction::F4: return "F4";
  }
  return "?";
}

TestFunction parse_function(std::string_view name) {
  const std::string u = upper(name);
  for (auto f : {TestFunction::F1, TestFunction::F2, TestFunction::F3, TestFunction::F4}) {
    if (u == function_name(f)) return f;
  }
  throw InvalidConfig("unknown regression function '" + std::string(name) + "'");
}

int function_dims(TestFunction fn) noexcept {
  switch (fn) {
    case TestFunction::F1:
    case TestFunction::F2: return 2;
    case TestFunction::F3: return 3;
    case TestFunction::F4: return 4;
  }
  return 0;
}

Matrix gen_design(Distribution dist, std::size_t n, int d, std::uint64_t seed, MixtureMode mode) {
  CounterRng rng(seed);
  return gen_design(dist, n, d, rng, mode);
}

Matrix gen_design(Distribution dist, std::size_t n, int d, CounterRng& rng, MixtureMode mode) {
  check_dims(d);
  Matrix X(static_cast<Eigen::Index>(n), d);
  const double innovation = std::sqrt(1.0 - kRho * kRho);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    switch (dist) {
      case Distribution::D1:
        for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
        break;
      case Distribution::D2:
        for (int j = 0; j < d; ++j) {
          if (mode == MixtureMode::Mixture) {
            const double loc = rng.uniform() < 0.5 ? -kTShift : kTShift;
            X(i, j) = loc + rng.student_t(kTDof);
          } else {
            const double a = rng.student_t(kTDof) - kTShift;
            const double b = rng.student_t(kTDof) + kTShift;
            X(i, j) = 0.5 * (a + b);
          }
        }
        break;
      case Distribution::D3:
        // Stationary AR(1) has covariance rho^{|i-j|}.
        X(i, 0) = rng.normal();
        for (int j = 1; j < d; ++j) X(i, j) = kRho * X(i, j - 1) + innovation * rng.normal();
        break;
      case Distribution::D4: {
        const double z1 = rng.normal();
        X(i, 0) = z1;
        for (int j = 1; j < d; ++j) X(i, j) = rng.normal() + z1 * z1 / kBanana;
        break;
      }
    }
  }
  return X;
}

int uniform_dims_needed(Distribution dist, int d, MixtureMode) noexcept {
  return dist == Distribution::D2 ? 2 * d : d;
}

void design_from_uniform(Distribution dist, int d, const double* u, double* out, MixtureMode mode) {
  static const boost::math::normal_distribution<double> gauss;
  static const boost::math::students_t_distribution<double> student(kTDof);
  auto clip = [](double p) { return std::clamp(p, 0x1.0p-53, 1.0 - 0x1.0p-53); };
  switch (dist) {
    case Distribution::D1:
      for (int j = 0; j < d; ++j) out[j] = u[j];
      break;
    case Distribution::D2:
      for (int j = 0; j < d; ++j) {
        const double t = boost::math::quantile(student, clip(u[2 * j + 1]));
        if (mode == MixtureMode::Mixture) {
          out[j] = (u[2 * j] < 0.5 ? -kTShift : kTShift) + t;
        } else {
          out[j] = 0.5 * (boost::math::quantile(student, clip(u[2 * j])) + t);
        }
      }
      break;
    case Distribution::D3: {
      const double innovation = std::sqrt(1.0 - kRho * kRho);
      out[0] = boost::math::quantile(gauss, clip(u[0]));
      for (int j = 1; j < d; ++j) {
        out[j] = kRho * out[j - 1] + innovation * boost::math::quantile(gauss, clip(u[j]));
      }
      break;
    }
    case Distribution::D4: {
      const double z1 = boost::math::quantile(gauss, clip(u[0]));
      out[0] = z1;
      for (int j = 1; j < d; ++j) {
        out[j] = boost::math::quantile(gauss, clip(u[j])) + z1 * z1 / kBanana;
      }
      break;
    }
  }
}

double eval_function(TestFunction fn, std::span<const double> x) {
  if (static_cast<int>(x.size()) != function_dims(fn)) {
    throw InvalidInput(std::string(function_name(fn)) + " takes " +
                       std::to_string(function_dims(fn)) + " coordinates, got " +
                       std::to_string(x.size()));
  }
  switch (fn) {
    case TestFunction::F1:
      return std::sin(10.0 / (x[0] + x[1] + 0.15));
    case TestFunction::F2: {
      constexpr double s1 = 0.1;
      constexpr double s2 = 0.2;
      const double height = 0.75 / (kPi * s1 * s2);
      auto bump = [&](double c1, double c2) {
        const double a = (x[0] - c1) / s1;
        const double b = (x[1] - c2) / s2;
        return height * std::exp(-a * a - b * b);
      };
      return bump(0.2, 0.3) + bump(0.7, 0.5);
    }
    case TestFunction::F3:
      return std::sin(kPi * (x[0] + x[1] + x[2]) / 3.0) - x[0] - x[1] * x[1];
    case TestFunction::F4: {
      const double s3 = std::sin(10.0 * kPi * x[2]);
      const double t = x[3];
      const double periodic = 0.1 * std::sin(2 * kPi * t) + 0.2 * std::cos(4 * kPi * t) +
                              0.3 * std::pow(std::sin(6 * kPi * t), 2) +
                              0.4 * std::pow(std::cos(8 * kPi * t), 3) +
                              0.5 * std::pow(std::sin(10 * kPi * t), 3);
      const double c = 2.0 * x[1] - 1.0;
      return x[0] + c * c / 2.0 + (s3 / (2.0 - s3)) / 3.0 + periodic / 4.0;
    }
  }
  return 0.0;
}

Vector eval_function(TestFunction fn, const Matrix& X) {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[i] = eval_function(fn, std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())));
  }
  return out;
}

double calibrate_noise(TestFunction fn, Distribution dist, double snr, std::uint64_t seed,
                       std::size_t draws, MixtureMode mode) {
  if (!(snr > 0.0)) throw InvalidConfig("signal-to-noise ratio must be positive");
  if (draws < 2) throw InvalidConfig("noise calibration needs at least two draws");
  const Matrix raw = gen_design(dist, draws, function_dims(fn), seed, mode);
  const Dataset data = scale_to_unit_cube(raw, Vector());
  const Vector eta = eval_function(fn, data.X);
  const double mean = eta.mean();
  const double var = (eta.array() - mean).square().sum() / static_cast<double>(draws - 1);
  if (!(var > 0.0)) throw InvalidConfig("regression function is constant on the design");
  return std::sqrt(var / snr);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  if (n < 2) problems.emplace_back("n must be at least 2");
  if (test_size() < 1) problems.emplace_back("n_test must be positive");
  if (replicates < 1) problems.emplace_back("replicates must be positive");
  if (!(snr > 0.0)) problems.emplace_back("snr must be positive");
  if (methods.empty()) problems.emplace_back("methods must not be empty");
  bool needs_q = false;
  for (Method m : methods) needs_q |= m != Method::Full;
  if (needs_q && q_grid.empty()) problems.emplace_back("q_grid must not be empty");
  for (std::size_t q : q_grid) {
    if (q < 1 || q > n) problems.push_back("q = " + std::to_string(q) + " not in [1, n]");
  }
  if (bins && *bins < 1) problems.emplace_back("bins must be positive");
  try {
    grid.validate();
  } catch (const InvalidConfig& e) {
    problems.emplace_back(e.what());
  }
  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidConfig(msg);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const int d = function_dims(cfg.function);
  const AnovaSpec spec = AnovaSpec::all_pairs(d);

  ExperimentResult result;
  result.sigma = calibrate_noise(cfg.function, cfg.distribution, cfg.snr,
                                 derive_seed(cfg.seed, {tag("calibrate")}), 100000, cfg.mixture);

  std::vector<std::size_t> qs = cfg.q_grid;
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

  // Cells of one replicate, in output order.
  struct Cell {
    Method method;
    std::size_t q;
  };
  std::vector<Cell> cells;
  for (Method m : cfg.methods) {
    if (m == Method::Full) {
      if (cfg.n <= cfg.full_cap) cells.push_back({m, cfg.n});
      continue;
    }
    for (std::size_t q : qs) cells.push_back({m, q});
  }

  std::vector<std::vector<ExperimentRow>> per_rep(cfg.replicates);
  parallel_for(cfg.replicates, jobs, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, {tag("replicate"), r});
    const Matrix train_raw =
        gen_design(cfg.distribution, cfg.n, d, derive_seed(rep_seed, {tag("train")}), cfg.mixture);
    const Matrix test_raw = gen_design(cfg.distribution, cfg.test_size(), d,
                                       derive_seed(rep_seed, {tag("test")}), cfg.mixture);
    Dataset train = scale_to_unit_cube(train_raw, Vector());
    const Vector eta_train = eval_function(cfg.function, train.X);
    CounterRng noise(derive_seed(rep_seed, {tag("noise")}));
    train.y.resize(eta_train.size());
    for (Eigen::Index i = 0; i < eta_train.size(); ++i) {
      train.y[i] = eta_train[i] + result.sigma * noise.normal();
    }
    // Test points outside the training box are clamped into it; truth and
    // prediction are both evaluated at the clamped point.
    const Matrix test_unit = train.scaler.transform(test_raw);
    const Vector eta_test = eval_function(cfg.function, test_unit);

    auto& rows = per_rep[r];
    for (const Cell& cell : cells) {
      ExperimentRow row;
      row.distribution = cfg.distribution;
      row.function = cfg.function;
      row.method = cell.method;
      row.q = cell.q;
      row.replicate = r;
      try {
        SelectionConfig sc;
        sc.q = cell.q;
        sc.bins = cfg.bins;
        sc.method = cell.method;
        sc.seed = derive_seed(rep_seed, {tag("select"), tag(method_name(cell.method))});
        row.cond5 = condition5_diagnostic(train, sc);
        const auto start = std::chrono::steady_clock::now();
        const BasisSelection sel = select_basis(train, sc);
        FitOptions options;
        options.grid = cfg.grid;
        const FittedModel model = fit_model(train, sel, spec, options);
        const auto stop = std::chrono::steady_clock::now();
        row.fit_seconds = std::chrono::duration<double>(stop - start).count();
        row.lambda = model.lambda;
        row.mse = mse(predict_unit(model, test_unit), eta_test);
      } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
        row.mse = std::nan("");
        row.lambda = std::nan("");
      }
      rows.push_back(std::move(row));
    }
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) result.rows.push_back(per_rep[r][c]);
  }
  return result;
}

void write_results_csv(const ExperimentResult& result, std::ostream& out, bool timing) {
  out << kResultsHeader << '\n';
  for (const auto& row : result.rows) {
    out << distribution_name(row.distribution) << ',' << function_name(row.function) << ','
        << method_name(row.method) << ',' << row.q << ',' << row.replicate << ','
        << (row.ok ? format_double(row.mse) : "NA") << ','
        << (timing ? format_double(row.fit_seconds) : "NA") << ','
        << (row.ok ? format_double(row.lambda) : "NA") << ',' << format_double(row.cond5) << '\n';
  }
}

double median_mse(const ExperimentResult& result, Method method, std::size_t q) {
  std::vector<double> values;
  for (const auto& row : result.rows) {
    if (row.ok && row.method == method && row.q == q) values.push_back(row.mse);
  }
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace hbs
