// Acceptance suite: one [PASS]/[FAIL] line per criterion. Exits nonzero if
// any criterion fails, unless it is named in --expected-failures; a named
// criterion that passes is also an error, so the list cannot go stale.

#include <Eigen/LU>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cli.hpp"
#include "hbs/basis_selection.hpp"
#include "hbs/error.hpp"
#include "hbs/hilbert_curve.hpp"
#include "hbs/io.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/random.hpp"
#include "hbs/rkhs.hpp"
#include "hbs/synthetic.hpp"
#include "hbs/theory.hpp"

namespace {

using namespace hbs;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- AC1

Outcome curve_bijection() {
  const auto start = Clock::now();
  std::vector<std::pair<int, int>> orders;
  for (int k = 1; k <= 12; ++k) orders.emplace_back(1, k);
  for (int k = 1; k <= 8; ++k) orders.emplace_back(2, k);
  for (int k = 1; k <= 6; ++k) orders.emplace_back(3, k);
  std::size_t failures = 0;
  std::uint64_t checked = 0;
  for (const auto& [d, k] : orders) {
    const CurveOrder order(d, k);
    std::vector<char> seen(order.cell_count(), 0);
    CellCoord prev;
    for (std::uint64_t i = 0; i < order.cell_count(); ++i) {
      const CellCoord c = decode(HilbertIndex{i}, order);
      // Mixed-radix cell id marks each cell once.
      std::uint64_t id = 0;
      for (const auto v : c.coords) id = id * order.side() + v;
      if (seen[id]++ != 0) ++failures;
      if (encode(c, order).value != i) ++failures;
      if (i > 0) {
        std::uint64_t l1 = 0;
        for (int j = 0; j < d; ++j) {
          l1 += c.coords[j] > prev.coords[j] ? c.coords[j] - prev.coords[j]
                                             : prev.coords[j] - c.coords[j];
        }
        if (l1 != 1) ++failures;
      }
      prev = c;
      ++checked;
    }
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 10.0,
          std::to_string(checked) + " indices, " + std::to_string(failures) + " failures, " +
              fmt("%.2f s (limit 10 s)", secs)};
}

// ---------------------------------------------------------------- AC2

Outcome locality() {
  const auto start = Clock::now();
  std::uint64_t pairs = 0, violations = 0;
  double worst = 0.0;
  for (int d : {2, 3}) {
    for (int k = 1; k <= 5; ++k) {
      const LocalityReport r = locality_bound_check(CurveOrder(d, k));
      pairs += r.pairs_checked;
      violations += r.violations;
      worst = std::max(worst, r.max_ratio);
    }
  }
  const double secs = seconds_since(start);
  return {violations == 0 && secs < 30.0,
          std::to_string(pairs) + " pairs, " + std::to_string(violations) +
              " violations, max ratio " + fmt("%.3f", worst) + ", " +
              fmt("%.2f s (limit 30 s)", secs)};
}

// ---------------------------------------------------------------- AC3

Outcome measure_preservation() {
  const CurveOrder order(2, 3);
  const std::size_t points = 100000;
  std::vector<double> counts(order.cell_count(), 0.0);
  CounterRng rng(derive_seed(2021, {tag("chi-square")}));
  for (std::size_t p = 0; p < points; ++p) {
    const double x[2] = {rng.uniform(), rng.uniform()};
    ++counts[point_to_index(x, order).value];
  }
  const double expected = static_cast<double>(points) / counts.size();
  double stat = 0.0;
  for (const double c : counts) stat += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double critical = boost::math::quantile(dist, 0.999);
  return {stat < critical,
          "chi2 = " + fmt("%.2f", stat) + " vs critical " + fmt("%.2f", critical) +
              " (df 63, alpha 0.001)"};
}

// ---------------------------------------------------------------- AC4

Outcome lemma_rate() {
  const auto start = Clock::now();
  ScalingStudyConfig cfg;  // D4, d = 2, phi (1,0), psi (0,1), 200 replicates
  const ScalingReport report = variance_scaling_study(cfg);
  const double secs = seconds_since(start);
  bool below_from_64 = true;
  for (const std::size_t q : cfg.q_list) {
    if (q >= 64 && !(report.row("HBS", q).mse < report.row("UBS", q).mse)) below_from_64 = false;
  }
  return {report.passed() && secs < 600.0,
          "stratified slope " + fmt("%.3f", report.stratified_slope) + " in [-2.3, -1.7], random slope " +
              fmt("%.3f", report.random_slope) + " in [-1.2, -0.8]; stratified below random for q >= 64: " +
              (below_from_64 ? "yes" : "no") + ", " + fmt("%.1f s (limit 600 s)", secs)};
}

// ---------------------------------------------------------------- AC5

Outcome full_basis_equivalence() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const std::size_t n = 20 + 2 * inst;  // 20 .. 58
    const int d = 1 + static_cast<int>(inst % 3);
    CounterRng rng(derive_seed(55, {inst}));
    Dataset data = unit_dataset(gen_design(Distribution::D1, n, d, rng), Vector());
    data.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = data.X.row(static_cast<Eigen::Index>(i));
      data.y[static_cast<Eigen::Index>(i)] = std::sin(3.0 * x.sum()) + 0.1 * rng.normal();
    }
    const AnovaSpec spec = rescale_term_weights(data, full_select(data), AnovaSpec::all_pairs(d));
    const KernelMatrices km = assemble_matrices(data, full_select(data), spec);
    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::Index m = km.S.cols();
    for (const double lambda : LambdaGrid{}.values()) {
      const Coefficients c = solve_coefficients(km.S, km.Rstar, km.Rstarstar, data.y, lambda);
      const Vector ours = km.S * c.alpha + km.Rstar * c.beta;
      // Bordered full-basis system (R + n lambda I) c + S d = y, S' c = 0.
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nn + m, nn + m);
      K.topLeftCorner(nn, nn) = km.Rstarstar;
      K.topLeftCorner(nn, nn).diagonal().array() += static_cast<double>(n) * lambda;
      K.topRightCorner(nn, m) = km.S;
      K.bottomLeftCorner(m, nn) = km.S.transpose();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn + m);
      rhs.head(nn) = data.y;
      const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
      const Vector ref = km.Rstarstar * sol.head(nn) + km.S * sol.tail(m);
      worst = std::max(worst, (ours - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && secs < 60.0,
          "max relative discrepancy " + fmt("%.3e", worst) + " over 20 instances x the 40-point default lambda grid, " +
              fmt("%.2f s (limit 60 s)", secs)};
}

// ---------------------------------------------------------------- AC6

double min_pairwise(const Dataset& data, const BasisSelection& sel) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sel.size(); ++a) {
    for (std::size_t b = a + 1; b < sel.size(); ++b) {
      best = std::min(best, (data.X.row(static_cast<Eigen::Index>(sel.indices[a])) -
                             data.X.row(static_cast<Eigen::Index>(sel.indices[b])))
                                .norm());
    }
  }
  return best;
}

// Variance of selected-point counts over the 16 order-2 curve blocks.
double block_variance(const Dataset& data, const BasisSelection& sel) {
  const CurveOrder order(2, 2);
  std::vector<double> counts(order.cell_count(), 0.0);
  for (const std::size_t i : sel.indices) {
    const double* row = data.X.row(static_cast<Eigen::Index>(i)).data();
    ++counts[point_to_index(std::span<const double>(row, 2), order).value];
  }
  const double mean = static_cast<double>(sel.size()) / counts.size();
  double v = 0.0;
  for (const double c : counts) v += (c - mean) * (c - mean);
  return v / counts.size();
}

Outcome figure3() {
  int spread_wins = 0, variance_wins = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const std::uint64_t seed = derive_seed(3, {tag("figure3"), r});
    const Dataset data = scale_to_unit_cube(gen_design(Distribution::D4, 2000, 2, seed), Vector());
    SelectionConfig h;
    h.q = 27;
    h.method = Method::HBS;
    h.seed = derive_seed(seed, {tag("HBS")});
    SelectionConfig u = h;
    u.method = Method::UBS;
    u.seed = derive_seed(seed, {tag("UBS")});
    const BasisSelection hs = hbs_select(data, h);
    const BasisSelection us = ubs_select(data, u);
    if (min_pairwise(data, hs) > min_pairwise(data, us)) ++spread_wins;
    if (block_variance(data, hs) < block_variance(data, us)) ++variance_wins;
  }
  return {spread_wins >= 80 && variance_wins >= 90,
          "larger min distance in " + std::to_string(spread_wins) +
              "/100 (need 80), lower block-count variance in " + std::to_string(variance_wins) +
              "/100 (need 90)"};
}

// ---------------------------------------------------------------- AC7

Outcome figure4() {
  const auto start = Clock::now();
  const ExperimentConfig cfg =
      experiment_config_from_json(read_text_file(HBS_TEST_CONFIG_DIR "/default_bench.json"));
  const ExperimentResult res = run_experiment(cfg, 1);
  bool ordered = true;
  std::ostringstream detail;
  detail << "D4/F1 median MSE HBS vs UBS:";
  for (const std::size_t q : cfg.q_grid) {
    const double h = median_mse(res, Method::HBS, q);
    const double u = median_mse(res, Method::UBS, q);
    if (!(h < u)) ordered = false;
    detail << " q=" << q << ' ' << fmt("%.4f", h) << (h < u ? "<" : ">=") << fmt("%.4f", u);
  }

  ExperimentConfig uni = cfg;
  uni.distribution = Distribution::D1;
  uni.q_grid = {100};
  const ExperimentResult ures = run_experiment(uni, 1);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  detail << "; D1/F1 q=100 medians:";
  for (const Method m : uni.methods) {
    const double v = median_mse(ures, m, 100);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    detail << ' ' << method_name(m) << ' ' << fmt("%.4f", v);
  }
  const bool similar = std::isfinite(lo) && hi <= 2.0 * lo;
  const double secs = seconds_since(start);
  detail << " (max/min " << fmt("%.2f", hi / lo) << ", need <= 2); " << fmt("%.1f s (limit 1200 s)", secs);
  return {ordered && similar && secs < 1200.0, detail.str()};
}

// ---------------------------------------------------------------- AC8

double fit_seconds(std::size_t n, std::uint64_t seed) {
  const Matrix raw = gen_design(Distribution::D4, n, 2, seed);
  Dataset data = scale_to_unit_cube(raw, Vector());
  data.y = eval_function(TestFunction::F1, data.X);
  CounterRng rng(seed + 1);
  for (Eigen::Index i = 0; i < data.y.size(); ++i) data.y[i] += 0.5 * rng.normal();
  const auto start = Clock::now();
  SelectionConfig sc;
  sc.q = 40;
  sc.seed = seed;
  const BasisSelection sel = hbs_select(data, sc);
  const FittedModel model = fit_model(data, sel, AnovaSpec::all_pairs(2));
  const double secs = seconds_since(start);
  if (!std::isfinite(model.lambda)) throw std::runtime_error("fit failed");
  return secs;
}

Outcome cost_scaling() {
  std::vector<double> small, large;
  for (std::uint64_t r = 0; r < 5; ++r) {
    small.push_back(fit_seconds(4000, 100 + r));
    large.push_back(fit_seconds(8000, 200 + r));
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  const double ratio = large[2] / small[2];
  return {ratio >= 1.5 && ratio <= 3.0,
          "median fit " + fmt("%.4f s", large[2]) + " (n=8000) / " + fmt("%.4f s", small[2]) +
              " (n=4000) = " + fmt("%.2f", ratio) + ", need [1.5, 3.0]"};
}

// ---------------------------------------------------------------- AC9

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hbs_acceptance_ac9";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string config = HBS_TEST_CONFIG_DIR "/default_bench.json";
  std::ostringstream out, err;
  const std::string one = (dir / "jobs1.csv").string();
  const std::string eight = (dir / "jobs8.csv").string();
  const int c1 = cli::run({"bench", "--config", config, "--out", one, "--jobs", "1"}, out, err);
  const int c8 = cli::run({"bench", "--config", config, "--out", eight, "--jobs", "8"}, out, err);
  bool same = false;
  std::size_t bytes = 0;
  if (c1 == 0 && c8 == 0) {
    const std::string a = read_text_file(one);
    same = a == read_text_file(eight);
    bytes = a.size();
  }
  fs::remove_all(dir);
  return {same, "exit codes " + std::to_string(c1) + "/" + std::to_string(c8) + ", " +
                    std::to_string(bytes) + " bytes, identical: " + (same ? "yes" : "no")};
}

// ---------------------------------------------------------------- AC10

// Both checks use the full basis (q = n = 200) so that approximation error
// does not masquerade as noise in the noiseless case.
Outcome gcv_sanity() {
  const LambdaGrid grid;
  int noise_hits = 0;
  for (int r = 0; r < 100; ++r) {
    Dataset data = unit_dataset(gen_design(Distribution::D1, 200, 2, 1000 + r), Vector());
    CounterRng rng(derive_seed(7, {static_cast<std::uint64_t>(r)}));
    data.y.resize(200);
    for (int i = 0; i < 200; ++i) data.y[i] = rng.normal();
    if (fit_model(data, full_select(data), AnovaSpec::all_pairs(2)).diagnostics.grid_index >= grid.count - 2) {
      ++noise_hits;
    }
  }
  const double mid = std::pow(10.0, 0.5 * (grid.log10_lo + grid.log10_hi));
  int smooth_hits = 0;
  for (int r = 0; r < 100; ++r) {
    Dataset data = unit_dataset(gen_design(Distribution::D1, 200, 3, 2000 + r), Vector());
    data.y = eval_function(TestFunction::F3, data.X);
    if (fit_model(data, full_select(data), AnovaSpec::all_pairs(3)).lambda < mid) ++smooth_hits;
  }
  return {noise_hits >= 90 && smooth_hits >= 90,
          "pure noise at the top two grid points in " + std::to_string(noise_hits) +
              "/100, noiseless F3 below the log-midpoint in " + std::to_string(smooth_hits) +
              "/100 (need 90 each)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> expected;
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--expected-failures" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string id; std::getline(list, id, ',');) expected.insert(id);
    } else {
      std::fprintf(stderr, "usage: hbs_acceptance [--expected-failures AC4,AC7,...]\n");
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 curve bijection and adjacency", curve_bijection},
      {"AC2 locality bound", locality},
      {"AC3 measure preservation", measure_preservation},
      {"AC4 stratified integration rate", lemma_rate},
      {"AC5 full-basis equivalence", full_basis_equivalence},
      {"AC6 basis dispersion on D4", figure3},
      {"AC7 HBS versus UBS test error", figure4},
      {"AC8 cost scaling in n", cost_scaling},
      {"AC9 bench determinism across jobs", determinism},
      {"AC10 GCV placement", gcv_sanity},
  };
  int failed = 0, unexpected = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::string id(name, std::string_view(name).find(' '));
    const bool listed = expected.count(id) > 0;
    if (!o.pass) ++failed;
    if (o.pass == listed) ++unexpected;
    std::printf("[%s] %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds_since(start),
                listed ? (o.pass ? " (listed as expected failure)" : " (expected failure)") : "");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed, %d unexpected outcome(s)\n", failed, criteria.size(),
              unexpected);
  return unexpected == 0 ? 0 : 1;
}
