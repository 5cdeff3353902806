#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hbs/error.hpp"
#include "hbs/theory.hpp"

namespace hbs {
namespace {

Dataset uniform_data(std::size_t n, int d, std::uint64_t seed) {
  return unit_dataset(gen_design(Distribution::D1, n, d, seed), Vector());
}

TEST(Surrogate, Values) {
  const EigenSurrogate one{{0, 0}};
  const EigenSurrogate phi{{1, 0}};
  const EigenSurrogate psi{{0, 2}};
  const std::vector<double> x{0.25, 0.125};
  EXPECT_DOUBLE_EQ(one(x), 1.0);
  EXPECT_NEAR(phi(x), std::sqrt(2.0) * std::cos(std::numbers::pi * 0.25), 1e-15);
  EXPECT_NEAR(psi(x), std::sqrt(2.0) * std::cos(std::numbers::pi * 0.25), 1e-15);
  EXPECT_NEAR(phi(std::vector<double>{0.5, 0.9}), 0.0, 1e-15);
}

TEST(LogLogSlope, ExactPowerLaw) {
  const std::vector<double> q{16, 32, 64, 128};
  std::vector<double> y;
  for (const double v : q) y.push_back(3.0 * std::pow(v, -2.0));
  EXPECT_NEAR(log_log_slope(q, y), -2.0, 1e-12);
  const std::vector<double> short_x{1.0};
  EXPECT_THROW(log_log_slope(short_x, short_x), InvalidInput);
}

TEST(StratifiedEstimate, ConstantIntegrandGivesOne) {
  const Dataset data = uniform_data(500, 2, 3);
  SelectionConfig cfg;
  cfg.q = 37;
  cfg.seed = 9;
  const BasisSelection sel = hbs_select(data, cfg);
  const EigenSurrogate one{{0, 0}};
  EXPECT_NEAR(stratified_integral_estimate(data, sel, one, one), 1.0, 1e-12);
}

TEST(StratifiedEstimate, FullSelectionIsSampleMean) {
  const Dataset data = uniform_data(200, 2, 5);
  SelectionConfig cfg;
  cfg.q = data.n();
  cfg.seed = 1;
  const BasisSelection sel = hbs_select(data, cfg);
  ASSERT_EQ(sel.size(), data.n());
  const EigenSurrogate phi{{1, 0}}, psi{{1, 1}};
  EXPECT_NEAR(stratified_integral_estimate(data, sel, phi, psi), full_sample_mean(data, phi, psi),
              1e-12);
}

TEST(StratifiedEstimate, UnbiasedForUniformDesign) {
  // E[2 cos^2(pi x)] = 1 under the uniform law.
  const EigenSurrogate phi{{1, 0}};
  const std::size_t reps = 500;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const Dataset data = uniform_data(400, 2, 1000 + r);
    SelectionConfig cfg;
    cfg.q = 20;
    cfg.seed = r;
    const double est = stratified_integral_estimate(data, hbs_select(data, cfg), phi, phi);
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * se);
}

TEST(StratifiedEstimate, ShapeErrors) {
  const Dataset data = uniform_data(50, 2, 1);
  BasisSelection sel;
  sel.indices = {1, 2};
  sel.bin_weight = {0.5};
  const EigenSurrogate phi{{1, 0}};
  EXPECT_THROW(stratified_integral_estimate(data, sel, phi, phi), InvalidInput);
  const EigenSurrogate wrong{{1}};
  sel.bin_weight = {0.5, 0.5};
  EXPECT_THROW(stratified_integral_estimate(data, sel, wrong, phi), InvalidInput);
}

TEST(ScalingStudy, ValidateRejectsBadLists) {
  ScalingStudyConfig cfg;
  cfg.q_list = {16};
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.q_list = {32, 16};
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.q_list = {16, 32};
  cfg.dims = 3;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(ScalingStudy, SmallRunShapes) {
  ScalingStudyConfig cfg;
  cfg.distribution = Distribution::D1;
  cfg.q_list = {8, 16, 32, 64};
  cfg.replicates = 40;
  cfg.n = 4000;
  cfg.reference_points = 1 << 14;
  cfg.seed = 7;
  const ScalingReport report = variance_scaling_study(cfg);
  ASSERT_EQ(report.rows.size(), cfg.q_list.size() * 2);
  EXPECT_EQ(report.rows.front().method, "HBS");
  EXPECT_EQ(report.rows.back().method, "UBS");
  EXPECT_LT(report.stratified_slope, 0.0);
  EXPECT_LT(report.random_slope, 0.0);
  EXPECT_LT(report.stratified_slope, report.random_slope);
  EXPECT_NEAR(report.reference_integral, 0.0, 1e-2);
  for (const auto& row : report.rows) {
    if (row.method == "UBS") {
      EXPECT_DOUBLE_EQ(row.mean_size, static_cast<double>(row.q));
    } else {
      EXPECT_LE(row.mean_size, static_cast<double>(row.q));
    }
  }
  const std::string summary = report.summary(cfg);
  EXPECT_TRUE(summary.starts_with("PASS") || summary.starts_with("FAIL"));

  std::ostringstream csv;
  write_scaling_csv(report, csv);
  std::size_t lines = 0;
  for (const char c : csv.str()) lines += c == '\n';
  EXPECT_EQ(lines, report.rows.size() + 1);

  cfg.jobs = 3;
  const ScalingReport threaded = variance_scaling_study(cfg);
  EXPECT_EQ(threaded.stratified_slope, report.stratified_slope);
  EXPECT_EQ(threaded.random_slope, report.random_slope);
}

}  // namespace
}  // namespace hbs
