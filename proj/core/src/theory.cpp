#include "hbs/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hbs/error.hpp"
#include "hbs/format.hpp"
#include "hbs/parallel.hpp"
#include "hbs/sobol.hpp"

namespace hbs {

namespace {

double product_at(const Dataset& data, std::size_t row, const EigenSurrogate& phi,
                  const EigenSurrogate& psi) {
  const std::span<const double> x(data.X.row(static_cast<Eigen::Index>(row)).data(), data.d());
  return phi(x) * psi(x);
}

void check_surrogates(const Dataset& data, const EigenSurrogate& phi, const EigenSurrogate& psi) {
  if (phi.frequencies.size() != data.d() || psi.frequencies.size() != data.d()) {
    throw InvalidInput("surrogate frequencies must have one entry per dimension");
  }
}

}  // namespace

double EigenSurrogate::operator()(std::span<const double> x) const {
  double value = 1.0;
  for (std::size_t j = 0; j < frequencies.size(); ++j) {
    if (frequencies[j] != 0) {
      value *= std::numbers::sqrt2 * std::cos(std::numbers::pi * frequencies[j] * x[j]);
    }
  }
  return value;
}

double stratified_integral_estimate(const Dataset& data, const BasisSelection& sel,
                                    const EigenSurrogate& phi, const EigenSurrogate& psi) {
  check_surrogates(data, phi, psi);
  if (sel.bin_weight.size() != sel.indices.size()) {
    throw InvalidInput("selection weights and indices differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (sel.indices[j] >= data.n()) throw InvalidInput("selection index out of range");
    total += sel.bin_weight[j] * product_at(data, sel.indices[j], phi, psi);
  }
  return total;
}

double subsample_mean_estimate(const Dataset& data, const BasisSelection& sel,
                               const EigenSurrogate& phi, const EigenSurrogate& psi) {
  check_surrogates(data, phi, psi);
  if (sel.size() == 0) throw InvalidInput("empty selection");
  double total = 0.0;
  for (const std::size_t i : sel.indices) total += product_at(data, i, phi, psi);
  return total / static_cast<double>(sel.size());
}

double full_sample_mean(const Dataset& data, const EigenSurrogate& phi, const EigenSurrogate& psi) {
  check_surrogates(data, phi, psi);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) total += product_at(data, i, phi, psi);
  return total / static_cast<double>(data.n());
}

void ScalingStudyConfig::validate() const {
  if (dims < 1) throw InvalidConfig("study dimension must be positive");
  if (static_cast<int>(phi.frequencies.size()) != dims ||
      static_cast<int>(psi.frequencies.size()) != dims) {
    throw InvalidConfig("surrogate frequencies must have one entry per dimension");
  }
  if (q_list.size() < 2) throw InvalidConfig("need at least two q values for a slope");
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    if (q_list[i] < 1 || q_list[i] > n) throw InvalidConfig("q values must lie in [1, n]");
    if (i > 0 && q_list[i] <= q_list[i - 1]) throw InvalidConfig("q_list must be strictly increasing");
  }
  if (replicates < 2) throw InvalidConfig("need at least two replicates");
  if (reference_points < 1) throw InvalidConfig("reference_points must be positive");
}

const ScalingRow& ScalingReport::row(const std::string& method, std::size_t q) const {
  for (const auto& r : rows) {
    if (r.method == method && r.q == q) return r;
  }
  throw InvalidInput("no scaling row for " + method + " at q = " + std::to_string(q));
}

std::string ScalingReport::summary(const ScalingStudyConfig& cfg) const {
  std::ostringstream out;
  out << (passed() ? "PASS" : "FAIL") << " stratified slope " << format_double(stratified_slope)
      << " in [" << cfg.stratified_lo << ", " << cfg.stratified_hi << "]: "
      << (stratified_in_window ? "yes" : "no") << "; random slope "
      << format_double(random_slope) << " in [" << cfg.random_lo << ", " << cfg.random_hi
      << "]: " << (random_in_window ? "yes" : "no");
  return out.str();
}

Scaler population_scaler(Distribution dist, int dims, std::size_t points, std::uint64_t seed,
                         MixtureMode mode) {
  const int ud = uniform_dims_needed(dist, dims, mode);
  ScrambledSobol sobol(ud, seed);
  std::vector<double> u(static_cast<std::size_t>(ud)), x(static_cast<std::size_t>(dims));
  Scaler s;
  s.lower.assign(static_cast<std::size_t>(dims), std::numeric_limits<double>::infinity());
  s.upper.assign(static_cast<std::size_t>(dims), -std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < points; ++p) {
    sobol.next(u.data());
    design_from_uniform(dist, dims, u.data(), x.data(), mode);
    for (int j = 0; j < dims; ++j) {
      s.lower[j] = std::min(s.lower[j], x[j]);
      s.upper[j] = std::max(s.upper[j], x[j]);
    }
  }
  return s;
}

double reference_integral(Distribution dist, int dims, const EigenSurrogate& phi,
                          const EigenSurrogate& psi, const Scaler& scaler, std::size_t points,
                          std::uint64_t seed, MixtureMode mode) {
  const int ud = uniform_dims_needed(dist, dims, mode);
  ScrambledSobol sobol(ud, seed);
  std::vector<double> u(static_cast<std::size_t>(ud)), x(static_cast<std::size_t>(dims));
  double total = 0.0;
  for (std::size_t p = 0; p < points; ++p) {
    sobol.next(u.data());
    design_from_uniform(dist, dims, u.data(), x.data(), mode);
    for (int j = 0; j < dims; ++j) x[j] = std::clamp(scaler.apply(j, x[j]), 0.0, 1.0);
    total += phi(x) * psi(x);
  }
  return total / static_cast<double>(points);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ScalingReport variance_scaling_study(const ScalingStudyConfig& cfg) {
  cfg.validate();
  ScalingReport report;
  const std::uint64_t qmc_seed = derive_seed(cfg.seed, {tag("reference")});
  report.population_scaler =
      population_scaler(cfg.distribution, cfg.dims, cfg.reference_points, qmc_seed, cfg.mixture);
  report.reference_integral = reference_integral(cfg.distribution, cfg.dims, cfg.phi, cfg.psi,
                                                 report.population_scaler, cfg.reference_points,
                                                 qmc_seed, cfg.mixture);

  const std::size_t nq = cfg.q_list.size();
  // [replicate][q] -> (sample mean, hbs estimate, hbs size, ubs estimate)
  struct Draw {
    double target, hbs, hbs_size, ubs;
  };
  std::vector<std::vector<Draw>> draws(cfg.replicates, std::vector<Draw>(nq));
  std::vector<std::size_t> clamped(cfg.replicates, 0);

  parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, {tag("theory-replicate"), r});
    const Matrix raw = gen_design(cfg.distribution, cfg.n, cfg.dims, rep_seed, cfg.mixture);
    Dataset data;
    data.X = report.population_scaler.transform(raw, &clamped[r]);
    data.scaler = report.population_scaler;
    const double target = full_sample_mean(data, cfg.phi, cfg.psi);

    for (std::size_t iq = 0; iq < nq; ++iq) {
      const std::size_t q = cfg.q_list[iq];
      SelectionConfig sc;
      sc.bins = q;
      sc.curve_order = default_curve_order(q, data.d());
      // One point from every non-empty bin.
      const auto bin_of = hilbert_bins(data.X, q, *sc.curve_order);
      std::vector<char> seen(q, 0);
      std::size_t nonempty = 0;
      for (const std::size_t b : bin_of) {
        nonempty += seen[b] ? 0 : 1;
        seen[b] = 1;
      }
      sc.q = nonempty;
      sc.method = Method::HBS;
      sc.seed = derive_seed(rep_seed, {tag("HBS"), q});
      const BasisSelection hbs = hbs_select(data, sc);

      SelectionConfig uc;
      uc.q = q;
      uc.method = Method::UBS;
      uc.seed = derive_seed(rep_seed, {tag("UBS"), q});
      const BasisSelection ubs = ubs_select(data, uc);

      draws[r][iq] = Draw{target, stratified_integral_estimate(data, hbs, cfg.phi, cfg.psi),
                          static_cast<double>(hbs.size()),
                          subsample_mean_estimate(data, ubs, cfg.phi, cfg.psi)};
    }
  });

  for (const std::size_t c : clamped) report.clamped += c;

  auto summarize = [&](const std::string& method, bool stratified) {
    std::vector<double> mses;
    for (std::size_t iq = 0; iq < nq; ++iq) {
      ScalingRow row;
      row.method = method;
      row.q = cfg.q_list[iq];
      double sum = 0.0, sum_sq = 0.0, err = 0.0, err_ref = 0.0, size = 0.0;
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        const Draw& dr = draws[r][iq];
        const double est = stratified ? dr.hbs : dr.ubs;
        sum += est;
        sum_sq += est * est;
        err += (est - dr.target) * (est - dr.target);
        err_ref += (est - report.reference_integral) * (est - report.reference_integral);
        size += stratified ? dr.hbs_size : static_cast<double>(row.q);
      }
      const auto reps = static_cast<double>(cfg.replicates);
      row.mean_size = size / reps;
      row.mse = err / reps;
      row.mse_reference = err_ref / reps;
      row.mean_estimate = sum / reps;
      const double var = std::max(0.0, (sum_sq - reps * row.mean_estimate * row.mean_estimate) / (reps - 1));
      row.se_estimate = std::sqrt(var / reps);
      mses.push_back(row.mse);
      report.rows.push_back(row);
    }
    std::vector<double> qd(cfg.q_list.begin(), cfg.q_list.end());
    return log_log_slope(qd, mses);
  };
  report.stratified_slope = summarize("HBS", true);
  report.random_slope = summarize("UBS", false);
  report.stratified_in_window =
      report.stratified_slope >= cfg.stratified_lo && report.stratified_slope <= cfg.stratified_hi;
  report.random_in_window =
      report.random_slope >= cfg.random_lo && report.random_slope <= cfg.random_hi;
  return report;
}

void write_scaling_csv(const ScalingReport& report, std::ostream& out) {
  out << "method,q,mean_size,mse,mse_reference,mean_estimate,se_estimate\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << r.q << ',' << format_double(r.mean_size) << ','
        << format_double(r.mse) << ',' << format_double(r.mse_reference) << ','
        << format_double(r.mean_estimate) << ',' << format_double(r.se_estimate) << '\n';
  }
}

}  // namespace hbs
