#include "hbs/basis_selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hbs/error.hpp"
#include "hbs/hilbert_curve.hpp"
#include "hbs/random.hpp"
#include "hbs/sobol.hpp"

namespace hbs {

__extension__ typedef unsigned __int128 u128;


namespace {

void check_common(const Dataset& data, const SelectionConfig& cfg) {
  if (data.n() == 0 || data.d() == 0) throw InvalidInput("empty dataset");
  if (cfg.q < 1) throw InvalidConfig("q must be at least 1");
  if (cfg.q > data.n()) {
    throw InvalidConfig("q = " + std::to_string(cfg.q) + " exceeds n = " +
                        std::to_string(data.n()));
  }
}

int resolve_order(const Dataset& data, const SelectionConfig& cfg) {
  return cfg.curve_order.value_or(default_curve_order(cfg.bin_count(), data.d()));
}

// Members of each stratum in ascending row order.
std::vector<std::vector<std::size_t>> group_rows(const std::vector<std::size_t>& stratum_of,
                                                 std::size_t strata) {
  std::vector<std::vector<std::size_t>> members(strata);
  for (std::size_t i = 0; i < stratum_of.size(); ++i) members[stratum_of[i]].push_back(i);
  return members;
}

BasisSelection stratified_draw(const std::vector<std::vector<std::size_t>>& members,
                               std::size_t n, std::size_t q, std::uint64_t seed,
                               bool population_weights) {
  std::vector<std::size_t> populations(members.size());
  for (std::size_t s = 0; s < members.size(); ++s) populations[s] = members[s].size();

  BasisSelection sel;
  const std::vector<std::size_t> quota = allocate_quota(populations, q, &sel.redistributed);
  sel.nonempty_bins = static_cast<std::size_t>(
      std::count_if(populations.begin(), populations.end(), [](auto p) { return p > 0; }));

  CounterRng rng(seed);
  sel.indices.reserve(q);
  sel.bin_weight.reserve(q);
  sel.stratum.reserve(q);
  for (std::size_t s = 0; s < members.size(); ++s) {
    if (quota[s] == 0) continue;
    const auto picks = sample_without_replacement(members[s], quota[s], rng);
    const double weight =
        population_weights
            ? static_cast<double>(populations[s]) /
                  (static_cast<double>(n) * static_cast<double>(quota[s]))
            : 1.0 / static_cast<double>(q);
    for (const std::size_t row : picks) {
      sel.indices.push_back(row);
      sel.bin_weight.push_back(weight);
      sel.stratum.push_back(s);
    }
  }
  return sel;
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::HBS: return "HBS";
    case Method::UBS: return "UBS";
    case Method::ABS: return "ABS";
    case Method::SBS: return "SBS";
    case Method::Full: return "FULL";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : {Method::HBS, Method::UBS, Method::ABS, Method::SBS, Method::Full}) {
    if (upper == method_name(m)) return m;
  }
  throw InvalidConfig("unknown basis selection method '" + std::string(name) + "'");
}

int default_curve_order(std::size_t bins, std::size_t dims) {
  if (dims < 1) throw InvalidInput("dimension must be positive");
  const double log2c = bins > 1 ? std::log2(static_cast<double>(bins)) : 0.0;
  const int k = std::max(static_cast<int>(std::ceil(log2c / static_cast<double>(dims))) + 2, 4);
  return std::min(k, CurveOrder::kMaxIndexBits / static_cast<int>(dims));
}

std::vector<std::size_t> hilbert_bins(const Matrix& X, std::size_t bins, int curve_order) {
  if (bins < 1) throw InvalidConfig("bin count C must be at least 1");
  const CurveOrder order(static_cast<int>(X.cols()), curve_order);
  if (order.index_bits() < 63 && bins > order.cell_count()) {
    throw InvalidConfig("C = " + std::to_string(bins) + " exceeds the " +
                        std::to_string(order.cell_count()) + " curve cells at order " +
                        std::to_string(curve_order));
  }
  std::vector<std::size_t> out(static_cast<std::size_t>(X.rows()));
  const int shift = order.index_bits() + 1;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double* row = X.row(i).data();
    const HilbertIndex h =
        point_to_index(std::span<const double>(row, static_cast<std::size_t>(X.cols())), order);
    // floor(((h + 1/2) / 2^{dk}) * C) == floor((2h + 1) C / 2^{dk+1})
    const u128 scaled =
        (static_cast<u128>(h.value) * 2 + 1) * static_cast<u128>(bins);
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(scaled >> shift);
  }
  return out;
}

std::vector<std::size_t> allocate_quota(const std::vector<std::size_t>& populations,
                                        std::size_t q, std::size_t* shortfall) {
  const std::size_t total = std::accumulate(populations.begin(), populations.end(), std::size_t{0});
  if (q > total) throw InvalidConfig("quota exceeds the number of available points");

  std::vector<std::size_t> quota(populations.size(), 0);
  std::size_t moved = 0;
  std::size_t remaining = q;
  std::vector<std::size_t> open;
  while (remaining > 0) {
    open.clear();
    for (std::size_t s = 0; s < populations.size(); ++s) {
      if (quota[s] < populations[s]) open.push_back(s);
    }
    const std::size_t base = remaining / open.size();
    const std::size_t extra = remaining % open.size();
    for (const std::size_t s : open) quota[s] += base;
    if (extra > 0) {
      std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) {
        return populations[a] > populations[b];
      });
      for (std::size_t r = 0; r < extra; ++r) ++quota[open[r]];
    }
    remaining = 0;
    for (std::size_t s = 0; s < populations.size(); ++s) {
      if (quota[s] > populations[s]) {
        remaining += quota[s] - populations[s];
        quota[s] = populations[s];
      }
    }
    moved += remaining;
  }
  if (shortfall != nullptr) *shortfall = moved;
  return quota;
}

BasisSelection hbs_select(const Dataset& data, const SelectionConfig& cfg) {
  check_common(data, cfg);
  const std::size_t bins = cfg.bin_count();
  const int k = resolve_order(data, cfg);
  const auto bin_of = hilbert_bins(data.X, bins, k);
  BasisSelection sel = stratified_draw(group_rows(bin_of, bins), data.n(), cfg.q, cfg.seed, true);
  sel.method = Method::HBS;
  sel.seed = cfg.seed;
  sel.bins = bins;
  sel.curve_order = k;
  return sel;
}

BasisSelection ubs_select(const Dataset& data, const SelectionConfig& cfg) {
  check_common(data, cfg);
  CounterRng rng(cfg.seed);
  BasisSelection sel;
  sel.indices = sample_without_replacement(data.n(), cfg.q, rng);
  sel.bin_weight.assign(cfg.q, 1.0 / static_cast<double>(cfg.q));
  sel.nonempty_bins = 1;
  sel.method = Method::UBS;
  sel.seed = cfg.seed;
  sel.bins = 1;
  return sel;
}

BasisSelection abs_select(const Dataset& data, const SelectionConfig& cfg) {
  check_common(data, cfg);
  if (static_cast<std::size_t>(data.y.size()) != data.n()) {
    throw InvalidInput("ABS needs a response for every row");
  }
  const auto slices =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cfg.q))));
  const double lo = data.y.minCoeff();
  const double hi = data.y.maxCoeff();
  std::vector<std::size_t> slice_of(data.n(), 0);
  if (hi > lo) {
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double t = (data.y[static_cast<Eigen::Index>(i)] - lo) / (hi - lo);
      slice_of[i] = std::min(static_cast<std::size_t>(t * static_cast<double>(slices)), slices - 1);
    }
  }
  BasisSelection sel =
      stratified_draw(group_rows(slice_of, slices), data.n(), cfg.q, cfg.seed, false);
  sel.method = Method::ABS;
  sel.seed = cfg.seed;
  sel.bins = slices;
  return sel;
}

BasisSelection sbs_select(const Dataset& data, const SelectionConfig& cfg) {
  check_common(data, cfg);
  const auto d = static_cast<Eigen::Index>(data.d());
  ScrambledSobol sobol(static_cast<int>(d), cfg.seed);
  std::vector<char> taken(data.n(), 0);
  std::vector<double> target(static_cast<std::size_t>(d));

  BasisSelection sel;
  sel.indices.reserve(cfg.q);
  for (std::size_t t = 0; t < cfg.q; ++t) {
    sobol.next(target.data());
    std::size_t best = data.n();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (taken[i]) continue;
      double dist = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = data.X(static_cast<Eigen::Index>(i), j) - target[static_cast<std::size_t>(j)];
        dist += diff * diff;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    taken[best] = 1;
    sel.indices.push_back(best);
  }
  sel.bin_weight.assign(cfg.q, 1.0 / static_cast<double>(cfg.q));
  sel.nonempty_bins = 1;
  sel.method = Method::SBS;
  sel.seed = cfg.seed;
  sel.bins = 1;
  return sel;
}

BasisSelection full_select(const Dataset& data) {
  if (data.n() == 0) throw InvalidInput("empty dataset");
  BasisSelection sel;
  sel.indices.resize(data.n());
  std::iota(sel.indices.begin(), sel.indices.end(), std::size_t{0});
  sel.bin_weight.assign(data.n(), 1.0 / static_cast<double>(data.n()));
  sel.nonempty_bins = 1;
  sel.method = Method::Full;
  sel.bins = 1;
  return sel;
}

BasisSelection select_basis(const Dataset& data, const SelectionConfig& cfg) {
  switch (cfg.method) {
    case Method::HBS: return hbs_select(data, cfg);
    case Method::UBS: return ubs_select(data, cfg);
    case Method::ABS: return abs_select(data, cfg);
    case Method::SBS: return sbs_select(data, cfg);
    case Method::Full: return full_select(data);
  }
  throw InvalidConfig("unknown basis selection method");
}

double condition5_diagnostic(const Dataset& data, const SelectionConfig& cfg) {
  if (data.n() == 0) throw InvalidInput("empty dataset");
  const std::size_t bins = cfg.bin_count();
  const auto bin_of = hilbert_bins(data.X, bins, resolve_order(data, cfg));
  std::vector<std::size_t> counts(bins, 0);
  for (const std::size_t b : bin_of) ++counts[b];
  const std::size_t largest = *std::max_element(counts.begin(), counts.end());
  return static_cast<double>(cfg.q) * static_cast<double>(largest) / static_cast<double>(data.n());
}

Matrix basis_points(const Dataset& data, const BasisSelection& sel) {
  Matrix out(static_cast<Eigen::Index>(sel.size()), data.X.cols());
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (sel.indices[j] >= data.n()) throw InvalidInput("selection index out of range");
    out.row(static_cast<Eigen::Index>(j)) = data.X.row(static_cast<Eigen::Index>(sel.indices[j]));
  }
  return out;
}

std::string selection_to_json(const BasisSelection& sel) {
  nlohmann::json j;
  j["method"] = std::string(method_name(sel.method));
  j["seed"] = sel.seed;
  j["C"] = sel.bins;
  j["k"] = sel.curve_order;
  j["nonempty_bins"] = sel.nonempty_bins;
  j["redistributed"] = sel.redistributed;
  j["indices"] = sel.indices;
  j["weights"] = sel.bin_weight;
  j["strata"] = sel.stratum;
  return j.dump();
}

BasisSelection selection_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BasisSelection sel;
    sel.method = parse_method(j.at("method").get<std::string>());
    sel.seed = j.at("seed").get<std::uint64_t>();
    sel.bins = j.at("C").get<std::size_t>();
    sel.curve_order = j.at("k").get<int>();
    sel.nonempty_bins = j.at("nonempty_bins").get<std::size_t>();
    sel.redistributed = j.value("redistributed", std::size_t{0});
    sel.indices = j.at("indices").get<std::vector<std::size_t>>();
    sel.bin_weight = j.at("weights").get<std::vector<double>>();
    sel.stratum = j.value("strata", std::vector<std::size_t>{});
    if (sel.bin_weight.size() != sel.indices.size()) {
      throw InvalidInput("selection weights and indices differ in length");
    }
    return sel;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed selection record: ") + e.what());
  }
}

}  // namespace hbs
