#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hbs/dataset.hpp"

namespace hbs {

/// Basis selectors. Full takes every row and ignores q.
enum class Method { HBS, UBS, ABS, SBS, Full };

std::string_view method_name(Method method) noexcept;  // "HBS", ..., "FULL"
Method parse_method(std::string_view name);            // case-insensitive

struct SelectionConfig {
  std::size_t q = 0;
  /// Histogram bins along the curve; defaults to q.
  std::optional<std::size_t> bins;
  /// Curve order; defaults to default_curve_order(bins, d).
  std::optional<int> curve_order;
  Method method = Method::HBS;
  std::uint64_t seed = 0;

  std::size_t bin_count() const noexcept { return bins.value_or(q); }
};

/// k = max(ceil(log2(C) / d) + 2, 4), capped so that d*k <= 62.
int default_curve_order(std::size_t bins, std::size_t dims);

struct BasisSelection {
  std::vector<std::size_t> indices;
  /// HBS: n~_j / (n * points drawn from that bin); otherwise 1/q.
  std::vector<double> bin_weight;
  /// Stratum (curve bin or response slice) of each selected point; empty
  /// for unstratified methods.
  std::vector<std::size_t> stratum;
  std::size_t nonempty_bins = 0;
  /// Points whose quota had to move because a stratum ran short.
  std::size_t redistributed = 0;
  Method method = Method::HBS;
  std::uint64_t seed = 0;
  std::size_t bins = 0;
  int curve_order = 0;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Curve bin of every row: the row's block center (i + 0.5)/2^{dk} falls in
/// bin floor(center * C). Computed in exact integer arithmetic.
std::vector<std::size_t> hilbert_bins(const Matrix& X, std::size_t bins, int curve_order);

/// Per-stratum quota: floor(q / #non-empty) with the remainder going one each
/// to the most populated strata (ties to the lower index); strata that run
/// short give their excess back to the others by the same rule. Returns the
/// quotas; `shortfall` receives the total number of moved points.
std::vector<std::size_t> allocate_quota(const std::vector<std::size_t>& populations,
                                        std::size_t q, std::size_t* shortfall = nullptr);

BasisSelection hbs_select(const Dataset& data, const SelectionConfig& cfg);
BasisSelection ubs_select(const Dataset& data, const SelectionConfig& cfg);
BasisSelection abs_select(const Dataset& data, const SelectionConfig& cfg);
BasisSelection sbs_select(const Dataset& data, const SelectionConfig& cfg);
BasisSelection full_select(const Dataset& data);

/// Dispatch on cfg.method.
BasisSelection select_basis(const Dataset& data, const SelectionConfig& cfg);

/// max_i q n_i / n over the C curve bins.
double condition5_diagnostic(const Dataset& data, const SelectionConfig& cfg);
/// Values above this suggest a near-degenerate design density.
inline constexpr double kCondition5WarnLevel = 10.0;

/// Rows of X at the selected indices.
Matrix basis_points(const Dataset& data, const BasisSelection& sel);

/// {"method", "seed", "C", "k", "indices", "weights", ...} as JSON text.
std::string selection_to_json(const BasisSelection& sel);
BasisSelection selection_from_json(std::string_view text);

}  // namespace hbs
