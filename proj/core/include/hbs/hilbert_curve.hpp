#pragma once

// Exact d-dimensional Hilbert curve of order k.
//
// The order-k curve H_k is a bijection between the 2^{dk} intervals
// [i/2^{dk}, (i+1)/2^{dk}] of [0,1] and the 2^{dk} subcubes
// prod_j [c_j/2^k, (c_j+1)/2^k] of [0,1]^d. Conversions use Skilling's
// transpose form of the Butz algorithm: Gray-code the transposed index, then
// undo the per-level rotations/reflections. Index 0 is the origin cell and
// the first-order curve visits cells in reflected-Gray-code order, with the
// first coordinate carrying the most significant bit of every d-bit digit.

#include <cstdint>
#include <span>
#include <vector>

namespace hbs {

/// Resolution of a curve: `bits` per dimension in `dims` dimensions.
class CurveOrder {
 public:
  static constexpr int kMaxDims = 16;
  static constexpr int kMaxIndexBits = 62;

  /// Throws InvalidInput unless 1 <= dims <= 16, bits >= 1, dims*bits <= 62.
  CurveOrder(int dims, int bits);

  int dims() const noexcept { return dims_; }
  int bits() const noexcept { return bits_; }
  int index_bits() const noexcept { return dims_ * bits_; }
  std::uint64_t side() const noexcept { return std::uint64_t{1} << bits_; }
  std::uint64_t cell_count() const noexcept {
    return std::uint64_t{1} << index_bits();
  }

  friend bool operator==(const CurveOrder&, const CurveOrder&) = default;

 private:
  int dims_;
  int bits_;
};

/// Position along the curve, in [0, 2^{dk} - 1].
struct HilbertIndex {
  std::uint64_t value = 0;
  friend auto operator<=>(const HilbertIndex&, const HilbertIndex&) = default;
};

/// Integer block coordinates, each in [0, 2^k - 1].
struct CellCoord {
  std::vector<std::uint64_t> coords;
  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

HilbertIndex encode(const CellCoord& cell, const CurveOrder& order);
CellCoord decode(HilbertIndex index, const CurveOrder& order);

/// Block of a point of [0,1]^d: floor(x_j 2^k), with x_j = 1 clamped into the
/// top cell.
CellCoord point_to_cell(std::span<const double> x, const CurveOrder& order);

/// encode(point_to_cell(x)). Throws InvalidInput for coordinates outside [0,1].
HilbertIndex point_to_index(std::span<const double> x, const CurveOrder& order);

/// Center (index + 0.5) / 2^{dk} of the interval of `index`.
double index_to_center(HilbertIndex index, const CurveOrder& order);

struct LocalityReport {
  std::uint64_t pairs_checked = 0;
  std::uint64_t violations = 0;
  /// max over pairs of lhs / (2 sqrt(d+3) |s-t|^{1/d} + slack); <= 1 passes.
  double max_ratio = 0.0;
  double slack = 0.0;
  bool passed() const noexcept { return violations == 0; }
};

/// Checks ||c(E_i) - c(E_j)|| <= 2 sqrt(d+3) |c(I_i) - c(I_j)|^{1/d} + delta,
/// delta = 2 sqrt(d) 2^{-k}, over all index pairs when max_pairs is 0 or
/// covers them, otherwise over max_pairs seeded random pairs.
LocalityReport locality_bound_check(const CurveOrder& order,
                                    std::uint64_t max_pairs = 0,
                                    std::uint64_t seed = 0);

}  // namespace hbs
