#include "hbs/hilbert_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hbs/error.hpp"
#include "hbs/random.hpp"

namespace hbs {

namespace {

using Transpose = std::array<std::uint64_t, CurveOrder::kMaxDims>;

// Skilling, "Programming the Hilbert curve" (AIP Conf. Proc. 707, 2004).
void axes_to_transpose(Transpose& x, int bits, int dims) {
  const std::uint64_t top = std::uint64_t{1} << (bits - 1);
  for (std::uint64_t q = top; q > 1; q >>= 1) {
    const std::uint64_t p = q - 1;
    for (int i = 0; i < dims; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint64_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  for (int i = 1; i < dims; ++i) x[i] ^= x[i - 1];
  std::uint64_t t = 0;
  for (std::uint64_t q = top; q > 1; q >>= 1) {
    if (x[dims - 1] & q) t ^= q - 1;
  }
  for (int i = 0; i < dims; ++i) x[i] ^= t;
}

void transpose_to_axes(Transpose& x, int bits, int dims) {
  const std::uint64_t end = std::uint64_t{2} << (bits - 1);
  std::uint64_t t = x[dims - 1] >> 1;
  for (int i = dims - 1; i > 0; --i) x[i] ^= x[i - 1];
  x[0] ^= t;
  for (std::uint64_t q = 2; q != end; q <<= 1) {
    const std::uint64_t p = q - 1;
    for (int i = dims - 1; i >= 0; --i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
}

// Interleave: bit b of x[i] lands at position b*dims + (dims-1-i).
std::uint64_t pack(const Transpose& x, int bits, int dims) {
  std::uint64_t index = 0;
  for (int b = bits - 1; b >= 0; --b) {
    for (int i = 0; i < dims; ++i) {
      index = (index << 1) | ((x[i] >> b) & 1U);
    }
  }
  return index;
}

Transpose unpack(std::uint64_t index, int bits, int dims) {
  Transpose x{};
  int shift = bits * dims - 1;
  for (int b = bits - 1; b >= 0; --b) {
    for (int i = 0; i < dims; ++i, --shift) {
      x[i] |= ((index >> shift) & 1U) << b;
    }
  }
  return x;
}

}  // namespace

CurveOrder::CurveOrder(int dims, int bits) : dims_(dims), bits_(bits) {
  if (dims < 1 || dims > kMaxDims) {
    throw InvalidInput("curve dimension must be in [1, 16], got " + std::to_string(dims));
  }
  if (bits < 1) {
    throw InvalidInput("curve order must be >= 1, got " + std::to_string(bits));
  }
  if (dims * bits > kMaxIndexBits) {
    throw InvalidInput("curve index needs " + std::to_string(dims * bits) +
                       " bits; at most 62 are supported");
  }
}

HilbertIndex encode(const CellCoord& cell, const CurveOrder& order) {
  const int dims = order.dims();
  if (static_cast<int>(cell.coords.size()) != dims) {
    throw InvalidInput("cell has " + std::to_string(cell.coords.size()) +
                       " coordinates, curve has " + std::to_string(dims));
  }
  Transpose x{};
  for (int i = 0; i < dims; ++i) {
    if (cell.coords[i] >= order.side()) {
      throw InvalidInput("cell coordinate " + std::to_string(cell.coords[i]) +
                         " out of range for order " + std::to_string(order.bits()));
    }
    x[i] = cell.coords[i];
  }
  axes_to_transpose(x, order.bits(), dims);
  return HilbertIndex{pack(x, order.bits(), dims)};
}

CellCoord decode(HilbertIndex index, const CurveOrder& order) {
  if (index.value >= order.cell_count()) {
    throw InvalidInput("curve index " + std::to_string(index.value) + " out of range");
  }
  const int dims = order.dims();
  Transpose x = unpack(index.value, order.bits(), dims);
  transpose_to_axes(x, order.bits(), dims);
  return CellCoord{std::vector<std::uint64_t>(x.begin(), x.begin() + dims)};
}

CellCoord point_to_cell(std::span<const double> x, const CurveOrder& order) {
  if (static_cast<int>(x.size()) != order.dims()) {
    throw InvalidInput("point has " + std::to_string(x.size()) +
                       " coordinates, curve has " + std::to_string(order.dims()));
  }
  const double side = static_cast<double>(order.side());
  const std::uint64_t top = order.side() - 1;
  CellCoord cell;
  cell.coords.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] >= 0.0 && x[j] <= 1.0)) {
      throw InvalidInput("point coordinate " + std::to_string(x[j]) +
                         " outside [0,1]; scale the data first");
    }
    const auto c = static_cast<std::uint64_t>(std::floor(x[j] * side));
    cell.coords[j] = std::min(c, top);
  }
  return cell;
}

HilbertIndex point_to_index(std::span<const double> x, const CurveOrder& order) {
  return encode(point_to_cell(x, order), order);
}

double index_to_center(HilbertIndex index, const CurveOrder& order) {
  if (index.value >= order.cell_count()) {
    throw InvalidInput("curve index " + std::to_string(index.value) + " out of range");
  }
  return (static_cast<double>(index.value) + 0.5) /
         static_cast<double>(order.cell_count());
}

LocalityReport locality_bound_check(const CurveOrder& order, std::uint64_t max_pairs,
                                    std::uint64_t seed) {
  const int dims = order.dims();
  const std::uint64_t cells = order.cell_count();
  const double side = static_cast<double>(order.side());
  if (cells > (std::uint64_t{1} << 24)) {
    throw InvalidInput("locality check supports at most 2^24 cells");
  }

  // Cell centers in curve order.
  std::vector<double> centers(cells * dims);
  for (std::uint64_t i = 0; i < cells; ++i) {
    const CellCoord c = decode(HilbertIndex{i}, order);
    for (int j = 0; j < dims; ++j) {
      centers[i * dims + j] = (static_cast<double>(c.coords[j]) + 0.5) / side;
    }
  }

  LocalityReport report;
  report.slack = 2.0 * std::sqrt(static_cast<double>(dims)) / side;
  const double lead = 2.0 * std::sqrt(static_cast<double>(dims) + 3.0);
  const double inv_dims = 1.0 / dims;

  // Interval centers differ by exactly (j - i) / 2^{dk}, so the bound depends
  // only on the index gap.
  std::vector<double> inv_bound_sq(cells);
  for (std::uint64_t gap = 0; gap < cells; ++gap) {
    const double bound =
        lead * std::pow(static_cast<double>(gap) / static_cast<double>(cells), inv_dims) +
        report.slack;
    inv_bound_sq[gap] = 1.0 / (bound * bound);
  }

  double max_ratio_sq = 0.0;
  std::uint64_t violations = 0;
  auto check = [&](std::uint64_t i, std::uint64_t j) {
    const std::uint64_t gap = j > i ? j - i : i - j;
    double dist_sq = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double diff = centers[i * dims + k] - centers[j * dims + k];
      dist_sq += diff * diff;
    }
    const double ratio_sq = dist_sq * inv_bound_sq[gap];
    max_ratio_sq = std::max(max_ratio_sq, ratio_sq);
    violations += ratio_sq > 1.0 ? 1 : 0;
  };

  const std::uint64_t all_pairs = cells * (cells - 1) / 2;
  if (max_pairs == 0 || max_pairs >= all_pairs) {
    for (std::uint64_t i = 0; i < cells; ++i) {
      for (std::uint64_t j = i + 1; j < cells; ++j) check(i, j);
    }
    report.pairs_checked = all_pairs;
  } else {
    CounterRng rng(derive_seed(seed, {tag("locality")}));
    for (std::uint64_t p = 0; p < max_pairs; ++p) check(rng.below(cells), rng.below(cells));
    report.pairs_checked = max_pairs;
  }
  report.violations = violations;
  report.max_ratio = std::sqrt(max_ratio_sq);
  return report;
}

}  // namespace hbs
