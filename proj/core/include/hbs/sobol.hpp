#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace hbs {

/// Sobol points in [0,1)^d with a seeded random digital shift (XOR of a
/// random 64-bit word per dimension). The shift keeps every (t,m,s)-net
/// property of the unscrambled sequence.
class ScrambledSobol {
 public:
  ScrambledSobol(int dims, std::uint64_t seed);
  ~ScrambledSobol();
  ScrambledSobol(ScrambledSobol&&) noexcept;
  ScrambledSobol& operator=(ScrambledSobol&&) noexcept;

  int dims() const noexcept { return dims_; }

  /// Writes the next point into `out` (size dims()).
  void next(double* out);
  std::vector<double> next();

 private:
  struct Engine;
  int dims_;
  std::vector<std::uint64_t> shift_;
  std::unique_ptr<Engine> engine_;
};

}  // namespace hbs
