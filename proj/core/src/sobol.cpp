#include "hbs/sobol.hpp"

#include <boost/random/sobol.hpp>

#include "hbs/error.hpp"
#include "hbs/random.hpp"

namespace hbs {

struct ScrambledSobol::Engine {
  explicit Engine(int dims) : sobol(static_cast<std::size_t>(dims)) {}
  boost::random::sobol sobol;
  // The boost engine starts at the second point of the sequence; emitting
  // the origin first keeps every prefix of length 2^m a full net.
  bool at_origin = true;
};

ScrambledSobol::ScrambledSobol(int dims, std::uint64_t seed)
    : dims_(dims), shift_(dims > 0 ? static_cast<std::size_t>(dims) : 0) {
  if (dims < 1) throw InvalidInput("Sobol dimension must be positive");
  CounterRng rng(derive_seed(seed, {tag("sobol-shift")}));
  for (auto& s : shift_) s = rng();
  engine_ = std::make_unique<Engine>(dims);
}

ScrambledSobol::~ScrambledSobol() = default;
ScrambledSobol::ScrambledSobol(ScrambledSobol&&) noexcept = default;
ScrambledSobol& ScrambledSobol::operator=(ScrambledSobol&&) noexcept = default;

void ScrambledSobol::next(double* out) {
  const bool origin = engine_->at_origin;
  engine_->at_origin = false;
  for (int j = 0; j < dims_; ++j) {
    const std::uint64_t raw = origin ? 0 : static_cast<std::uint64_t>(engine_->sobol());
    const std::uint64_t word = raw ^ shift_[j];
    out[j] = static_cast<double>(word >> 11) * 0x1.0p-53;
  }
}

std::vector<double> ScrambledSobol::next() {
  std::vector<double> point(static_cast<std::size_t>(dims_));
  next(point.data());
  return point;
}

}  // namespace hbs
