#include <benchmark/benchmark.h>

#include "hbs/basis_selection.hpp"
#include "hbs/hilbert_curve.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/random.hpp"
#include "hbs/rkhs.hpp"
#include "hbs/synthetic.hpp"

namespace {

using namespace hbs;

void BM_Encode(benchmark::State& state) {
  const CurveOrder order(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  CounterRng rng(1);
  std::vector<CellCoord> cells(1024);
  for (auto& c : cells) {
    c.coords.resize(static_cast<std::size_t>(order.dims()));
    for (auto& v : c.coords) v = rng.below(order.side());
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(cells[i++ & 1023], order));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Encode)->Args({2, 8})->Args({3, 10})->Args({8, 7});

void BM_Decode(benchmark::State& state) {
  const CurveOrder order(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  CounterRng rng(2);
  std::uint64_t h = 0;
  for (auto _ : state) {
    h = (h * 6364136223846793005ULL + 1442695040888963407ULL) & (order.cell_count() - 1);
    benchmark::DoNotOptimize(decode(HilbertIndex{h}, order));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Decode)->Args({2, 8})->Args({3, 10})->Args({8, 7});

Dataset banana(std::size_t n) {
  Dataset data = scale_to_unit_cube(gen_design(Distribution::D4, n, 2, 7), Vector());
  data.y = eval_function(TestFunction::F1, data.X);
  return data;
}

void BM_Select(benchmark::State& state) {
  const Dataset data = banana(static_cast<std::size_t>(state.range(0)));
  SelectionConfig cfg;
  cfg.q = 60;
  cfg.method = static_cast<Method>(state.range(1));
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(select_basis(data, cfg));
  }
}
BENCHMARK(BM_Select)
    ->ArgsProduct({{2000, 20000}, {static_cast<long>(Method::HBS), static_cast<long>(Method::UBS),
                                   static_cast<long>(Method::ABS), static_cast<long>(Method::SBS)}})
    ->Unit(benchmark::kMicrosecond);

void BM_FitGcv(benchmark::State& state) {
  const Dataset data = banana(static_cast<std::size_t>(state.range(0)));
  SelectionConfig cfg;
  cfg.q = static_cast<std::size_t>(state.range(1));
  cfg.seed = 3;
  const BasisSelection sel = hbs_select(data, cfg);
  const AnovaSpec spec = AnovaSpec::all_pairs(2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(data, sel, spec));
}
BENCHMARK(BM_FitGcv)
    ->Args({2000, 40})
    ->Args({4000, 40})
    ->Args({8000, 40})
    ->Args({4000, 80})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
