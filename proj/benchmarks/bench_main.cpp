#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "ddrlab/reconstruction.hpp"

using namespace ddrlab;

namespace {

const Mesh& cached_mesh(const std::string& scenario, int inv_h) {
  static std::map<std::pair<std::string, int>, std::unique_ptr<Mesh>> cache;
  auto& slot = cache[{scenario, inv_h}];
  if (!slot) slot = std::make_unique<Mesh>(build_mesh(make_scenario(scenario), 1.0 / inv_h, 3));
  return *slot;
}

void BM_BuildMesh(benchmark::State& state) {
  const auto domain = make_scenario("annulus");
  for (auto _ : state) benchmark::DoNotOptimize(build_mesh(domain, 1.0 / state.range(0), 3));
}
BENCHMARK(BM_BuildMesh)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Field(benchmark::State& state) {
  const Mesh& m = cached_mesh("annulus", static_cast<int>(state.range(0)));
  const Scheme scheme = state.range(1) ? Scheme::upwind : Scheme::graph;
  const VertexId s = m.nearest_vertex(Vec2(-0.8, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(distance_field(m, s, scheme));
  state.SetLabel(to_string(scheme));
}
BENCHMARK(BM_Field)->Args({100, 0})->Args({100, 1})->Args({200, 0})->Args({200, 1})->Unit(benchmark::kMillisecond);

void BM_FrameTable(benchmark::State& state) {
  const Mesh& m = cached_mesh("disk", static_cast<int>(state.range(0)));
  const FramePtr frame = make_frame(m, 2.0 * m.h);
  for (auto _ : state) benchmark::DoNotOptimize(FrameTable::compute(m, frame, Scheme::upwind));
}
BENCHMARK(BM_FrameTable)->Arg(50)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_CompactSup(benchmark::State& state) {
  const Mesh& m = cached_mesh("disk", 50);
  static const FrameTable table = FrameTable::compute(m, make_frame(m, 2.0 * m.h), Scheme::graph);
  VertexId x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.sup_between(x, x + 1));
    x = (x + 7) % static_cast<VertexId>(m.size() - 1);
  }
}
BENCHMARK(BM_CompactSup);

void BM_DenseMatch(benchmark::State& state) {
  const Mesh& a = cached_mesh("disk", 50);
  const Mesh& b = cached_mesh("disk+twist", 50);
  const FramePtr frame = make_frame(a, 2.0 * a.h);
  static const FrameTable ta = FrameTable::compute(a, frame, Scheme::upwind);
  static const FrameTable tb = FrameTable::compute(b, frame, Scheme::upwind);
  const DenseMatcher matcher(b, tb);
  const auto sources = source_grid(a, 0.2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(matcher.match(ta.row(sources[i])));
    i = (i + 1) % sources.size();
  }
}
BENCHMARK(BM_DenseMatch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
