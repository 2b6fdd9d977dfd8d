#include <benchmark/benchmark.h>

#include "kokonet/classify.hpp"
#include "kokonet/elliptic.hpp"
#include "kokonet/geometry.hpp"
#include "kokonet/kinematics.hpp"
#include "kokonet/qsnet.hpp"
#include "kokonet/search.hpp"
#include "kokonet/units.hpp"

using namespace kokonet;

namespace {

const QsSeed kSeed{deg(105), deg(15), deg(120)};

SearchConfig net_a_config() {
  SearchConfig c;
  c.deltas = {deg(120), deg(80), deg(85), deg(75)};
  c.thetas = {deg(130), deg(140), deg(125), deg(135)};
  c.threads = 1;
  return c;
}

void BM_JacobiReal(benchmark::State& st) {
  double u = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(jacobi_real(u, 0.8));
    u += 1e-3;
  }
}
BENCHMARK(BM_JacobiReal);

void BM_CompleteK(benchmark::State& st) {
  double k = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(complete_K(k));
    k = k > 0.9 ? 0.1 : k + 1e-4;
  }
}
BENCHMARK(BM_CompleteK);

void BM_Classify(benchmark::State& st) {
  const NetAngles net = build_qs_net(kSeed);
  for (auto _ : st) benchmark::DoNotOptimize(classify(net));
}
BENCHMARK(BM_Classify);

void BM_ClosingStates(benchmark::State& st) {
  const QsFlexion fl = qs_flexion(kSeed, 1);
  const DihedralState s = eval_flexion(fl, 0.7);
  for (auto _ : st) benchmark::DoNotOptimize(closing_states_from(fl.net, 1, s[1], 1e-10));
}
BENCHMARK(BM_ClosingStates);

void BM_FlexionTrace(benchmark::State& st) {
  const QsFlexion fl = qs_flexion(kSeed, 1);
  const DihedralState s = eval_flexion(fl, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(flexion_trace(fl.net, s, -1.0, 1.0, 41, 1));
}
BENCHMARK(BM_FlexionTrace)->Unit(benchmark::kMillisecond);

void BM_Embed(benchmark::State& st) {
  const QsFlexion fl = qs_flexion(kSeed, 1);
  const DihedralState s = eval_flexion(fl, 0.7);
  for (auto _ : st) benchmark::DoNotOptimize(embed(fl.net, s));
}
BENCHMARK(BM_Embed);

void BM_SelfIntersects(benchmark::State& st) {
  const QsFlexion fl = qs_flexion(kSeed, 1);
  const EmbeddedNet e = embed(fl.net, eval_flexion(fl, 0.7));
  for (auto _ : st) benchmark::DoNotOptimize(self_intersects(e));
}
BENCHMARK(BM_SelfIntersects);

void BM_SearchSeeds(benchmark::State& st) {
  SearchConfig cfg = net_a_config();
  cfg.seedCount = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_search(cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SearchSeeds)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
