// Copyright 2026 The idbn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <vector>

#include "idbn/dbn.hpp"
#include "idbn/graph.hpp"
#include "idbn/random.hpp"
#include "idbn/rbm.hpp"
#include "idbn/readout.hpp"

namespace {

using namespace idbn;

Matrix random_binary(Index rows, Index cols, Rng& rng) {
  return sample_bernoulli(Matrix::Constant(rows, cols, 0.3), rng);
}

void BM_CdStep(benchmark::State& state) {
  const Index hidden = state.range(0);
  Rng rng(1);
  const RbmLayer layer = init_rbm(784, hidden, NormalStd{0.01}, rng);
  const Matrix batch = random_binary(100, 784, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cd_step(layer, batch, 1, rng));
  state.SetItemsProcessed(state.iterations() * batch.rows());
}
BENCHMARK(BM_CdStep)->Arg(100)->Arg(500);

Dbn random_dbn(const std::vector<Index>& sizes) {
  return Dbn::create(sizes, NormalStd{0.1}, 2);
}

void BM_Binarize(benchmark::State& state) {
  const Dbn dbn = random_dbn({784, 500, 500, 1000});
  for (auto _ : state) benchmark::DoNotOptimize(binarize(dbn, 0.2));
}
BENCHMARK(BM_Binarize)->Unit(benchmark::kMillisecond);

void BM_MeanGeodesic(benchmark::State& state) {
  const Dbn dbn = random_dbn({100, 80, 60});
  const PrunedGraph g = binarize(dbn, static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(mean_geodesic(g));
}
BENCHMARK(BM_MeanGeodesic)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_ConnectedComponents(benchmark::State& state) {
  const Dbn dbn = random_dbn({784, 500, 500, 1000});
  const PrunedGraph g = binarize(dbn, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(g));
}
BENCHMARK(BM_ConnectedComponents)->Unit(benchmark::kMillisecond);

void BM_FitRidge(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(3);
  const Matrix x = random_binary(n, 500, rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ridge(x, labels, 0.1));
}
BENCHMARK(BM_FitRidge)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
