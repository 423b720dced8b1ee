#include <benchmark/benchmark.h>

#include <vector>

#include "alrn/autograd.hpp"
#include "alrn/rng.hpp"
#include "alrn/tensor.hpp"

namespace {

alrn::Tensor random_tensor(alrn::Shape shape, std::uint64_t seed) {
  alrn::Rng rng(seed);
  std::vector<double> v(alrn::shape_size(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return alrn::Tensor(std::move(shape), std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1);
  const auto b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(alrn::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_Softmax(benchmark::State& state) {
  const auto x = random_tensor({512, static_cast<std::size_t>(state.range(0))}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(alrn::softmax(x));
}
BENCHMARK(BM_Softmax)->Arg(32)->Arg(128);

// Forward and backward of masked multi-head attention, batch 16.
void BM_Attention(benchmark::State& state) {
  const std::size_t batch = 16, heads = 4, d = 64;
  const auto seq = static_cast<std::size_t>(state.range(0));
  const auto q = random_tensor({batch * seq, d}, 4);
  const auto k = random_tensor({batch * seq, d}, 5);
  const auto v = random_tensor({batch * seq, d}, 6);
  std::vector<int> mask(batch * seq, 1);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = seq / 2 + b % (seq / 2); t < seq; ++t) mask[b * seq + t] = 0;
  }
  for (auto _ : state) {
    alrn::Tape tape;
    auto qv = tape.watch("q", q), kv = tape.watch("k", k), vv = tape.watch("v", v);
    auto out = alrn::attention(qv, kv, vv, {batch, seq, heads, mask});
    benchmark::DoNotOptimize(tape.backward(alrn::sum(out)));
  }
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(32);

}  // namespace
