#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "alrn/model.hpp"
#include "alrn/tokenizer.hpp"

namespace {

std::vector<alrn::TokenSequence> batch_of(std::size_t n, std::size_t max_len, std::size_t vocab_size) {
  std::vector<alrn::TokenSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    alrn::TokenSequence s;
    s.ids.assign(max_len, 0);
    s.mask.assign(max_len, 0);
    const std::size_t len = 4 + (i * 5) % (max_len - 4);
    for (std::size_t t = 0; t < len; ++t) {
      s.ids[t] = t == 0 ? 2 : static_cast<int>(4 + (i * 31 + t * 7) % (vocab_size - 4));
      s.mask[t] = 1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

alrn::ModelConfig config(std::size_t d_model) {
  alrn::ModelConfig c;
  c.vocab_size = 200;
  c.max_len = 32;
  c.d_model = d_model;
  c.d_ff = 2 * d_model;
  return c;
}

void BM_ForwardInference(benchmark::State& state) {
  const auto cfg = config(static_cast<std::size_t>(state.range(0)));
  const alrn::Model model = alrn::init_model(cfg);
  const auto batch = batch_of(16, cfg.max_len, cfg.vocab_size);
  for (auto _ : state) benchmark::DoNotOptimize(alrn::forward(model, batch));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_ForwardInference)->Arg(32)->Arg(64);

// One training step's forward and backward with every parameter watched.
void BM_ForwardBackward(benchmark::State& state) {
  const auto cfg = config(static_cast<std::size_t>(state.range(0)));
  const alrn::Model model = alrn::init_model(cfg);
  const auto batch = batch_of(16, cfg.max_len, cfg.vocab_size);
  const std::vector<int> labels(16, 1);
  for (auto _ : state) {
    alrn::Tape tape;
    auto logits = alrn::forward(tape, model, batch, {false, nullptr, alrn::WatchMode::all});
    benchmark::DoNotOptimize(tape.backward(alrn::cross_entropy(logits, labels)));
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64);

}  // namespace
