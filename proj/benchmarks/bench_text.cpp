#include <benchmark/benchmark.h>

#include <string>

#include "alrn/corpus.hpp"
#include "alrn/text.hpp"

namespace {

const std::string kComment =
    "  OMG <b>this</b> Course is SO good \xF0\x9F\x98\x80\xF0\x9F\x91\x8D check https://example.com/x?y=1 "
    "and www.example.org\n\tLoved every   minute of the lectures!!  ";

void BM_CleanText(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(alrn::text::clean_text(kComment));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(kComment.size()));
}
BENCHMARK(BM_CleanText);

void BM_WordTokens(benchmark::State& state) {
  const auto& pipeline = alrn::TextPipeline::builtin();
  const std::string cleaned = alrn::text::clean_text(kComment);
  for (auto _ : state) benchmark::DoNotOptimize(pipeline.word_tokens(cleaned));
}
BENCHMARK(BM_WordTokens);

}  // namespace
