#include "pipeline.hpp"

#include <array>
#include <cctype>

#include <fmt/format.h>

#include "alrn/backend.hpp"
#include "alrn/http_backend.hpp"
#include "alrn/insights.hpp"
#include "alrn/labeling.hpp"
#include "alrn/report.hpp"
#include "alrn/rng.hpp"
#include "alrn/tokenizer.hpp"
#include "alrn/training.hpp"
#include "manifest.hpp"

namespace alrn::cli {

namespace fs = std::filesystem;

namespace {

const std::array<const char*, 5> kDatasetNames = {"generic_train", "generic_test", "domain_train", "domain_pool",
                                                   "domain_test"};

std::array<const LabeledDataset*, 5> datasets(const SynthCorpora& c) {
  return {&c.generic_train, &c.generic_test, &c.domain_train, &c.domain_pool, &c.domain_test};
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string shout(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

SynthCorpora write_synth_corpora(const RunConfig& cfg) {
  SynthCorpora corpora = synth_corpus(cfg.spec(), cfg.synth_seed);
  const fs::path dir = cfg.out_dir / "data";
  Manifest m("synth", cfg.to_json());
  m.seed("synth", cfg.synth_seed);
  const auto sets = datasets(corpora);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const fs::path path = dir / (std::string(kDatasetNames[i]) + ".jsonl");
    write_labeled_jsonl(path, *sets[i]);
    m.output(path);
    m.note(kDatasetNames[i], {{"size", sets[i]->size()}, {"fingerprint", sets[i]->fingerprint()}});
    fmt::print("{:<14} {:>5} examples -> {}\n", kDatasetNames[i], sets[i]->size(), path.string());
  }
  m.write(dir / "synth.manifest.json");
  return corpora;
}

std::vector<RawComment> roughen_comments(std::span<const LabeledExample> examples, std::uint64_t seed) {
  static constexpr std::array<Platform, 3> kPlatforms = {Platform::reddit, Platform::twitter, Platform::tumblr};
  static constexpr std::array<const char*, 4> kEmoji = {"\xF0\x9F\x98\x80", "\xF0\x9F\x91\x8D", "\xE2\x9D\xA4\xEF\xB8\x8F",
                                                        "\xF0\x9F\x98\xA1"};
  Rng rng(seed);
  std::vector<RawComment> out;
  out.reserve(examples.size() + 2);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    RawComment r;
    r.id = fmt::format("raw-{:05}", i);
    r.platform = kPlatforms[i % kPlatforms.size()];
    r.created_at = fmt::format("2023-{:02}-{:02}T{:02}:{:02}:00Z", 1 + i / 600 % 12, 1 + i / 24 % 28, i % 24,
                               (i * 7) % 60);
    std::string t = examples[i].comment.text;
    switch (rng.below(4)) {
      case 0: t = capitalize(t); break;
      case 1: t = shout(t); break;
      default: break;
    }
    if (rng.bernoulli(0.3)) t += fmt::format(" https://example.com/p/{}?ref=share", i);
    if (rng.bernoulli(0.2)) t = "<p>" + t + "</p>";
    if (rng.bernoulli(0.3)) t += std::string(" ") + kEmoji[rng.below(kEmoji.size())];
    if (rng.bernoulli(0.2)) t = "  " + t + " \n";
    r.text = std::move(t);
    out.push_back(std::move(r));
  }
  if (!out.empty()) {
    RawComment dup = out.front();
    dup.id = "raw-dup";
    out.push_back(std::move(dup));
  }
  RawComment empty;
  empty.id = "raw-empty";
  empty.created_at = "2023-01-01T00:00:00Z";
  out.push_back(std::move(empty));
  return out;
}

std::vector<fs::path> render_wordclouds(const Checkpoint& ckpt, std::span<const CleanComment> comments,
                                        std::span<const SentimentLabel> sentiments, const RunConfig& cfg,
                                        const fs::path& dir) {
  std::vector<TokenSequence> inputs;
  inputs.reserve(comments.size());
  for (const auto& c : comments) inputs.push_back(encode(c.text, ckpt.vocab, ckpt.model.config().max_len));
  const std::vector<int> predicted = predict_labels(ckpt.model, inputs);

  std::vector<fs::path> written;
  for (SentimentLabel s : sentiments) {
    std::vector<CleanComment> group;
    for (std::size_t i = 0; i < comments.size(); ++i) {
      if (predicted[i] == code(s)) group.push_back(comments[i]);
    }
    const FrequencyTable table = count_ngrams(group, {}, s);
    const WordCloud cloud = render_wordcloud(table, cfg.top_k, cfg.cloud_seed, cfg.cloud);
    const std::string stem(label_key(s));
    write_text_file(dir / (stem + ".svg"), cloud.svg);
    write_text_file(dir / (stem + ".json"), cloud.sidecar_json);
    written.push_back(dir / (stem + ".svg"));
    written.push_back(dir / (stem + ".json"));
    fmt::print("{:<8} {:>4} comments, {} n-grams placed -> {}\n", label_key(s), group.size(), cloud.words.size(),
               (dir / (stem + ".svg")).string());
  }
  return written;
}

void run_pipeline(const RunConfig& cfg) {
  const fs::path out = cfg.out_dir;
  const auto config_json = cfg.to_json();
  const TextPipeline pipeline = cfg.pipeline();
  Manifest m("pipeline", config_json);
  m.seed("synth", cfg.synth_seed);
  m.seed("model", cfg.model.seed);
  m.seed("pretrain", cfg.pretrain.seed);
  m.seed("customize", cfg.customize.seed);
  m.seed("labeler", cfg.labeler.seed);
  m.seed("wordcloud", cfg.cloud_seed);

  fmt::print("[1/7] synthesizing corpora\n");
  const SynthCorpora corpora = write_synth_corpora(cfg);
  for (const char* name : kDatasetNames) m.output(out / "data" / (std::string(name) + ".jsonl"));

  fmt::print("[2/7] ingesting and preprocessing raw domain comments\n");
  const fs::path raw_path = out / "raw" / "comments.jsonl";
  write_raw_jsonl(raw_path, roughen_comments(corpora.domain_pool.examples, cfg.synth_seed ^ 0x7261770ULL));
  IngestResult in = ingest_jsonl(raw_path);
  Corpus corpus = preprocess(in.records, pipeline, {{raw_path.generic_string()}, ""});
  const fs::path corpus_path = out / "corpus" / "comments.jsonl";
  write_corpus_jsonl(corpus_path, corpus.comments);
  fmt::print("      {} records read, {} incomplete skipped, {} kept after cleaning and deduplication\n",
             in.records.size() + in.skipped_incomplete, in.skipped_incomplete, corpus.comments.size());
  m.output(raw_path);
  m.output(corpus_path);

  fmt::print("[3/7] labeling comments through the {} labeler\n", cfg.labeler.backend);
  std::unique_ptr<LabelerBackend> backend;
  if (cfg.labeler.backend == "http") {
    backend = std::make_unique<HttpBackend>(cfg.labeler.http);
  } else {
    backend = std::make_unique<MockBackend>(cfg.mock_options());
  }
  LabelRun labeled = llm_label(corpus.comments, *backend, cfg.labeler.policy);
  const fs::path labeled_path = out / "data" / "llm_labeled.jsonl";
  write_labeled_jsonl(labeled_path, labeled.dataset);
  m.output(labeled_path);
  m.note("labeler", backend->describe());
  m.note("label_rejects", labeled.rejects.size());
  fmt::print("      {} labeled, {} rejected\n", labeled.dataset.size(), labeled.rejects.size());

  fmt::print("[4/7] pretraining the Base model\n");
  const LabeledDataset* generic[] = {&corpora.generic_train};
  const Vocabulary vocab =
      build_vocab(std::span<const LabeledDataset* const>(generic), cfg.vocab_min_freq, cfg.vocab_max_size);
  TrainReport pre;
  const Checkpoint base = pretrain_base(corpora.generic_train, vocab, cfg.model, cfg.pretrain, &pre);
  save_checkpoint(base, out / "models" / "base.ckpt");
  write_text_file(out / "reports" / "pretrain.json", to_json(pre).dump(2) + "\n");
  m.output(out / "models" / "base.ckpt");
  m.output(out / "reports" / "pretrain.json");
  fmt::print("      final loss {:.4f}, train accuracy {}% ({:.1f}s)\n", pre.epoch_loss.back(),
             format_1dp(pre.final_train_accuracy), pre.duration_seconds);

  fmt::print("[5/7] customizing on the labeled domain comments\n");
  TrainReport cus;
  const Checkpoint tuned = customize(base, labeled.dataset, cfg.customize, &cus);
  save_checkpoint(tuned, out / "models" / "customized.ckpt");
  write_text_file(out / "reports" / "customize.json", to_json(cus).dump(2) + "\n");
  m.output(out / "models" / "customized.ckpt");
  m.output(out / "reports" / "customize.json");
  if (!cus.noop) {
    fmt::print("      {} trainable layers, final loss {:.4f} ({:.1f}s)\n", cus.trainable_layers, cus.epoch_loss.back(),
               cus.duration_seconds);
  }

  fmt::print("[6/7] evaluating on the held-out domain test set\n");
  const EvalReport generic_eval = evaluate(base, corpora.generic_test);
  const EvalReport base_eval = evaluate(base, corpora.domain_test);
  const EvalReport tuned_eval = evaluate(tuned, corpora.domain_test, base_eval, "base");
  write_text_file(out / "reports" / "eval_base_generic.json", to_json(generic_eval).dump(2) + "\n");
  write_text_file(out / "reports" / "eval_base.json", to_json(base_eval).dump(2) + "\n");
  write_text_file(out / "reports" / "eval_customized.json", to_json(tuned_eval).dump(2) + "\n");
  // Wall-clock time goes to the console and timing.json only, so that every
  // manifest-listed artifact is reproducible byte for byte.
  const CustomizationRow rows[] = {{"alrn-transformer", base_eval.accuracy, tuned_eval.accuracy, std::nullopt}};
  const TableData table = customization_table(rows);
  write_text_file(out / "reports" / "timing.json",
                  nlohmann::ordered_json{{"pretrain_seconds", pre.duration_seconds},
                                         {"customize_seconds", cus.duration_seconds}}
                          .dump(2) +
                      "\n");
  write_text_file(out / "reports" / "customization.csv", table.csv());
  write_text_file(out / "reports" / "customization.txt", table.text());
  for (const char* name : {"eval_base_generic.json", "eval_base.json", "eval_customized.json", "customization.csv",
                           "customization.txt"}) {
    m.output(out / "reports" / name);
  }
  fmt::print("      Base on generic test: {}%\n{}", format_1dp(generic_eval.accuracy), table.text());

  fmt::print("[7/7] rendering word clouds\n");
  const std::array<SentimentLabel, 2> wanted = {SentimentLabel::positive, SentimentLabel::negative};
  for (const fs::path& p : render_wordclouds(tuned, corpus.comments, wanted, cfg, out / "insights")) m.output(p);

  m.write(out / "manifest.json");
  fmt::print("outputs in {}\n", out.string());
}

}  // namespace alrn::cli
