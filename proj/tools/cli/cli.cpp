#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "alrn/backend.hpp"
#include "alrn/checkpoint.hpp"
#include "alrn/corpus.hpp"
#include "alrn/dataset.hpp"
#include "alrn/error.hpp"
#include "alrn/http_backend.hpp"
#include "alrn/insights.hpp"
#include "alrn/labeling.hpp"
#include "alrn/report.hpp"
#include "alrn/synth.hpp"
#include "alrn/training.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "run_config.hpp"

namespace alrn::cli {

namespace fs = std::filesystem;

namespace {

// A flag value plus whether it was given on the command line.
template <typename T>
struct Flag {
  T value{};
  CLI::Option* option = nullptr;

  bool given() const { return option != nullptr && option->count() > 0; }
  void apply(T& target) const {
    if (given()) target = value;
  }
};

template <typename T>
Flag<T>& add(CLI::App* app, Flag<T>& flag, const std::string& name, const std::string& help) {
  flag.option = app->add_option(name, flag.value, help);
  return flag;
}

// Flags shared by training commands.
struct TrainFlags {
  Flag<int> epochs;
  Flag<std::size_t> batch_size;
  Flag<double> learning_rate;
  Flag<std::uint64_t> seed;
  CLI::Option* allow_short = nullptr;

  void attach(CLI::App* app) {
    add(app, epochs, "--epochs", "Training epochs (minimum 10 unless --allow-short)");
    add(app, batch_size, "--batch-size", "Mini-batch size");
    add(app, learning_rate, "--lr", "Adam learning rate");
    add(app, seed, "--train-seed", "Seed for shuffling and dropout");
    allow_short = app->add_flag("--allow-short", "Permit fewer than 10 epochs");
  }
  void apply(TrainConfig& t) const {
    epochs.apply(t.epochs);
    batch_size.apply(t.batch_size);
    learning_rate.apply(t.learning_rate);
    seed.apply(t.seed);
    if (allow_short != nullptr && allow_short->count() > 0) t.allow_short = true;
  }
};

struct LabelerFlags {
  Flag<std::string> backend;
  Flag<std::string> endpoint;
  Flag<int> retries;
  Flag<std::size_t> in_flight;
  Flag<double> timeout;

  void attach(CLI::App* app) {
    add(app, backend, "--backend", "Labeler backend: mock (offline, default) or http")
        .option->check(CLI::IsMember({"mock", "http"}));
    add(app, endpoint, "--endpoint", "HTTP labeler endpoint URL");
    add(app, retries, "--retries", "Attempts per comment");
    add(app, in_flight, "--in-flight", "Concurrent backend calls");
    add(app, timeout, "--timeout", "Per-call timeout in seconds (http)");
  }
  void apply(LabelerSettings& l) const {
    backend.apply(l.backend);
    endpoint.apply(l.http.endpoint);
    retries.apply(l.policy.max_attempts);
    in_flight.apply(l.policy.max_in_flight);
    timeout.apply(l.http.timeout_seconds);
  }
};

std::unique_ptr<LabelerBackend> make_backend(const RunConfig& cfg) {
  if (cfg.labeler.backend == "http") return std::make_unique<HttpBackend>(cfg.labeler.http);
  return std::make_unique<MockBackend>(cfg.mock_options());
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return fs::path(path.string() + suffix);
}

std::vector<CleanComment> read_comments(const fs::path& path, const TextPipeline& pipeline, std::size_t* skipped = nullptr) {
  IngestResult in = ingest_jsonl(path);
  if (skipped) *skipped = in.skipped_incomplete;
  Corpus corpus = preprocess(in.records, pipeline, {{path.generic_string()}, ""});
  return std::move(corpus.comments);
}

void print_table(const TableData& table) { fmt::print("{}", table.text()); }

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Domain customization of a small transformer sentiment classifier, from raw comments to word clouds."};
  app.name(args.empty() ? "alrn" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  std::string config_path;
  std::string out_dir;
  app.add_option("--config", config_path, "INI configuration file (flags override its values)");
  auto* out_dir_opt = app.add_option("--out-dir", out_dir, "Output directory for directory-style commands");

  std::string input, output, train_path, test_path, base_path, ckpt_path, baseline_path, label_name, layers_text;
  std::string spec_path, stopwords_path, labels_text = "positive,negative";
  std::size_t count = 0;
  Flag<int> custom_layers, scheme_layers;
  Flag<std::uint64_t> synth_seed, cloud_seed;
  Flag<std::size_t> top_k;
  bool keep_emoji = false;
  TrainFlags pretrain_train, custom_train, sweep_train, scheme_train;
  LabelerFlags label_labeler, gen_labeler, scheme_labeler;

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL comment file and write the accepted records");
  ingest->add_option("--input", input, "JSONL corpus")->required()->check(CLI::ExistingFile);
  ingest->add_option("--output", output, "Output JSONL")->required();

  auto* prep = app.add_subcommand("preprocess", "Clean, deduplicate and tokenize a JSONL comment file");
  prep->add_option("--input", input, "JSONL corpus")->required()->check(CLI::ExistingFile);
  prep->add_option("--output", output, "Output JSONL of cleaned comments")->required();
  prep->add_flag("--keep-emoji", keep_emoji, "Keep emoji as textual tokens instead of removing them");
  prep->add_option("--stopwords", stopwords_path, "Stopword file (default: shipped list)")->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "Write the synthetic generic and domain corpora");
  synth->add_option("--spec", spec_path, "Generator spec JSON (default: shipped spec)")->check(CLI::ExistingFile);
  add(synth, synth_seed, "--seed", "Generator seed (default: the spec's seed)");

  auto* label = app.add_subcommand("label", "Label comments through the labeler backend (x -> y-hat)");
  label->add_option("--input", input, "JSONL comments")->required()->check(CLI::ExistingFile);
  label->add_option("--output", output, "Labeled JSONL")->required();
  label_labeler.attach(label);

  auto* gen = app.add_subcommand("generate", "Ask the labeler backend for comments with a given label (y -> x-hat)");
  gen->add_option("--label", label_name, "positive, negative or neutral")->required();
  gen->add_option("--count", count, "Number of comments")->required();
  gen->add_option("--output", output, "Labeled JSONL")->required();
  gen_labeler.attach(gen);

  auto* pretrain = app.add_subcommand("pretrain", "Train the Base checkpoint on a generic labeled corpus");
  pretrain->add_option("--train", train_path, "Labeled JSONL (train split)")->required()->check(CLI::ExistingFile);
  pretrain->add_option("--output", output, "Checkpoint path")->required();
  pretrain_train.attach(pretrain);

  auto* custom = app.add_subcommand("customize", "Fine-tune the n layers nearest the output of a checkpoint");
  custom->add_option("--base", base_path, "Base checkpoint")->required()->check(CLI::ExistingFile);
  custom->add_option("--train", train_path, "Labeled JSONL (train split)")->required()->check(CLI::ExistingFile);
  custom->add_option("--output", output, "Checkpoint path")->required();
  add(custom, custom_layers, "--layers", "Trainable layers n (0 = keep Base; default: config)");
  custom_train.attach(custom);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled test set");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", test_path, "Labeled JSONL (test split)")->required()->check(CLI::ExistingFile);
  eval->add_option("--baseline", baseline_path, "Baseline checkpoint for improvement figures")->check(CLI::ExistingFile);
  eval->add_option("--output", output, "Report path (JSON; .csv and .txt are written beside it)")->required();

  auto* sweep = app.add_subcommand("sweep", "Customize and evaluate for several trainable-layer counts");
  sweep->add_option("--base", base_path, "Base checkpoint")->required()->check(CLI::ExistingFile);
  sweep->add_option("--train", train_path, "Labeled JSONL (train split)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--test", test_path, "Labeled JSONL (test split)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--layers", layers_text, "Comma-separated n values (default: config)");
  sweep->add_option("--output", output, "Table path (CSV; .txt and .json beside it)")->required();
  sweep_train.attach(sweep);

  auto* schemes = app.add_subcommand("compare-schemes", "Compare x -> y-hat labeling with y -> x-hat generation");
  schemes->add_option("--base", base_path, "Base checkpoint")->required()->check(CLI::ExistingFile);
  schemes->add_option("--comments", input, "Unlabeled JSONL comments")->required()->check(CLI::ExistingFile);
  schemes->add_option("--test", test_path, "Labeled JSONL (test split)")->required()->check(CLI::ExistingFile);
  schemes->add_option("--output", output, "Table path (CSV; .txt and .json beside it)")->required();
  add(schemes, scheme_layers, "--layers", "Trainable layers n (default: config)");
  scheme_train.attach(schemes);
  scheme_labeler.attach(schemes);

  auto* cloud = app.add_subcommand("wordcloud", "Predict sentiments and render per-sentiment word clouds");
  cloud->add_option("--checkpoint", ckpt_path, "Checkpoint used to assign labels")->required()->check(CLI::ExistingFile);
  cloud->add_option("--input", input, "JSONL comments")->required()->check(CLI::ExistingFile);
  cloud->add_option("--labels", labels_text, "Comma-separated sentiments to render (default positive,negative)");
  add(cloud, top_k, "--top-k", "Number of n-grams per cloud");
  add(cloud, cloud_seed, "--seed", "Placement seed");

  auto* pipe = app.add_subcommand("pipeline", "Offline end-to-end demo: synth, ingest, preprocess, label, pretrain, "
                                              "customize, eval, wordcloud");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig cfg = RunConfig::defaults();
    if (!config_path.empty()) cfg.load_ini(config_path);
    if (out_dir_opt->count() > 0) cfg.out_dir = out_dir;
    if (!spec_path.empty()) cfg.synth_spec = fs::path(spec_path);
    if (!stopwords_path.empty()) cfg.stopwords = fs::path(stopwords_path);
    if (keep_emoji) cfg.keep_emoji = true;
    synth_seed.apply(cfg.synth_seed);
    top_k.apply(cfg.top_k);
    cloud_seed.apply(cfg.cloud_seed);
    for (const LabelerFlags* f : {&label_labeler, &gen_labeler, &scheme_labeler}) f->apply(cfg.labeler);
    if (!layers_text.empty()) cfg.sweep_layers = parse_int_list(layers_text);
    pretrain_train.apply(cfg.pretrain);
    for (const TrainFlags* f : {&custom_train, &sweep_train, &scheme_train}) f->apply(cfg.customize);
    custom_layers.apply(cfg.customize.trainable_layers);
    scheme_layers.apply(cfg.customize.trainable_layers);
    cfg.validate();

    const TextPipeline pipeline = cfg.pipeline();
    const auto config_json = cfg.to_json();

    if (ingest->parsed()) {
      IngestResult in = ingest_jsonl(input);
      write_raw_jsonl(output, in.records);
      Manifest m("ingest", config_json);
      m.input(input);
      m.output(output);
      m.note("records", in.records.size());
      m.note("skipped_incomplete", in.skipped_incomplete);
      m.write(sibling(output, ".manifest.json"));
      fmt::print("ingested {} records, skipped {} incomplete\n", in.records.size(), in.skipped_incomplete);
    } else if (prep->parsed()) {
      IngestResult in = ingest_jsonl(input);
      Corpus corpus = preprocess(in.records, pipeline, {{fs::path(input).generic_string()}, ""});
      write_corpus_jsonl(output, corpus.comments);
      Manifest m("preprocess", config_json);
      m.input(input);
      m.output(output);
      m.note("records", in.records.size());
      m.note("kept", corpus.comments.size());
      m.write(sibling(output, ".manifest.json"));
      fmt::print("kept {} of {} records after cleaning and deduplication\n", corpus.comments.size(), in.records.size());
    } else if (synth->parsed()) {
      write_synth_corpora(cfg);
    } else if (label->parsed()) {
      auto backend = make_backend(cfg);
      auto comments = read_comments(input, pipeline);
      LabelRun r = llm_label(comments, *backend, cfg.labeler.policy);
      write_labeled_jsonl(output, r.dataset);
      std::string rejects;
      for (const auto& rej : r.rejects) {
        rejects += nlohmann::ordered_json{{"index", rej.index}, {"id", rej.id}, {"attempts", rej.attempts},
                                          {"error", rej.last_error}}
                       .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) +
                   "\n";
      }
      write_text_file(sibling(output, ".rejects.jsonl"), rejects);
      Manifest m("label", config_json);
      m.input(input);
      m.output(output);
      m.output(sibling(output, ".rejects.jsonl"));
      m.seed("labeler", cfg.labeler.seed);
      m.note("backend", backend->describe());
      m.note("prompt_template", std::string(kPromptTemplateVersion));
      m.write(sibling(output, ".manifest.json"));
      fmt::print("labeled {} comments, {} rejected\n", r.dataset.size(), r.rejects.size());
      if (!r.rejects.empty()) {
        fmt::print(stderr, "warning: {} comments rejected (see {}); first error: {}\n", r.rejects.size(),
                   sibling(output, ".rejects.jsonl").string(), r.rejects.front().last_error);
      }
    } else if (gen->parsed()) {
      auto l = parse_label(label_name);
      if (!l) throw ValidationError(fmt::format("unknown label '{}'", label_name));
      auto backend = make_backend(cfg);
      GenerateRun g = llm_generate(*l, count, *backend, cfg.labeler.policy, "gen", pipeline);
      LabeledDataset d{std::move(g.examples), Split::train};
      write_labeled_jsonl(output, d);
      Manifest m("generate", config_json);
      m.output(output);
      m.seed("labeler", cfg.labeler.seed);
      m.note("backend", backend->describe());
      m.note("shortfall", g.shortfall);
      m.write(sibling(output, ".manifest.json"));
      fmt::print("generated {} of {} comments", d.size(), count);
      if (g.shortfall > 0) fmt::print(" (warning: {} missing)", g.shortfall);
      fmt::print("\n");
    } else if (pretrain->parsed()) {
      LabeledDataset train = read_labeled_jsonl(train_path, Split::train, pipeline);
      const LabeledDataset* sets[] = {&train};
      Vocabulary vocab = build_vocab(std::span<const LabeledDataset* const>(sets), cfg.vocab_min_freq, cfg.vocab_max_size);
      TrainReport rep;
      Checkpoint base = pretrain_base(train, vocab, cfg.model, cfg.pretrain, &rep);
      save_checkpoint(base, output);
      write_text_file(sibling(output, ".report.json"), to_json(rep).dump(2) + "\n");
      Manifest m("pretrain", config_json);
      m.input(train_path);
      m.output(output);
      m.output(sibling(output, ".report.json"));
      m.seed("model", cfg.model.seed);
      m.seed("train", cfg.pretrain.seed);
      m.write(sibling(output, ".manifest.json"));
      fmt::print("pretrained on {} examples: final loss {:.4f}, train accuracy {}% ({:.1f}s)\n", rep.examples,
                 rep.epoch_loss.back(), format_1dp(rep.final_train_accuracy), rep.duration_seconds);
    } else if (custom->parsed()) {
      Checkpoint base = load_checkpoint(base_path);
      LabeledDataset train = read_labeled_jsonl(train_path, Split::train, pipeline);
      TrainReport rep;
      Checkpoint tuned = customize(base, train, cfg.customize, &rep);
      save_checkpoint(tuned, output);
      write_text_file(sibling(output, ".report.json"), to_json(rep).dump(2) + "\n");
      Manifest m("customize", config_json);
      m.input(base_path);
      m.input(train_path);
      m.output(output);
      m.output(sibling(output, ".report.json"));
      m.seed("train", cfg.customize.seed);
      m.write(sibling(output, ".manifest.json"));
      if (rep.noop) {
        fmt::print("n=0: checkpoint is the Base model unchanged\n");
      } else {
        fmt::print("customized {} of {} layers on {} examples: final loss {:.4f}, train accuracy {}%\n",
                   rep.trainable_layers, base.model.config().n_layers, rep.examples, rep.epoch_loss.back(),
                   format_1dp(rep.final_train_accuracy));
      }
    } else if (eval->parsed()) {
      Checkpoint ckpt = load_checkpoint(ckpt_path);
      LabeledDataset test = read_labeled_jsonl(test_path, Split::test, pipeline);
      std::optional<EvalReport> baseline;
      if (!baseline_path.empty()) baseline = evaluate(load_checkpoint(baseline_path), test);
      EvalReport r = evaluate(ckpt, test, baseline, baseline_path.empty() ? "base" : fs::path(baseline_path).stem().string());
      write_text_file(output, to_json(r).dump(2) + "\n");
      std::vector<CustomizationRow> rows;
      if (baseline) rows.push_back({fs::path(ckpt_path).stem().string(), baseline->accuracy, r.accuracy, std::nullopt});
      const std::string text = eval_text(r) + (rows.empty() ? "" : "\n" + customization_table(rows).text());
      write_text_file(sibling(output, ".txt"), text);
      write_text_file(sibling(output, ".csv"),
                      rows.empty() ? csv_table({"Accuracy"}, {{format_1dp(r.accuracy)}}) : customization_table(rows).csv());
      Manifest m("eval", config_json);
      m.input(ckpt_path);
      m.input(test_path);
      if (!baseline_path.empty()) m.input(baseline_path);
      m.output(output);
      m.output(sibling(output, ".txt"));
      m.output(sibling(output, ".csv"));
      m.write(sibling(output, ".manifest.json"));
      fmt::print("{}", text);
    } else if (sweep->parsed()) {
      Checkpoint base = load_checkpoint(base_path);
      LabeledDataset train = read_labeled_jsonl(train_path, Split::train, pipeline);
      LabeledDataset test = read_labeled_jsonl(test_path, Split::test, pipeline);
      if (cfg.sweep_layers.empty()) {
        for (std::size_t n = 0; n <= base.model.config().n_layers; ++n) cfg.sweep_layers.push_back(static_cast<int>(n));
      }
      const EvalReport base_eval = evaluate(base, test);
      auto rows = sweep_layers(base, train, test, cfg.sweep_layers, cfg.customize);
      const TableData table = sweep_table(base_eval.accuracy, rows);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& r : rows) {
        j.push_back({{"n", r.n}, {"total_layers", r.total_layers}, {"accuracy", r.accuracy},
                     {"improvement_points", r.improvement_points}, {"improvement_relative", r.improvement_relative}});
      }
      write_text_file(output, table.csv());
      write_text_file(sibling(output, ".txt"), table.text());
      write_text_file(sibling(output, ".json"), j.dump(2) + "\n");
      Manifest m("sweep", config_json);
      m.input(base_path);
      m.input(train_path);
      m.input(test_path);
      m.output(output);
      m.output(sibling(output, ".txt"));
      m.output(sibling(output, ".json"));
      m.seed("train", cfg.customize.seed);
      m.write(sibling(output, ".manifest.json"));
      print_table(table);
    } else if (schemes->parsed()) {
      Checkpoint base = load_checkpoint(base_path);
      auto comments = read_comments(input, pipeline);
      LabeledDataset test = read_labeled_jsonl(test_path, Split::test, pipeline);
      auto backend = make_backend(cfg);
      SchemeComparison cmp = compare_schemes(base, comments, *backend, test, cfg.customize, cfg.labeler.policy);
      const TableData table = scheme_table(cmp.rows);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& r : cmp.rows) {
        j.push_back({{"scheme", r.scheme}, {"accuracy", r.accuracy}, {"improvement_points", r.improvement_points},
                     {"improvement_relative", r.improvement_relative}, {"train_size", r.train_size}});
      }
      write_text_file(output, table.csv());
      write_text_file(sibling(output, ".txt"), table.text());
      write_text_file(sibling(output, ".json"), j.dump(2) + "\n");
      Manifest m("compare-schemes", config_json);
      m.input(base_path);
      m.input(input);
      m.input(test_path);
      m.output(output);
      m.output(sibling(output, ".txt"));
      m.output(sibling(output, ".json"));
      m.seed("labeler", cfg.labeler.seed);
      m.seed("train", cfg.customize.seed);
      m.note("backend", backend->describe());
      m.note("rejects", cmp.rejects);
      m.write(sibling(output, ".manifest.json"));
      print_table(table);
    } else if (cloud->parsed()) {
      std::vector<SentimentLabel> wanted;
      for (std::size_t start = 0; start <= labels_text.size();) {
        std::size_t comma = std::min(labels_text.find(',', start), labels_text.size());
        auto l = parse_label(labels_text.substr(start, comma - start));
        if (!l) throw ConfigError(fmt::format("unknown sentiment in --labels '{}'", labels_text));
        wanted.push_back(*l);
        start = comma + 1;
      }
      Checkpoint ckpt = load_checkpoint(ckpt_path);
      auto comments = read_comments(input, pipeline);
      Manifest m("wordcloud", config_json);
      m.input(ckpt_path);
      m.input(input);
      m.seed("wordcloud", cfg.cloud_seed);
      for (const fs::path& p : render_wordclouds(ckpt, comments, wanted, cfg, cfg.out_dir)) m.output(p);
      m.write(cfg.out_dir / "wordcloud.manifest.json");
    } else if (pipe->parsed()) {
      run_pipeline(cfg);
    }
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace alrn::cli
