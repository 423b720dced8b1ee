#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "alrn/checkpoint.hpp"
#include "alrn/corpus.hpp"
#include "alrn/synth.hpp"
#include "run_config.hpp"

namespace alrn::cli {

/// Writes the five synthetic datasets to <out>/data and a manifest beside
/// them. Returns the corpora that were written.
SynthCorpora write_synth_corpora(const RunConfig& cfg);

/// Raw comments as they might arrive from a platform export: the given texts
/// decorated with URLs, markup, emoji, stray case and whitespace, plus one
/// empty record and one exact duplicate. Deterministic in seed.
std::vector<RawComment> roughen_comments(std::span<const LabeledExample> examples, std::uint64_t seed);

/// Assigns each comment the checkpoint's predicted sentiment and writes
/// <dir>/<sentiment>.svg and .json for every requested sentiment. Returns the
/// written paths.
std::vector<std::filesystem::path> render_wordclouds(const Checkpoint& ckpt, std::span<const CleanComment> comments,
                                                     std::span<const SentimentLabel> sentiments, const RunConfig& cfg,
                                                     const std::filesystem::path& dir);

/// Offline end-to-end run into cfg.out_dir using the mock labeler.
void run_pipeline(const RunConfig& cfg);

}  // namespace alrn::cli
