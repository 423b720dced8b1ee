#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alrn/corpus.hpp"
#include "alrn/dataset.hpp"
#include "alrn/sentiment.hpp"

namespace alrn {

/// Something that answers labeling and generation requests with free text.
/// Implementations must tolerate concurrent calls from several threads.
/// Throw BackendError for retryable failures (transport, timeouts, server
/// errors) and BackendFatalError for authentication or configuration
/// problems, which abort the whole run.
class LabelerBackend {
 public:
  virtual ~LabelerBackend() = default;

  /// Raw response to label_prompt(text).
  virtual std::string label(std::string_view text) = 0;
  /// Raw response to generate_prompt(label, count): ideally one comment per line.
  virtual std::string generate(SentimentLabel label, std::size_t count) = 0;
  virtual std::string describe() const = 0;
};

inline constexpr std::string_view kPromptTemplateVersion = "v1";

/// Prompt template v1 for x -> y-hat labeling.
std::string label_prompt(std::string_view text);
/// Prompt template v1 for y -> x-hat generation.
std::string generate_prompt(SentimentLabel label, std::size_t count);

/// Case-insensitive scan for the words positive/negative/neutral. Exactly
/// one distinct label word must occur; none or several is a parse failure.
std::optional<SentimentLabel> parse_label_response(std::string_view response);

struct LabelerPolicy {
  int max_attempts = 3;         // per comment, covering parse and transport failures
  std::size_t max_in_flight = 4;  // concurrent backend calls
};

struct LabelReject {
  std::size_t index = 0;  // position in the input
  std::string id;
  int attempts = 0;
  std::string last_error;
};

struct LabelRun {
  LabeledDataset dataset;  // split train, source llm, input order
  std::vector<LabelReject> rejects;
};

/// x -> y-hat: labels every comment through the backend. Comments that still
/// fail after max_attempts go to rejects. BackendFatalError aborts the run.
LabelRun llm_label(std::span<const CleanComment> comments, LabelerBackend& backend,
                   const LabelerPolicy& policy = {});

struct GenerateRun {
  std::vector<LabeledExample> examples;  // source synthetic_generator
  std::size_t shortfall = 0;             // requested minus produced
  std::size_t bad_lines = 0;             // lines dropped as empty or duplicate
};

/// y -> x-hat: asks the backend for `count` comments expressing `label`. Each
/// usable line (list markers and quotes stripped, cleaned, non-empty, not a
/// repeat) becomes one example; missing lines are requested again up to
/// max_attempts times. Throws ValidationError when count < 1.
GenerateRun llm_generate(SentimentLabel label, std::size_t count, LabelerBackend& backend,
                         const LabelerPolicy& policy = {}, std::string_view id_prefix = "gen",
                         const TextPipeline& pipeline = TextPipeline::builtin());

/// word -> +1/-1. Keys containing a space match adjacent word pairs.
using Lexicon = std::map<std::string, int, std::less<>>;

/// Lines "word<TAB or space>value"; '#' comments. Throws ParseError.
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

/// Sum of lexicon values over the words of the lowercased text (no stemming)
/// and over adjacent word pairs; > 0 Positive, < 0 Negative, else Neutral.
/// Throws ValidationError for an empty lexicon.
SentimentLabel mock_lexicon_label(std::string_view text, const Lexicon& lexicon);
int lexicon_score(std::span<const std::string> words, const Lexicon& lexicon);

/// The common label when all three agree, otherwise nullopt (rejected).
std::optional<SentimentLabel> consensus(SentimentLabel a, SentimentLabel b, SentimentLabel c) noexcept;

using ConsensusItem = std::pair<CleanComment, std::optional<SentimentLabel>>;

/// Takes accepted comments in stream order until every class holds per_class
/// examples, skipping classes already full. Throws ValidationError naming each
/// class that falls short, and by how much, if the stream runs out.
LabeledDataset build_test_set(std::span<const ConsensusItem> stream, std::size_t per_class = 100);

}  // namespace alrn
