#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "alrn/labeling.hpp"

namespace alrn {

/// Slot-filling sentence templates. "{pos}", "{neg}" and "{topic}" are
/// replaced by words drawn from the corresponding pool.
struct TemplateSet {
  std::array<std::vector<std::string>, kNumLabels> by_label;  // indexed by label code
};

struct MockBackendOptions {
  Lexicon lexicon;             // labels responses via mock_lexicon_label
  double noise_rate = 0.0;     // fraction of texts answered with a wrong label
  double garble_rate = 0.0;    // fraction of calls answered with an unparseable reply
  std::uint64_t seed = 1;
  // Template generator used for generate().
  TemplateSet templates;
  std::vector<std::string> positive_words;
  std::vector<std::string> negative_words;
  std::vector<std::string> topic_words;
};

/// Offline stand-in for a language-model labeler. Labels come from the
/// lexicon; noise is keyed by a hash of (seed, text), so a text always gets
/// the same answer regardless of call order or thread. Garbling is keyed by
/// (seed, text, how many times that text was asked) so retries can succeed.
/// Generation is deliberately low-diversity: template sentences with slots
/// filled from the generic word pools, drawn from a seeded stream per call.
class MockBackend final : public LabelerBackend {
 public:
  explicit MockBackend(MockBackendOptions options);

  std::string label(std::string_view text) override;
  std::string generate(SentimentLabel label, std::size_t count) override;
  std::string describe() const override;

  /// Default templates for the three labels.
  static TemplateSet default_templates();

 private:
  MockBackendOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::uint64_t, std::less<>> label_calls_;
  std::array<std::uint64_t, kNumLabels> generate_calls_{};
};

}  // namespace alrn
