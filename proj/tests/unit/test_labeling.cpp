#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "alrn/backend.hpp"
#include "alrn/error.hpp"
#include "alrn/labeling.hpp"
#include "alrn/synth.hpp"
#include "test_support.hpp"

namespace {

using alrn::SentimentLabel;
using alrn::testing::comment;
using alrn::testing::example;

TEST(ParseLabel, Responses) {
  EXPECT_EQ(alrn::parse_label_response("Positive"), SentimentLabel::positive);
  EXPECT_EQ(alrn::parse_label_response("sentiment: NEGATIVE."), SentimentLabel::negative);
  EXPECT_EQ(alrn::parse_label_response("  neutral\n"), SentimentLabel::neutral);
  EXPECT_EQ(alrn::parse_label_response("Positive. Definitely positive!"), SentimentLabel::positive);
  EXPECT_FALSE(alrn::parse_label_response("both positive and negative"));
  EXPECT_FALSE(alrn::parse_label_response("no idea"));
  EXPECT_FALSE(alrn::parse_label_response("positively"));
  EXPECT_FALSE(alrn::parse_label_response(""));
}

TEST(Prompts, ContainTheCommentAndLabels) {
  const auto p = alrn::label_prompt("the course was fine");
  EXPECT_NE(p.find("the course was fine"), std::string::npos);
  for (const char* w : {"Positive", "Negative", "Neutral"}) EXPECT_NE(p.find(w), std::string::npos);
  EXPECT_NE(alrn::generate_prompt(SentimentLabel::negative, 5).find("5"), std::string::npos);
}

// Scripted backend: replies from a per-text queue, then a fixed default.
class ScriptedBackend : public alrn::LabelerBackend {
 public:
  std::map<std::string, std::vector<std::string>, std::less<>> script;
  std::string fallback = "Neutral";
  std::atomic<int> calls{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
  bool slow = false;

  std::string label(std::string_view text) override {
    ++calls;
    const int now = ++in_flight;
    int seen = max_in_flight.load();
    while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
    }
    if (slow) std::this_thread::sleep_for(std::chrono::milliseconds(2 + static_cast<int>(text.size() % 5)));
    std::string reply;
    {
      std::lock_guard lock(mutex_);
      auto it = script.find(text);
      if (it != script.end() && !it->second.empty()) {
        reply = it->second.front();
        it->second.erase(it->second.begin());
      } else {
        reply = fallback;
      }
    }
    --in_flight;
    if (reply == "!transport") throw alrn::BackendError("connection reset");
    if (reply == "!auth") throw alrn::BackendFatalError("401 unauthorized");
    return reply;
  }
  std::string generate(SentimentLabel, std::size_t) override { return generated; }
  std::string describe() const override { return "scripted"; }

  std::string generated;

 private:
  std::mutex mutex_;
};

std::vector<alrn::CleanComment> comments(std::initializer_list<const char*> texts) {
  std::vector<alrn::CleanComment> out;
  int i = 0;
  for (const char* t : texts) out.push_back(comment("c" + std::to_string(i++), t));
  return out;
}

TEST(LlmLabel, RetriesThenSucceeds) {
  ScriptedBackend b;
  b.script["alpha"] = {"hmm", "!transport", "Positive"};
  auto run = alrn::llm_label(comments({"alpha"}), b);
  ASSERT_EQ(run.dataset.size(), 1u);
  EXPECT_EQ(run.dataset.examples[0].label, SentimentLabel::positive);
  EXPECT_EQ(run.dataset.examples[0].source, alrn::LabelSource::llm);
  EXPECT_TRUE(run.rejects.empty());
  EXPECT_EQ(b.calls.load(), 3);
}

TEST(LlmLabel, PersistentAmbiguityGoesToRejects) {
  ScriptedBackend b;
  b.script["beta"] = {"both positive and negative", "both positive and negative", "both positive and negative"};
  auto run = alrn::llm_label(comments({"alpha", "beta", "gamma"}), b);
  EXPECT_EQ(run.dataset.size(), 2u);
  ASSERT_EQ(run.rejects.size(), 1u);
  EXPECT_EQ(run.rejects[0].index, 1u);
  EXPECT_EQ(run.rejects[0].id, "c1");
  EXPECT_EQ(run.rejects[0].attempts, 3);
  EXPECT_FALSE(run.rejects[0].last_error.empty());
}

TEST(LlmLabel, AuthFailureAbortsTheRun) {
  ScriptedBackend b;
  b.script["gamma"] = {"!auth"};
  EXPECT_THROW(alrn::llm_label(comments({"alpha", "beta", "gamma", "delta"}), b), alrn::BackendFatalError);
}

TEST(LlmLabel, ConcurrentCallsAreResequencedAndBounded) {
  ScriptedBackend b;
  b.slow = true;
  std::vector<alrn::CleanComment> in;
  for (int i = 0; i < 40; ++i) {
    const std::string text = "comment number " + std::to_string(i) + std::string(static_cast<std::size_t>(i % 7), 'x');
    in.push_back(comment("id" + std::to_string(i), text));
    b.script[text] = {i % 3 == 0 ? "Positive" : i % 3 == 1 ? "Negative" : "Neutral"};
  }
  alrn::LabelerPolicy policy;
  policy.max_in_flight = 3;
  auto run = alrn::llm_label(in, b, policy);
  ASSERT_EQ(run.dataset.size(), 40u);
  for (int i = 0; i < 40; ++i) {
    EXPECT_EQ(run.dataset.examples[static_cast<std::size_t>(i)].comment.id, "id" + std::to_string(i));
    EXPECT_EQ(alrn::code(run.dataset.examples[static_cast<std::size_t>(i)].label), i % 3);
  }
  EXPECT_LE(b.max_in_flight.load(), 3);
}

alrn::MockBackendOptions offline(std::uint64_t seed = 1) {
  return alrn::mock_backend_options(alrn::builtin_synth_spec(), seed);
}

TEST(LlmGenerate, ThreeDistinctPositiveComments) {
  alrn::MockBackend backend(offline());
  auto run = alrn::llm_generate(SentimentLabel::positive, 3, backend);
  ASSERT_EQ(run.examples.size(), 3u);
  std::set<std::string> texts;
  for (const auto& e : run.examples) {
    EXPECT_EQ(e.label, SentimentLabel::positive);
    EXPECT_EQ(e.source, alrn::LabelSource::synthetic_generator);
    texts.insert(e.comment.text);
  }
  EXPECT_EQ(texts.size(), 3u);
  EXPECT_EQ(run.shortfall, 0u);
}

TEST(LlmGenerate, ZeroCountIsAPreconditionError) {
  alrn::MockBackend backend(offline());
  EXPECT_THROW(alrn::llm_generate(SentimentLabel::neutral, 0, backend), alrn::ValidationError);
}

TEST(LlmGenerate, DeterministicForASeed) {
  alrn::MockBackend a(offline(42)), b(offline(42));
  auto ra = alrn::llm_generate(SentimentLabel::negative, 8, a);
  auto rb = alrn::llm_generate(SentimentLabel::negative, 8, b);
  ASSERT_EQ(ra.examples.size(), rb.examples.size());
  for (std::size_t i = 0; i < ra.examples.size(); ++i) EXPECT_EQ(ra.examples[i], rb.examples[i]);
}

TEST(LlmGenerate, ShortfallWhenTheBackendRunsDry) {
  ScriptedBackend b;
  b.generated = "1. \"Loved it\"\n- loved it\n\n* Great pacing\n";
  auto run = alrn::llm_generate(SentimentLabel::positive, 5, b);
  ASSERT_EQ(run.examples.size(), 2u);
  EXPECT_EQ(run.examples[0].comment.text, "loved it");
  EXPECT_EQ(run.examples[1].comment.text, "great pacing");
  EXPECT_EQ(run.shortfall, 3u);
  EXPECT_GT(run.bad_lines, 0u);
}

alrn::Lexicon small_lexicon() { return alrn::parse_lexicon("love 1\ngreat +1\nhate -1\n# note\nnot good -1\n"); }

TEST(MockLexicon, Rules) {
  const auto lex = small_lexicon();
  EXPECT_EQ(alrn::mock_lexicon_label("love this great course", lex), SentimentLabel::positive);
  EXPECT_EQ(alrn::mock_lexicon_label("hate deadlines", lex), SentimentLabel::negative);
  EXPECT_EQ(alrn::mock_lexicon_label("the course starts monday", lex), SentimentLabel::neutral);
  EXPECT_EQ(alrn::mock_lexicon_label("love it, hate it", lex), SentimentLabel::neutral);
  EXPECT_EQ(alrn::mock_lexicon_label("Not good at all", lex), SentimentLabel::negative);
  EXPECT_THROW(alrn::mock_lexicon_label("x", alrn::Lexicon{}), alrn::ValidationError);
}

TEST(Lexicon, ParseErrors) {
  EXPECT_THROW(alrn::parse_lexicon("love 2\n"), alrn::ParseError);
  EXPECT_THROW(alrn::parse_lexicon("Love 1\n"), alrn::ParseError);
  EXPECT_THROW(alrn::parse_lexicon("love\n"), alrn::ParseError);
  EXPECT_EQ(small_lexicon().size(), 4u);
}

TEST(MockBackend, NoiseIsKeyedByText) {
  alrn::MockBackendOptions o;
  o.lexicon = small_lexicon();
  o.noise_rate = 0.5;
  o.seed = 9;
  alrn::MockBackend a(o), b(o);
  int flipped = 0;
  for (int i = 0; i < 200; ++i) {
    const std::string text = "love item " + std::to_string(i);
    const std::string reply = a.label(text);
    EXPECT_EQ(reply, a.label(text));
    EXPECT_EQ(reply, b.label(text));
    flipped += reply != "Positive";
  }
  EXPECT_GT(flipped, 60);
  EXPECT_LT(flipped, 140);
}

TEST(MockBackend, GarbledRepliesRecoverOnRetry) {
  alrn::MockBackendOptions o;
  o.lexicon = small_lexicon();
  o.garble_rate = 0.5;
  alrn::MockBackend backend(o);
  std::vector<alrn::CleanComment> in;
  for (int i = 0; i < 60; ++i) in.push_back(comment("g" + std::to_string(i), "great thing " + std::to_string(i)));
  alrn::LabelerPolicy policy;
  policy.max_attempts = 10;
  auto run = alrn::llm_label(in, backend, policy);
  EXPECT_EQ(run.dataset.size() + run.rejects.size(), 60u);
  EXPECT_GE(run.dataset.size(), 58u);
  for (const auto& e : run.dataset.examples) EXPECT_EQ(e.label, SentimentLabel::positive);
}

// Brute force over all 3^3 annotator triples.
TEST(Consensus, ExactlyTheThreeUnanimousTriplesAreAccepted) {
  int accepted = 0;
  for (auto a : alrn::kAllLabels) {
    for (auto b : alrn::kAllLabels) {
      for (auto c : alrn::kAllLabels) {
        const auto r = alrn::consensus(a, b, c);
        const bool unanimous = a == b && b == c;
        EXPECT_EQ(r.has_value(), unanimous);
        if (r) {
          EXPECT_EQ(*r, a);
          ++accepted;
        }
      }
    }
  }
  EXPECT_EQ(accepted, 3);
  EXPECT_EQ(alrn::consensus(SentimentLabel::positive, SentimentLabel::positive, SentimentLabel::positive),
            SentimentLabel::positive);
  EXPECT_FALSE(alrn::consensus(SentimentLabel::positive, SentimentLabel::positive, SentimentLabel::negative));
}

std::vector<alrn::ConsensusItem> stream(std::array<int, 3> per_class, int rejected_every = 0) {
  std::vector<alrn::ConsensusItem> out;
  int n = 0;
  std::array<int, 3> left = per_class;
  while (left[0] + left[1] + left[2] > 0) {
    for (int c = 0; c < 3; ++c) {
      if (left[static_cast<std::size_t>(c)] == 0) continue;
      if (rejected_every > 0 && n % rejected_every == 0) {
        out.emplace_back(comment("r" + std::to_string(n), "rejected " + std::to_string(n)), std::nullopt);
        ++n;
      }
      out.emplace_back(comment("s" + std::to_string(n), "text " + std::to_string(n)), alrn::label_from_code(c));
      --left[static_cast<std::size_t>(c)];
      ++n;
    }
  }
  return out;
}

TEST(BuildTestSet, BalancedThreeHundred) {
  auto ds = alrn::build_test_set(stream({130, 150, 110}, 4));
  EXPECT_EQ(ds.size(), 300u);
  EXPECT_EQ(ds.class_counts(), (std::array<std::size_t, 3>{100, 100, 100}));
  EXPECT_EQ(ds.split, alrn::Split::test);
  for (const auto& e : ds.examples) EXPECT_EQ(e.source, alrn::LabelSource::expert_consensus);
}

TEST(BuildTestSet, ShortfallNamesTheClass) {
  try {
    alrn::build_test_set(stream({120, 120, 40}));
    FAIL() << "expected a quota error";
  } catch (const alrn::ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Neutral short by 60"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("Positive short"), std::string::npos) << msg;
  }
}

TEST(BuildTestSet, FullClassesAreSkipped) {
  // Positive fills first; later positives are skipped and the other classes still fill.
  std::vector<alrn::ConsensusItem> s;
  for (int i = 0; i < 5; ++i) s.emplace_back(comment("p" + std::to_string(i), "p" + std::to_string(i)), SentimentLabel::positive);
  for (int i = 0; i < 2; ++i) s.emplace_back(comment("n" + std::to_string(i), "n" + std::to_string(i)), SentimentLabel::negative);
  for (int i = 0; i < 2; ++i) s.emplace_back(comment("u" + std::to_string(i), "u" + std::to_string(i)), SentimentLabel::neutral);
  auto ds = alrn::build_test_set(s, 2);
  EXPECT_EQ(ds.size(), 6u);
  EXPECT_EQ(ds.examples[0].comment.id, "p0");
  EXPECT_EQ(ds.examples[2].comment.id, "n0");
}

}  // namespace
