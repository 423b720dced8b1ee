#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "alrn/error.hpp"
#include "alrn/insights.hpp"

namespace {

using alrn::CleanComment;
using alrn::FrequencyTable;

CleanComment with_tokens(std::vector<std::string> tokens) {
  CleanComment c;
  c.text = "x";
  c.word_tokens = std::move(tokens);
  return c;
}

// Nested-loop recount, written without maps of pairs or helpers from the library.
std::map<std::string, std::size_t> brute_force(const std::vector<CleanComment>& comments) {
  std::map<std::string, std::size_t> out;
  std::vector<std::string> seen;
  for (const auto& c : comments) {
    for (std::size_t i = 0; i < c.word_tokens.size(); ++i) {
      seen.push_back(c.word_tokens[i]);
      if (i + 1 < c.word_tokens.size()) seen.push_back(c.word_tokens[i] + " " + c.word_tokens[i + 1]);
    }
  }
  for (const auto& g : seen) {
    if (out.count(g)) continue;
    std::size_t n = 0;
    for (const auto& h : seen) n += (h == g);
    out[g] = n;
  }
  return out;
}

TEST(Ngrams, MatchBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words{"time", "job", "famili", "cours", "great", "bad", "learn", "kid"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CleanComment> comments(rng() % 12);
    for (auto& c : comments) {
      const std::size_t len = rng() % 7;
      for (std::size_t i = 0; i < len; ++i) c.word_tokens.push_back(words[rng() % words.size()]);
    }
    const auto table = alrn::count_ngrams(comments);
    ASSERT_EQ(table.counts, brute_force(comments)) << "trial " << trial;
    ASSERT_EQ(table.total_comments, comments.size());
  }
}

TEST(Ngrams, RepeatedPhraseAcrossComments) {
  std::vector<CleanComment> comments;
  for (int i = 0; i < 5; ++i) comments.push_back(with_tokens({"time", "job"}));
  comments.push_back(with_tokens({"job"}));
  const auto table = alrn::count_ngrams(comments, {}, alrn::SentimentLabel::positive);
  EXPECT_EQ(table.counts.at("time job"), 5u);
  EXPECT_EQ(table.counts.at("job"), 6u);
  EXPECT_EQ(table.sentiment, alrn::SentimentLabel::positive);
}

TEST(Ngrams, SingleCommentRepeatedWord) {
  const std::vector<CleanComment> comments{with_tokens({"a", "b", "a"})};
  const auto table = alrn::count_ngrams(comments);
  const std::map<std::string, std::size_t> expected{{"a", 2}, {"b", 1}, {"a b", 1}, {"b a", 1}};
  EXPECT_EQ(table.counts, expected);
}

TEST(Ngrams, OrdersCanBeSelectedAndBigramsStayInsideAComment) {
  const std::vector<CleanComment> comments{with_tokens({"a", "b"}), with_tokens({"c"})};
  EXPECT_EQ(alrn::count_ngrams(comments, {true, false}).counts.size(), 3u);
  const auto bigrams = alrn::count_ngrams(comments, {false, true}).counts;
  EXPECT_EQ(bigrams, (std::map<std::string, std::size_t>{{"a b", 1}}));
}

TEST(TopK, CountDescendingThenLexicographic) {
  FrequencyTable t;
  t.counts = {{"b", 3}, {"a", 3}, {"c", 5}, {"d", 1}, {"aa", 3}};
  const auto top = alrn::top_k(t, 4);
  const std::vector<alrn::FrequencyEntry> expected{{"c", 5}, {"a", 3}, {"aa", 3}, {"b", 3}};
  EXPECT_EQ(top, expected);
  EXPECT_EQ(alrn::top_k(t, 100).size(), 5u);
  EXPECT_TRUE(alrn::top_k(FrequencyTable{}, 3).empty());
  EXPECT_THROW(alrn::top_k(t, 0), alrn::ValidationError);
}

TEST(TopK, IsATotalOrderUnderShuffledInsertion) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    FrequencyTable t;
    for (int i = 0; i < 40; ++i) t.counts["w" + std::to_string(rng() % 1000)] = 1 + rng() % 4;
    const auto top = alrn::top_k(t, t.counts.size());
    for (std::size_t i = 1; i < top.size(); ++i) {
      const auto& p = top[i - 1];
      const auto& q = top[i];
      ASSERT_TRUE(p.second > q.second || (p.second == q.second && p.first < q.first));
    }
  }
}

FrequencyTable sample_table() {
  FrequencyTable t;
  t.sentiment = alrn::SentimentLabel::negative;
  t.total_comments = 40;
  t.counts = {{"time job", 100}, {"famili time", 25}, {"cours", 16}, {"kid", 9}, {"learn", 4}};
  return t;
}

TEST(WordCloud, FontSizeFollowsSquareRootOfCount) {
  alrn::WordCloudOptions o;
  o.min_font = 1;
  const auto cloud = alrn::render_wordcloud(sample_table(), 5, 1, o);
  ASSERT_EQ(cloud.words.size(), 5u);
  EXPECT_EQ(cloud.words[0].ngram, "time job");
  EXPECT_DOUBLE_EQ(cloud.words[0].font_size, o.max_font);
  EXPECT_NEAR(cloud.words[0].font_size / cloud.words[1].font_size, 2.0, 1e-12);
  EXPECT_NEAR(cloud.words[0].font_size / cloud.words[4].font_size, 5.0, 1e-12);
}

TEST(WordCloud, MinimumFontClampsSmallCounts) {
  alrn::WordCloudOptions o;
  o.min_font = 20;
  const auto cloud = alrn::render_wordcloud(sample_table(), 5, 1, o);
  EXPECT_DOUBLE_EQ(cloud.words[4].font_size, 20.0);
}

TEST(WordCloud, PlacementsNeverOverlap) {
  const auto cloud = alrn::render_wordcloud(sample_table(), 5, 9);
  for (std::size_t i = 0; i < cloud.words.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.words.size(); ++j) {
      const auto& a = cloud.words[i];
      const auto& b = cloud.words[j];
      const bool apart = std::abs(a.x - b.x) * 2 >= a.box_width + b.box_width - 1e-9 ||
                         std::abs(a.y - b.y) * 2 >= a.box_height + b.box_height - 1e-9;
      EXPECT_TRUE(apart) << a.ngram << " / " << b.ngram;
    }
  }
}

TEST(WordCloud, DeterministicInSeed) {
  const auto a = alrn::render_wordcloud(sample_table(), 4, 7);
  const auto b = alrn::render_wordcloud(sample_table(), 4, 7);
  EXPECT_EQ(a.svg, b.svg);
  EXPECT_EQ(a.sidecar_json, b.sidecar_json);
  const auto c = alrn::render_wordcloud(sample_table(), 4, 8);
  EXPECT_NE(a.svg, c.svg);
}

TEST(WordCloud, SidecarListsMinOfKAndTableSize) {
  for (std::size_t k : {1u, 3u, 5u, 50u}) {
    const auto cloud = alrn::render_wordcloud(sample_table(), k, 2);
    const auto side = nlohmann::json::parse(cloud.sidecar_json);
    ASSERT_EQ(side["words"].size(), std::min<std::size_t>(k, 5));
    EXPECT_EQ(side["sentiment"], "negative");
    for (const auto& w : side["words"]) {
      for (const char* key : {"ngram", "count", "font_size", "x", "y"}) EXPECT_TRUE(w.contains(key)) << key;
    }
  }
}

TEST(WordCloud, EmptyTableStillGivesAValidDocument) {
  const auto cloud = alrn::render_wordcloud(FrequencyTable{}, 10, 1);
  EXPECT_TRUE(cloud.words.empty());
  EXPECT_NE(cloud.svg.find("<svg"), std::string::npos);
  EXPECT_NE(cloud.svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(cloud.svg.find("<text"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(cloud.sidecar_json)["words"].empty());
}

TEST(WordCloud, EscapesMarkup) {
  FrequencyTable t;
  t.counts = {{"a<b&c", 2}};
  const auto cloud = alrn::render_wordcloud(t, 1, 1);
  EXPECT_NE(cloud.svg.find("a&lt;b&amp;c"), std::string::npos);
  EXPECT_THROW(alrn::render_wordcloud(t, 0, 1), alrn::ValidationError);
}

}  // namespace
