#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "alrn/rng.hpp"
#include "alrn/text.hpp"
#include "test_support.hpp"

namespace {

using alrn::text::clean_text;

TEST(CleanText, DocumentedExamples) {
  EXPECT_EQ(clean_text("Check https://t.co/ab <b>Great</b>!\n\xF0\x9F\x98\x80"), "check great!");
  EXPECT_EQ(clean_text("\xF0\x9F\x98\x80\xF0\x9F\x98\x80"), "");
  EXPECT_EQ(clean_text("ADULT  Learning"), "adult learning");
}

TEST(CleanText, GoldenFixtures) {
  std::ifstream in(alrn::testing::fixture_path("clean_text_golden.jsonl"));
  ASSERT_TRUE(in) << "missing fixture file";
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const std::string input = j.at("input");
    const std::string expected = j.at("expected");
    EXPECT_EQ(clean_text(input), expected) << "fixture: " << j.at("name").get<std::string>();
    ++cases;
  }
  EXPECT_GE(cases, 25);
}

TEST(CleanText, KeepEmojiOption) {
  alrn::text::CleanOptions keep{true};
  EXPECT_EQ(clean_text("I \xF0\x9F\x98\x80 it", keep), "i emoji1f600 it");
  EXPECT_EQ(clean_text("ok\xF0\x9F\x98\x80\xF0\x9F\x91\x8D", keep), "ok emoji1f600 emoji1f44d");
}

TEST(CleanText, InvalidUtf8IsDropped) {
  EXPECT_EQ(clean_text("ab\xFF\xFE" "cd"), "abcd");
  EXPECT_EQ(clean_text("\xC3"), "");
}

// Fragments chosen to collide with the rules: partial URLs, tag brackets,
// emoji, invisible characters, case-mapped letters and stray bytes.
const char* const kFuzzPieces[] = {
    "a", "B", "z", " ", "  ", "\t", "\n", "<", ">", "/", "!", "<b>", "</", "http", "HTTPS", "://", "www.", "WWW.",
    ".", ":", "-", "+", "1", "\xF0\x9F\x98\x80", "\xE2\x9D\xA4", "\xEF\xB8\x8F", "\xE2\x80\x8B", "\xC3\x89",
    "\xCE\x94", "\xD0\x9F", "\xEF\xBC\xA6", "\xC2\xA0", "\xE2\x80\xA8", "\xFF", "\xC3", "\x07", "'", "?", "#",
};

TEST(CleanText, IdempotentOnFuzzedStrings) {
  alrn::Rng rng(20231);
  constexpr std::size_t kPieces = sizeof(kFuzzPieces) / sizeof(kFuzzPieces[0]);
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t n = rng.below(24);
    for (std::size_t k = 0; k < n; ++k) s += kFuzzPieces[rng.below(kPieces)];
    for (const bool keep : {false, true}) {
      const std::string once = clean_text(s, {keep});
      ASSERT_EQ(clean_text(once, {keep}), once) << "input #" << i << " keep_emoji=" << keep;
      ASSERT_EQ(once.find("  "), std::string::npos);
      if (!once.empty()) {
        ASSERT_NE(once.front(), ' ');
        ASSERT_NE(once.back(), ' ');
      }
    }
  }
}

TEST(Utf8, RoundTrip) {
  const std::string s = "caf\xC3\xA9 \xF0\x9F\x98\x80 \xE2\x82\xAC";
  EXPECT_EQ(alrn::text::encode_utf8(alrn::text::decode_utf8(s)), s);
  EXPECT_EQ(alrn::text::decode_utf8(s).size(), 8u);
}

TEST(SplitWords, SeparatesOnNonWordRuns) {
  using V = std::vector<std::string>;
  EXPECT_EQ(alrn::text::split_words("work-life balance, isn't it?"), (V{"work", "life", "balance", "isn", "t", "it"}));
  EXPECT_EQ(alrn::text::split_words("  ...  "), V{});
  EXPECT_EQ(alrn::text::split_words("\xC3\xA9t\xC3\xA9 42"), (V{"\xC3\xA9t\xC3\xA9", "42"}));
}

}  // namespace
