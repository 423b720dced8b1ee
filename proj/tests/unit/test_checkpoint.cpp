#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "alrn/checkpoint.hpp"
#include "alrn/error.hpp"
#include "test_support.hpp"

namespace {

using alrn::Checkpoint;

Checkpoint tiny_checkpoint(int trainable = 2) {
  std::vector<std::string> texts{"great course love it", "boring deadline hate", "the lecture is on monday"};
  auto vocab = alrn::build_vocab(std::span<const std::string>(texts), 1, 100);
  alrn::ModelConfig c;
  c.vocab_size = vocab.size();
  c.max_len = 8;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers = 2;
  c.d_ff = 16;
  Checkpoint ck{alrn::with_trainable(alrn::init_model(c), trainable), vocab, {"base", 10, 11, {"abc"}}};
  return ck;
}

// Header: 4 magic bytes, u32 version, u64 manifest length.
std::uint64_t manifest_length(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | bytes[8 + static_cast<std::size_t>(i)];
  return n;
}

std::vector<std::uint8_t> with_manifest(const std::vector<std::uint8_t>& bytes, const nlohmann::json& manifest) {
  const std::uint64_t old_len = manifest_length(bytes);
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(text.size() >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 16 + static_cast<std::ptrdiff_t>(old_len), bytes.end());
  return out;
}

nlohmann::json manifest_of(const std::vector<std::uint8_t>& bytes) {
  const auto len = manifest_length(bytes);
  return nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  const Checkpoint ck = tiny_checkpoint(1);
  const auto bytes = alrn::serialize_checkpoint(ck);
  const Checkpoint back = alrn::parse_checkpoint(bytes);
  EXPECT_EQ(back.model.config(), ck.model.config());
  EXPECT_EQ(back.model.partition(), ck.model.partition());
  EXPECT_EQ(back.vocab, ck.vocab);
  EXPECT_EQ(back.metadata, ck.metadata);
  auto a = ck.model.parameters();
  auto b = back.model.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(alrn::bit_equal(*a[i].tensor, *b[i].tensor)) << a[i].name;
  EXPECT_EQ(alrn::serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, SavingTwiceGivesIdenticalFiles) {
  const auto dir = alrn::testing::scratch_dir("ckpt-twice");
  const Checkpoint ck = tiny_checkpoint();
  alrn::save_checkpoint(ck, dir / "a.ckpt");
  alrn::save_checkpoint(ck, dir / "b.ckpt");
  std::ifstream a(dir / "a.ckpt", std::ios::binary), b(dir / "b.ckpt", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
}

TEST(Checkpoint, PredictionsSurviveSaveAndLoad) {
  const auto dir = alrn::testing::scratch_dir("ckpt-predict");
  const Checkpoint ck = tiny_checkpoint();
  alrn::save_checkpoint(ck, dir / "m.ckpt");
  const Checkpoint back = alrn::load_checkpoint(dir / "m.ckpt");
  alrn::Rng rng(17);
  const auto words = ck.vocab.words();
  for (int i = 0; i < 100; ++i) {
    std::string text;
    for (std::size_t k = 0, n = 1 + rng.below(7); k < n; ++k) text += words[3 + rng.below(words.size() - 3)] + " ";
    auto a = alrn::predict(ck.model, ck.vocab, text);
    auto b = alrn::predict(back.model, back.vocab, text);
    ASSERT_EQ(a.label, b.label);
    ASSERT_EQ(a.probabilities, b.probabilities);
  }
}

TEST(Checkpoint, TruncationIsDetected) {
  auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  bytes.pop_back();
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointTruncatedError);
  bytes.resize(12);
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointTruncatedError);
  bytes.resize(2);
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointTruncatedError);
}

TEST(Checkpoint, VersionMismatch) {
  auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  bytes[4] = 2;
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointVersionError);
}

TEST(Checkpoint, TrailingBytesAreALengthError) {
  auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  bytes.push_back(0);
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointLengthError);
}

TEST(Checkpoint, TensorTableDisagreeingWithBlob) {
  const auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  auto m = manifest_of(bytes);
  m["tensors"][0]["bytes"] = m["tensors"][0]["bytes"].get<std::size_t>() - 8;
  EXPECT_THROW(alrn::parse_checkpoint(with_manifest(bytes, m)), alrn::CheckpointLengthError);
}

TEST(Checkpoint, CorruptedBlob) {
  auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  bytes[bytes.size() - 3] ^= 0x40;
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointDigestError);
}

TEST(Checkpoint, BadMagicAndMissingFile) {
  auto bytes = alrn::serialize_checkpoint(tiny_checkpoint());
  bytes[0] = 'X';
  EXPECT_THROW(alrn::parse_checkpoint(bytes), alrn::CheckpointError);
  EXPECT_THROW(alrn::load_checkpoint("/nonexistent/x.ckpt"), alrn::IoError);
}

TEST(Checkpoint, ManifestIsSelfDescribing) {
  const auto m = manifest_of(alrn::serialize_checkpoint(tiny_checkpoint(1)));
  EXPECT_EQ(m.at("format"), "alrn-checkpoint");
  EXPECT_EQ(m.at("metadata").at("stage"), "base");
  EXPECT_TRUE(m.at("tensors").is_array());
  EXPECT_EQ(m.at("tensors")[0].at("name"), "embed.token");
}

}  // namespace
