#include "alrn/dataset.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/error.hpp"
#include "alrn/hash.hpp"

namespace alrn {

std::string_view split_key(Split s) noexcept { return s == Split::train ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view s) noexcept {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

std::string LabeledDataset::fingerprint() const {
  Sha256 h;
  h.field("alrn-dataset-v1");
  for (const LabeledExample& e : examples) {
    h.field(e.comment.id);
    h.field(e.comment.text);
    h.field(label_key(e.label));
    h.field(source_key(e.source));
  }
  return h.hex_digest();
}

std::array<std::size_t, kNumLabels> LabeledDataset::class_counts() const noexcept {
  std::array<std::size_t, kNumLabels> counts{};
  for (const LabeledExample& e : examples) ++counts[static_cast<std::size_t>(code(e.label))];
  return counts;
}

std::vector<std::string> LabeledDataset::texts() const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const LabeledExample& e : examples) out.push_back(e.comment.text);
  return out;
}

void write_labeled_jsonl(const std::filesystem::path& path, const LabeledDataset& dataset) {
  std::vector<RawComment> records;
  records.reserve(dataset.size());
  for (const LabeledExample& e : dataset.examples) {
    records.push_back({e.comment.id, e.comment.platform, e.comment.created_at, e.comment.text, e.label, e.source});
  }
  write_raw_jsonl(path, records);
}

LabeledDataset read_labeled_jsonl(const std::filesystem::path& path, Split split, const TextPipeline& pipeline) {
  IngestResult in = ingest_jsonl(path);
  LabeledDataset out;
  out.split = split;
  for (std::size_t i = 0; i < in.records.size(); ++i) {
    const RawComment& r = in.records[i];
    if (!r.label || !r.label_source) {
      throw ValidationError(fmt::format("{}: record '{}' has no label/label_source", path.string(), r.id));
    }
    auto clean = pipeline.to_clean(r);
    if (!clean) continue;
    out.examples.push_back({std::move(*clean), *r.label, *r.label_source});
  }
  return out;
}

std::string vocab_digest(const Vocabulary& vocab) { return sha256_hex(vocab.to_text()); }

EncodedDataset encode_dataset(const LabeledDataset& dataset, const Vocabulary& vocab, std::size_t max_len) {
  EncodedDataset out;
  out.inputs.reserve(dataset.size());
  out.labels.reserve(dataset.size());
  for (const LabeledExample& e : dataset.examples) {
    out.inputs.push_back(encode(e.comment.text, vocab, max_len));
    out.labels.push_back(code(e.label));
  }
  out.vocab_digest = vocab_digest(vocab);
  out.fingerprint = dataset.fingerprint();
  return out;
}

}  // namespace alrn
