#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "alrn/model.hpp"
#include "alrn/tokenizer.hpp"

namespace alrn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMetadata {
  std::string stage = "init";  // init | base | customized
  int epochs_run = 0;
  std::uint64_t seed = 0;
  /// Fingerprints of every dataset the parameters have been trained on.
  std::vector<std::string> dataset_fingerprints;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
  Model model;
  Vocabulary vocab;
  TrainingMetadata metadata;
};

/// Layout: "ALRN", u32 LE version, u64 LE manifest length, UTF-8 JSON
/// manifest (config, vocabulary text, partition, metadata, tensor table with
/// byte offsets, blob length and SHA-256), then the little-endian float64
/// blob. Identical state always produces identical bytes.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);

/// Throws CheckpointVersionError, CheckpointTruncatedError (file shorter
/// than its header or declared blob), CheckpointLengthError (trailing bytes
/// or a tensor table that disagrees with the blob), CheckpointDigestError,
/// or CheckpointError for anything else malformed.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Canonical bytes of one tensor (shape header + LE values); used to compare
/// frozen parameters before and after training.
std::vector<std::uint8_t> tensor_bytes(const Tensor& t);

}  // namespace alrn
