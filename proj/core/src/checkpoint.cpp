#include "alrn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/error.hpp"
#include "alrn/hash.hpp"

namespace alrn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'A', 'L', 'R', 'N'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

void put_doubles(std::vector<std::uint8_t>& out, const Tensor& t) {
  for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

json config_json(const ModelConfig& c) {
  return json{{"vocab_size", c.vocab_size}, {"max_len", c.max_len}, {"d_model", c.d_model},
              {"n_heads", c.n_heads},       {"n_layers", c.n_layers}, {"d_ff", c.d_ff},
              {"dropout_rate", c.dropout_rate}, {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::vector<std::uint8_t> tensor_bytes(const Tensor& t) {
  std::vector<std::uint8_t> out;
  put_u64(out, t.rank());
  for (std::size_t d : t.shape()) put_u64(out, d);
  put_doubles(out, t);
  return out;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  const Model& m = ckpt.model;
  if (m.config().vocab_size != ckpt.vocab.size()) {
    throw ValidationError(fmt::format("checkpoint: model vocab_size {} but vocabulary has {} entries",
                                      m.config().vocab_size, ckpt.vocab.size()));
  }
  std::vector<std::uint8_t> blob;
  json tensors = json::array();
  for (const ConstParamRef& p : m.parameters()) {
    tensors.push_back({{"name", p.name},
                       {"shape", p.tensor->shape()},
                       {"offset", blob.size()},
                       {"bytes", p.tensor->size() * sizeof(double)}});
    put_doubles(blob, *p.tensor);
  }
  const Partition& part = m.partition();
  json manifest{
      {"format", "alrn-checkpoint"},
      {"config", config_json(m.config())},
      {"vocabulary", ckpt.vocab.to_text()},
      {"partition", {{"layers", part.layers}, {"embeddings", part.embeddings}, {"head", part.head}}},
      {"metadata",
       {{"stage", ckpt.metadata.stage},
        {"epochs_run", ckpt.metadata.epochs_run},
        {"seed", ckpt.metadata.seed},
        {"dataset_fingerprints", ckpt.metadata.dataset_fingerprints}}},
      {"tensors", tensors},
      {"blob_bytes", blob.size()},
      {"blob_sha256", sha256_hex(blob)},
  };
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + text.size() + blob.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    if (bytes.size() < 4 && std::memcmp(bytes.data(), kMagic, bytes.size()) == 0) {
      throw CheckpointTruncatedError("checkpoint: file ends inside the header");
    }
    throw CheckpointError("checkpoint: missing ALRN magic bytes");
  }
  if (bytes.size() < kHeaderBytes) throw CheckpointTruncatedError("checkpoint: file ends inside the header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(
        fmt::format("checkpoint: format version {} is not supported (expected {})", version, kCheckpointVersion));
  }
  const std::uint64_t manifest_len = get_le(bytes, 8, 8);
  if (manifest_len > bytes.size() - kHeaderBytes) {
    throw CheckpointTruncatedError("checkpoint: file ends inside the manifest");
  }
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + kHeaderBytes, bytes.begin() + kHeaderBytes + manifest_len);
  } catch (const json::exception& e) {
    throw CheckpointError(fmt::format("checkpoint: unreadable manifest ({})", e.what()));
  }

  try {
    if (manifest.at("format") != "alrn-checkpoint") throw CheckpointError("checkpoint: unknown manifest format");
    const std::size_t blob_offset = kHeaderBytes + manifest_len;
    const std::size_t blob_bytes = manifest.at("blob_bytes").get<std::size_t>();
    const std::size_t available = bytes.size() - blob_offset;
    if (available < blob_bytes) {
      throw CheckpointTruncatedError(
          fmt::format("checkpoint: blob has {} bytes but the manifest declares {}", available, blob_bytes));
    }
    if (available > blob_bytes) {
      throw CheckpointLengthError(
          fmt::format("checkpoint: {} bytes follow the declared {}-byte blob", available - blob_bytes, blob_bytes));
    }
    auto blob = bytes.subspan(blob_offset, blob_bytes);
    if (sha256_hex(blob) != manifest.at("blob_sha256").get<std::string>()) {
      throw CheckpointDigestError("checkpoint: blob digest does not match the manifest");
    }

    Checkpoint ckpt{Model(config_from_json(manifest.at("config"))),
                    Vocabulary::from_text(manifest.at("vocabulary").get<std::string>()),
                    {}};
    if (ckpt.vocab.size() != ckpt.model.config().vocab_size) {
      throw CheckpointError("checkpoint: vocabulary size disagrees with the model config");
    }
    const json& meta = manifest.at("metadata");
    ckpt.metadata.stage = meta.at("stage").get<std::string>();
    ckpt.metadata.epochs_run = meta.at("epochs_run").get<int>();
    ckpt.metadata.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.metadata.dataset_fingerprints = meta.at("dataset_fingerprints").get<std::vector<std::string>>();

    const json& table = manifest.at("tensors");
    std::vector<ParamRef> params = ckpt.model.parameters();
    if (table.size() != params.size()) {
      throw CheckpointLengthError(fmt::format("checkpoint: tensor table lists {} tensors, model needs {}",
                                              table.size(), params.size()));
    }
    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const json& e = table[i];
      Tensor& t = *params[i].tensor;
      if (e.at("name").get<std::string>() != params[i].name || e.at("shape").get<Shape>() != t.shape()) {
        throw CheckpointError(fmt::format("checkpoint: tensor {} does not match the model layout", i));
      }
      const std::size_t offset = e.at("offset").get<std::size_t>();
      const std::size_t nbytes = e.at("bytes").get<std::size_t>();
      if (offset != expected_offset || nbytes != t.size() * sizeof(double) || offset + nbytes > blob_bytes) {
        throw CheckpointLengthError(fmt::format("checkpoint: tensor '{}' offset/length disagree with the blob",
                                                params[i].name));
      }
      for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = std::bit_cast<double>(get_le(blob, offset + k * 8, 8));
      }
      expected_offset += nbytes;
    }
    if (expected_offset != blob_bytes) {
      throw CheckpointLengthError("checkpoint: tensor table does not cover the blob");
    }

    const json& part = manifest.at("partition");
    auto layer_flags = part.at("layers").get<std::vector<bool>>();
    if (layer_flags.size() != ckpt.model.config().n_layers) {
      throw CheckpointError("checkpoint: partition length disagrees with n_layers");
    }
    int n = static_cast<int>(std::count(layer_flags.begin(), layer_flags.end(), true));
    ckpt.model.set_trainable(n);
    if (ckpt.model.partition() != Partition{layer_flags, part.at("embeddings").get<bool>(), part.at("head").get<bool>()}) {
      throw CheckpointError("checkpoint: partition is not of the nearest-to-output form");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw CheckpointError(fmt::format("checkpoint: malformed manifest ({})", e.what()));
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read checkpoint '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace alrn
