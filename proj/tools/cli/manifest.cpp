#include "manifest.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "alrn/checkpoint.hpp"
#include "alrn/error.hpp"
#include "alrn/hash.hpp"

namespace alrn::cli {

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Manifest::Manifest(std::string command, nlohmann::ordered_json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void Manifest::input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.generic_string()}, {"sha256", file_sha256(path)}});
}

void Manifest::output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.generic_string()}, {"sha256", file_sha256(path)}});
}

void Manifest::seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void Manifest::note(const std::string& key, nlohmann::ordered_json value) { notes_[key] = std::move(value); }

void Manifest::write(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["tool"] = "alrn";
  j["tool_version"] = kToolVersion;
  j["checkpoint_format_version"] = kCheckpointVersion;
  j["command"] = command_;
  j["seeds"] = seeds_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  if (!notes_.empty()) j["notes"] = notes_;
  j["config"] = config_;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace alrn::cli
