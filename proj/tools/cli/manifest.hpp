#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace alrn::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Run record written next to a command's outputs: the effective
/// configuration, seeds, and SHA-256 of every input and output file. It
/// holds no timestamps, so reruns with the same inputs write the same bytes.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::ordered_json config);

  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  void seed(const std::string& name, std::uint64_t value);
  void note(const std::string& key, nlohmann::ordered_json value);

  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json seeds_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json notes_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
};

std::string file_sha256(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace alrn::cli
