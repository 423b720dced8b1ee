#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace alrn {

// Lowercase hex SHA-256 of a byte range.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// Incremental SHA-256 for fingerprints built from many fields.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  // Appends a length-prefixed field so that ("ab","c") and ("a","bc") differ.
  void field(std::string_view bytes);
  std::string hex_digest();

 private:
  void* ctx_;
};

}  // namespace alrn
