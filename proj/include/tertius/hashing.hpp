#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tertius {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Incremental FNV-1a, used for in-memory fingerprints (snapshot headers).
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) {
    const std::uint64_t n = s.size();
    update(&n, sizeof n);
    update(s.data(), s.size());
  }
  template <typename T>
  void update_value(const T& v) {
    update(&v, sizeof v);
  }
  [[nodiscard]] std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace tertius
