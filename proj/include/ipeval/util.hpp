#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ipeval {

// Hex-encoded SHA-256 of the input bytes. Used for cache keys, artifact
// hashes, and run ids.
std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);

// Write-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);

uint64_t fnv1a64(std::string_view s);

// Portable seeded generator. std::shuffle with a std:: distribution is
// implementation-defined, so shuffles that must reproduce across
// platforms go through this instead.
class DeterministicRng {
 public:
  explicit DeterministicRng(uint64_t seed) : state_(seed) {}
  uint64_t next();
  size_t below(size_t bound);  // uniform in [0, bound), bound >= 1

 private:
  uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& items, DeterministicRng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

// Runs fn(0..n-1) on up to `workers` threads. Rethrows the first
// exception after all workers join.
void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& fn);

std::string slugify(std::string_view s);

}  // namespace ipeval
