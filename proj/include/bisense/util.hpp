#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bisense {

// Deterministic, platform-independent RNG (splitmix64). All seeded behaviour
// in the project goes through this so that runs are reproducible across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform in [0, n)
  uint64_t next_index(uint64_t n) { return next_u64() % n; }

  // standard normal via Box-Muller, one spare cached
  double normal();

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

uint32_t fnv1a32(std::string_view s);
uint64_t fnv1a64(std::string_view s);
uint64_t fnv1a64(const void* data, size_t n);

// Mixes a seed with an id string; used for hash-based dataset splits.
uint64_t mix_seed(uint64_t seed, std::string_view id);

// Decodes UTF-8 into codepoints. Throws std::invalid_argument on malformed
// input (overlong encodings, stray continuation bytes, surrogates, truncation).
std::vector<char32_t> utf8_decode(std::string_view text);

void utf8_append(char32_t cp, std::string& out);
std::string utf8_encode(char32_t cp);

// FNV-1a digest of a whole file, hex-encoded. Throws std::runtime_error if the
// file cannot be read.
std::string file_digest(const std::string& path);

}  // namespace bisense
