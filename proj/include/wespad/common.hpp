#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wespad {

inline constexpr const char* kToolVersion = "wespad 0.1.0";

// Bad or missing input data (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model fitting failed (CLI exit code 3).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model bundle unreadable or version-incompatible (CLI exit code 4).
class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Deterministic RNG. All randomized code in this project draws through this
// wrapper so that results are reproducible bit-for-bit for a given seed,
// independent of platform and standard library (std::uniform_int_distribution
// and std::shuffle are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t next_u64() {
    // xorshift64* on a splitmix-initialized state
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // Uniform in [0, n). n must be > 0. Uses rejection sampling (unbiased).
  std::uint64_t below(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal deviate (Box-Muller; deterministic).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a 64-bit fingerprints. Used for input-file digests in run manifests
// and fold-plan hashes in reports; not a cryptographic hash.
std::uint64_t fnv1a64_bytes(const void* data, std::size_t n,
                            std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64_file(const std::string& path);  // throws InputError when unreadable

std::string hex64(std::uint64_t v);

// Shortest decimal form that parses back to the same double. Used wherever
// floating-point values are written to text outputs that must be lossless
// and byte-stable across runs.
std::string format_double(double v);

}  // namespace wespad
