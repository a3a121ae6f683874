#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace disent {

// Counter-based generator: the n-th output is a pure function of (key, n).
// Child streams are derived from the key and a stream id, so components that
// draw from different streams never perturb each other's sequences.
//
// Distributions are implemented here rather than taken from <random> so that
// draws are bit-identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), key_(mix(seed ^ kSeedSalt)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  // Independent child stream. Does not advance this generator.
  Rng split(std::uint64_t stream) const;
  Rng split(std::string_view tag) const;

  double uniform();                                  // [0, 1), 53 bits
  double normal();                                   // standard normal
  std::size_t below(std::size_t n);                  // uniform in [0, n)
  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6a09e667f3bcc909ULL;

  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// FNV-1a, used for stream tags and manifest hashes.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace disent
