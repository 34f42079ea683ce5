#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include "thorp/errors.hpp"

namespace thorp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for trial `index` of a run seeded with `seed`. Trials are independent
/// pure functions of their derived seed, so they can be evaluated in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

template <class T>
concept CoinSource = requires(T& source) {
  { source.next() } -> std::convertible_to<bool>;
};

// Counter-based fair coins: draw i of seed s is a fixed function of (s, i).
class CoinStream {
 public:
  explicit CoinStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t word_at(std::uint64_t index) const {
    return splitmix64(seed_ * 0xd1342543de82ef95ULL + splitmix64(index));
  }
  bool bit_at(std::uint64_t index) const { return (word_at(index) >> 63) != 0; }

  bool next() { return bit_at(counter_++); }

  /// Uniform on [0, 1) with 53 random bits; consumes one draw.
  double uniform() { return static_cast<double>(word_at(counter_++) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// Coins read from the bits of a fixed pattern, least significant first. Used
// to enumerate every coin outcome of a short run.
class PatternCoins {
 public:
  explicit PatternCoins(std::uint64_t pattern, int width = 64) : pattern_(pattern), width_(width) {}

  bool next() {
    if (used_ >= width_) throw contract_error("PatternCoins exhausted");
    return ((pattern_ >> used_++) & 1ULL) != 0;
  }
  int used() const { return used_; }

 private:
  std::uint64_t pattern_;
  int width_;
  int used_ = 0;
};

// Every coin the same, e.g. all heads.
struct ConstantCoins {
  bool value = true;
  bool next() { return value; }
};

// Coins replayed from a recorded sequence.
class ReplayCoins {
 public:
  explicit ReplayCoins(std::vector<bool> bits) : bits_(std::move(bits)) {}

  bool next() {
    if (pos_ >= bits_.size()) throw contract_error("ReplayCoins exhausted");
    return bits_[pos_++];
  }
  std::size_t used() const { return pos_; }

 private:
  std::vector<bool> bits_;
  std::size_t pos_ = 0;
};

}  // namespace thorp
