#pragma once

#include <cstdint>
#include <initializer_list>

namespace sclip {

// Counter-based pseudo-random numbers built on the splitmix64 finalizer.
// Every draw is a pure function of (key, index), which gives bitwise
// reproducibility, cheap random access, and common random numbers across
// algorithms that share a key.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Folds a sequence of words into a single derived key. Order matters.
inline constexpr std::uint64_t deriveKey(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t k = 0x8C6E1963F2A362A1ULL;
  for (std::uint64_t p : parts) k = mix64(k ^ (p + kGolden * 0x1D));
  return k;
}

// Converts 64 random bits to a double in [0, 1).
inline constexpr double toUnit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream forRun(std::uint64_t masterSeed, std::uint64_t purpose, std::uint64_t run) {
    return RngStream(deriveKey({masterSeed, purpose, run}));
  }

  std::uint64_t key() const { return key_; }

  // Sequential draws walk the splitmix64 state sequence starting at the key.
  std::uint64_t nextU64() { return mix64(key_ + kGolden * counter_++); }
  double nextUnit() { return toUnit(nextU64()); }
  double nextUniform(double lo, double hi) { return lo + (hi - lo) * nextUnit(); }

  // Random access (does not advance the sequential counter).
  std::uint64_t u64At(std::uint64_t index) const { return mix64(key_ + kGolden * index); }
  double unitAt(std::uint64_t index) const { return toUnit(u64At(index)); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sclip
