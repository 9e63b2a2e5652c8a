#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace yseg {

std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a named purpose ("init", "augment", "tiebreak", ...).
/// Streams are independent so toggling one feature never shifts another.
std::uint64_t child_seed(std::uint64_t root, std::string_view purpose);
std::uint64_t child_seed(std::uint64_t root, std::uint64_t index);

/// Platform-independent generator: mt19937_64 bits with hand-written
/// transforms (the std distributions are not portable across libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  int uniform_int(int lo, int hi_inclusive);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace yseg
