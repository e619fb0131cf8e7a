#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ddinv {

/// Seeded generator used for every random quantity in the repo:
/// std::mt19937_64 (whose output sequence is fixed by the standard), with
/// uniforms built from the top 53 bits so results do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform on {0, ..., n-1}.
  std::size_t index(std::size_t n);
  /// Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace ddinv
