#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "zsl/matrix.hpp"

namespace zsl {

/// Seeded pseudo-random source backed by mt19937_64. Uniform and normal
/// draws are derived here (not via <random> distributions) so that the
/// stream for a given seed does not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

  /// Independent generator for a numbered sub-stream of this generator's seed.
  /// Does not advance this generator.
  Rng stream(std::uint64_t index) const;

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

Matrix sample_standard_normal(Rng& rng, std::size_t rows, std::size_t cols);

/// Uniform Glorot initialization: entries in ±√(6/(fan_in+fan_out)),
/// shape (fan_in, fan_out).
Matrix glorot_init(Rng& rng, std::size_t fan_in, std::size_t fan_out);

double glorot_limit(std::size_t fan_in, std::size_t fan_out);

}  // namespace zsl
