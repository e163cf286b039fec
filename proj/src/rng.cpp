#include "zsl/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "zsl/error.hpp"

namespace zsl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double Rng::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw InputError("uniform_index: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Box-Muller; 1 - uniform() lies in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Rng Rng::stream(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(index + 0x5851f42d4c957f2dULL)));
}

Matrix sample_standard_normal(Rng& rng, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("sample_standard_normal: requested empty shape (" + std::to_string(rows) +
                     "," + std::to_string(cols) + ")");
  }
  Matrix out(rows, cols);
  for (double& v : out.data()) v = rng.normal();
  return out;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix glorot_init(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) throw ShapeError("glorot_init: zero fan");
  const double limit = glorot_limit(fan_in, fan_out);
  Matrix out(fan_in, fan_out);
  for (double& v : out.data()) v = rng.uniform(-limit, limit);
  return out;
}

}  // namespace zsl
