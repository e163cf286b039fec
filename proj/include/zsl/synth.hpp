#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "zsl/dataset.hpp"
#include "zsl/matrix.hpp"

namespace zsl {

/// Parameters of the synthetic zero-shot benchmark. Class ids
/// [0, num_seen) are seen, [num_seen, num_seen + num_unseen) unseen.
struct SynthSpec {
  std::size_t num_seen = 15;
  std::size_t num_unseen = 5;
  std::size_t attr_dim = 10;
  std::size_t feature_dim = 50;
  std::size_t samples_per_class = 200;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;

  /// Throws ConfigError for unusable values.
  void validate() const;
  /// Non-fatal advisories (e.g. feature_dim < attr_dim).
  std::vector<std::string> warnings() const;
};

struct SynthData {
  ZslDataset train;  // seen-class rows only
  ZslDataset test;   // unseen-class rows only
  Matrix centroids;  // K × d noise-free class means
};

/// Attributes are uniform in [0,1]^q with pairwise distance >= 0.5 (by
/// rejection). Features are ReLU(W·a + b) + N(0, sigma²) with W Gaussian
/// scaled by 1/sqrt(q) and b ~ N(0, 0.25).
SynthData synth_generate(const SynthSpec& spec);

inline constexpr double kSynthMinAttributeDistance = 0.5;
inline constexpr int kSynthMaxRejectionTries = 10000;

/// Index of the nearest row of `centroids` for every row of `x`.
std::vector<ClassId> nearest_centroid(const Matrix& x, const Matrix& centroids);

}  // namespace zsl
