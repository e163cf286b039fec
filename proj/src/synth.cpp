#include "zsl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zsl/error.hpp"
#include "zsl/rng.hpp"

namespace zsl {

void SynthSpec::validate() const {
  if (num_seen == 0) throw ConfigError("synthetic spec needs at least one seen class");
  if (num_unseen == 0) throw ConfigError("synthetic spec needs at least one unseen class");
  if (attr_dim == 0 || feature_dim == 0) throw ConfigError("synthetic dims must be >= 1");
  if (samples_per_class == 0) throw ConfigError("samples_per_class must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("noise_sigma must be finite and >= 0");
  }
}

std::vector<std::string> SynthSpec::warnings() const {
  std::vector<std::string> out;
  if (feature_dim < attr_dim) {
    out.push_back("feature_dim (" + std::to_string(feature_dim) + ") is smaller than attr_dim (" +
                  std::to_string(attr_dim) + ")");
  }
  return out;
}

namespace {

Matrix draw_attributes(Rng& rng, std::size_t num_classes, std::size_t q) {
  Matrix attrs(num_classes, q);
  const double min_sq = kSynthMinAttributeDistance * kSynthMinAttributeDistance;
  std::vector<double> candidate(q);
  for (std::size_t k = 0; k < num_classes; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kSynthMaxRejectionTries && !placed; ++attempt) {
      for (double& v : candidate) v = rng.uniform();
      placed = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (squared_distance(candidate, attrs.row(j)) < min_sq) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw ConfigError("attribute space too crowded: could not place class " +
                        std::to_string(k) + " after " +
                        std::to_string(kSynthMaxRejectionTries) + " tries");
    }
    std::ranges::copy(candidate, attrs.row(k).begin());
  }
  return attrs;
}

}  // namespace

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t num_classes = spec.num_seen + spec.num_unseen;
  const std::size_t q = spec.attr_dim;
  const std::size_t d = spec.feature_dim;

  Matrix attrs = draw_attributes(rng, num_classes, q);

  // Hidden map stored as (q × d) so centroids = ReLU(A·W + b).
  Matrix w(q, d);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(q));
  for (double& v : w.data()) v = rng.normal() * w_scale;
  Matrix b(1, d);
  for (double& v : b.data()) v = 0.5 * rng.normal();

  Matrix centroids = add_row_broadcast(matmul(attrs, w), b);
  for (double& v : centroids.data()) v = std::max(v, 0.0);

  auto make_split = [&](std::size_t first, std::size_t count) {
    ZslDataset ds;
    ds.attributes = attrs;
    for (std::size_t k = 0; k < spec.num_seen; ++k) ds.seen_classes.push_back(static_cast<ClassId>(k));
    for (std::size_t k = spec.num_seen; k < num_classes; ++k) {
      ds.unseen_classes.push_back(static_cast<ClassId>(k));
    }
    ds.features = Matrix(count * spec.samples_per_class, d);
    ds.labels.reserve(ds.features.rows());
    std::size_t row = 0;
    for (std::size_t k = first; k < first + count; ++k) {
      for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
        auto dst = ds.features.row(row);
        auto mean = centroids.row(k);
        for (std::size_t j = 0; j < d; ++j) dst[j] = mean[j] + spec.noise_sigma * rng.normal();
        ds.labels.push_back(static_cast<ClassId>(k));
      }
    }
    return ds;
  };

  SynthData out;
  out.train = make_split(0, spec.num_seen);
  out.test = make_split(spec.num_seen, spec.num_unseen);
  out.centroids = std::move(centroids);
  return out;
}

std::vector<ClassId> nearest_centroid(const Matrix& x, const Matrix& centroids) {
  if (x.cols() != centroids.cols()) {
    throw ShapeError("nearest_centroid: points " + x.shape_string() + " vs centroids " +
                     centroids.shape_string());
  }
  std::vector<ClassId> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      const double dist = squared_distance(x.row(r), centroids.row(k));
      if (dist < best) {
        best = dist;
        out[r] = static_cast<ClassId>(k);
      }
    }
  }
  return out;
}

}  // namespace zsl
