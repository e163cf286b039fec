#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "zsl/matrix.hpp"
#include "zsl/rng.hpp"

namespace zsl {

enum class Mode { kTrain, kInference };

struct DenseGradients {
  Matrix input;
  Matrix weights;
  Matrix bias;
};

/// Affine layer y = x·W + b with W of shape (in_dim, out_dim) and b a
/// 1×out_dim row broadcast over the batch.
class DenseLayer {
 public:
  DenseLayer(Matrix weights, Matrix bias);
  static DenseLayer glorot(Rng& rng, std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim() const noexcept { return weights_.rows(); }
  std::size_t out_dim() const noexcept { return weights_.cols(); }

  const Matrix& weights() const noexcept { return weights_; }
  const Matrix& bias() const noexcept { return bias_; }
  Matrix& weights() noexcept { return weights_; }
  Matrix& bias() noexcept { return bias_; }

  /// Caches x for the following backward().
  Matrix forward(const Matrix& x);
  /// Gradients for the most recent forward(); throws StateError without one.
  DenseGradients backward(const Matrix& grad_out) const;

  bool has_cache() const noexcept { return cached_input_.has_value(); }

 private:
  Matrix weights_;
  Matrix bias_;
  std::optional<Matrix> cached_input_;
};

Matrix relu(const Matrix& x);
/// Passes grad_out where the forward input was strictly positive.
Matrix relu_backward(const Matrix& input, const Matrix& grad_out);

class ReluLayer {
 public:
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out) const;

 private:
  std::optional<Matrix> cached_input_;
};

/// Inverted dropout: training mode zeroes entries with probability `rate`
/// and scales survivors by 1/(1-rate); inference mode is the identity.
class DropoutLayer {
 public:
  explicit DropoutLayer(double rate);

  double rate() const noexcept { return rate_; }

  /// rng is required in training mode when rate > 0.
  Matrix forward(const Matrix& x, Mode mode, Rng* rng);
  Matrix backward(const Matrix& grad_out) const;

 private:
  double rate_;
  std::optional<Matrix> mask_;
};

using Layer = std::variant<DenseLayer, ReluLayer, DropoutLayer>;

struct MlpGradients {
  Matrix input;
  /// One entry per dense layer, in forward order.
  std::vector<DenseGradients> dense;
};

/// Layer widths plus optional dropout. Every hidden dense layer is followed by
/// ReLU; the output layer is linear.
struct MlpSpec {
  std::vector<std::size_t> widths;
  double dropout_rate = 0.0;
  /// Dropout goes after the activation of this hidden layer (0-based).
  std::optional<std::size_t> dropout_after;
};

class Mlp {
 public:
  /// Throws ConfigError if dense dimensions do not chain or the last layer is
  /// not dense.
  explicit Mlp(std::vector<Layer> layers);
  static Mlp build(const MlpSpec& spec, Rng& rng);

  std::size_t in_dim() const;
  std::size_t out_dim() const;

  Matrix forward(const Matrix& x, Mode mode, Rng* rng = nullptr);
  MlpGradients backward(const Matrix& grad_out) const;

  std::vector<DenseLayer*> dense_layers();
  std::vector<const DenseLayer*> dense_layers() const;
  const std::vector<Layer>& layers() const noexcept { return layers_; }

 private:
  std::vector<Layer> layers_;
};

}  // namespace zsl
