#include "zsl/nn.hpp"

#include <algorithm>
#include <string>
#include <type_traits>

#include "zsl/error.hpp"

namespace zsl {

DenseLayer::DenseLayer(Matrix weights, Matrix bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() == 0 || weights_.cols() == 0) {
    throw ConfigError("dense layer with empty weight matrix " + weights_.shape_string());
  }
  if (bias_.rows() != 1 || bias_.cols() != weights_.cols()) {
    throw ShapeError("dense layer bias " + bias_.shape_string() + " does not match weights " +
                     weights_.shape_string());
  }
}

DenseLayer DenseLayer::glorot(Rng& rng, std::size_t in_dim, std::size_t out_dim) {
  return DenseLayer(glorot_init(rng, in_dim, out_dim), Matrix(1, out_dim));
}

Matrix DenseLayer::forward(const Matrix& x) {
  if (x.cols() != in_dim()) {
    throw ShapeError("dense forward: input " + x.shape_string() + " vs weights " +
                     weights_.shape_string());
  }
  cached_input_ = x;
  return add_row_broadcast(matmul(x, weights_), bias_);
}

DenseGradients DenseLayer::backward(const Matrix& grad_out) const {
  if (!cached_input_) throw StateError("dense backward called without a cached forward pass");
  if (grad_out.rows() != cached_input_->rows() || grad_out.cols() != out_dim()) {
    throw ShapeError("dense backward: grad " + grad_out.shape_string() + " vs cached input " +
                     cached_input_->shape_string() + " and weights " + weights_.shape_string());
  }
  return DenseGradients{
      .input = matmul_nt(grad_out, weights_),
      .weights = matmul_tn(*cached_input_, grad_out),
      .bias = column_sums(grad_out),
  };
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& input, const Matrix& grad_out) {
  require_same_shape(input, grad_out, "relu_backward");
  Matrix out = grad_out;
  auto in = input.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!(in[i] > 0.0)) o[i] = 0.0;
  }
  return out;
}

Matrix ReluLayer::forward(const Matrix& x) {
  cached_input_ = x;
  return relu(x);
}

Matrix ReluLayer::backward(const Matrix& grad_out) const {
  if (!cached_input_) throw StateError("relu backward called without a cached forward pass");
  return relu_backward(*cached_input_, grad_out);
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Matrix DropoutLayer::forward(const Matrix& x, Mode mode, Rng* rng) {
  if (mode == Mode::kInference || rate_ == 0.0) {
    mask_.reset();
    return x;
  }
  if (rng == nullptr) throw StateError("dropout in training mode needs a random source");
  const double keep_scale = 1.0 / (1.0 - rate_);
  Matrix mask(x.rows(), x.cols());
  for (double& m : mask.data()) m = rng->uniform() < rate_ ? 0.0 : keep_scale;
  Matrix out = hadamard(x, mask);
  mask_ = std::move(mask);
  return out;
}

Matrix DropoutLayer::backward(const Matrix& grad_out) const {
  if (!mask_) return grad_out;
  return hadamard(grad_out, *mask_);
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  std::optional<std::size_t> width;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (const auto* dense = std::get_if<DenseLayer>(&layers_[i])) {
      if (width && *width != dense->in_dim()) {
        throw ConfigError("mlp layer " + std::to_string(i) + " expects input width " +
                          std::to_string(dense->in_dim()) + " but receives " +
                          std::to_string(*width));
      }
      width = dense->out_dim();
    }
  }
  if (layers_.empty() || !std::holds_alternative<DenseLayer>(layers_.back())) {
    throw ConfigError("mlp must end in a dense (linear) output layer");
  }
}

Mlp Mlp::build(const MlpSpec& spec, Rng& rng) {
  if (spec.widths.size() < 2) throw ConfigError("mlp needs at least input and output widths");
  for (std::size_t w : spec.widths) {
    if (w == 0) throw ConfigError("mlp layer widths must be >= 1");
  }
  const std::size_t num_dense = spec.widths.size() - 1;
  if (spec.dropout_after && *spec.dropout_after + 1 >= num_dense) {
    throw ConfigError("dropout must follow a hidden layer");
  }
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < num_dense; ++i) {
    layers.emplace_back(DenseLayer::glorot(rng, spec.widths[i], spec.widths[i + 1]));
    if (i + 1 == num_dense) break;
    layers.emplace_back(ReluLayer{});
    if (spec.dropout_after == i) layers.emplace_back(DropoutLayer(spec.dropout_rate));
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::in_dim() const { return dense_layers().front()->in_dim(); }

std::size_t Mlp::out_dim() const { return dense_layers().back()->out_dim(); }

Matrix Mlp::forward(const Matrix& x, Mode mode, Rng* rng) {
  Matrix h = x;
  for (auto& layer : layers_) {
    h = std::visit(
        [&](auto& l) -> Matrix {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, DropoutLayer>) {
            return l.forward(h, mode, rng);
          } else {
            return l.forward(h);
          }
        },
        layer);
  }
  return h;
}

MlpGradients Mlp::backward(const Matrix& grad_out) const {
  MlpGradients grads;
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (const auto* dense = std::get_if<DenseLayer>(&*it)) {
      DenseGradients dg = dense->backward(g);
      g = dg.input;
      grads.dense.push_back(std::move(dg));
    } else if (const auto* act = std::get_if<ReluLayer>(&*it)) {
      g = act->backward(g);
    } else {
      g = std::get<DropoutLayer>(*it).backward(g);
    }
  }
  std::reverse(grads.dense.begin(), grads.dense.end());
  grads.input = std::move(g);
  return grads;
}

std::vector<DenseLayer*> Mlp::dense_layers() {
  std::vector<DenseLayer*> out;
  for (auto& layer : layers_) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) out.push_back(dense);
  }
  return out;
}

std::vector<const DenseLayer*> Mlp::dense_layers() const {
  std::vector<const DenseLayer*> out;
  for (const auto& layer : layers_) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) out.push_back(dense);
  }
  return out;
}

}  // namespace zsl
