#pragma once

#include <cstddef>
#include <cstdint>

#include "zsl/matrix.hpp"

namespace zsl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam moments for one parameter matrix.
class AdamState {
 public:
  AdamState(std::size_t rows, std::size_t cols, AdamConfig config = {});

  /// param -= lr · m̂ / (√v̂ + eps), after advancing the moments with grad.
  void step(Matrix& param, const Matrix& grad);

  const Matrix& first_moment() const noexcept { return m_; }
  const Matrix& second_moment() const noexcept { return v_; }
  std::uint64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  Matrix m_;
  Matrix v_;
  std::uint64_t t_ = 0;
};

inline void adam_step(AdamState& state, Matrix& param, const Matrix& grad) {
  state.step(param, grad);
}

}  // namespace zsl
