#include "zsl/adam.hpp"

#include <cmath>

#include "zsl/error.hpp"

namespace zsl {

AdamState::AdamState(std::size_t rows, std::size_t cols, AdamConfig config)
    : config_(config), m_(rows, cols), v_(rows, cols) {}

void AdamState::step(Matrix& param, const Matrix& grad) {
  require_same_shape(param, m_, "adam_step(param)");
  require_same_shape(grad, m_, "adam_step(grad)");

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));

  auto p = param.data();
  auto g = grad.data();
  auto m = m_.data();
  auto v = v_.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

}  // namespace zsl
