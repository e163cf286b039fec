#include "zsl/svm.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zsl/error.hpp"

namespace zsl {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double objective_from_margins(const Eigen::VectorXd& scores, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& w, double cost) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    hinge += std::max(0.0, 1.0 - y[i] * scores[i]);
  }
  return 0.5 * w.squaredNorm() + cost * hinge;
}

constexpr int kMaxHalvings = 50;

}  // namespace

void SvmConfig::validate() const {
  if (!(cost > 0.0) || !std::isfinite(cost)) throw ConfigError("svm cost C must be positive");
  if (!(tol > 0.0)) throw ConfigError("svm tol must be positive");
  if (max_epochs == 0) throw ConfigError("svm max_epochs must be >= 1");
}

double hinge_objective(const Matrix& x, std::span<const double> targets,
                       std::span<const double> w, double b, double cost) {
  if (x.rows() != targets.size() || x.cols() != w.size()) {
    throw ShapeError("hinge_objective: data " + x.shape_string() + " vs " +
                     std::to_string(targets.size()) + " targets and " +
                     std::to_string(w.size()) + " weights");
  }
  const Eigen::VectorXd wv = view(w);
  const Eigen::VectorXd scores = (view(x) * wv).array() + b;
  return objective_from_margins(scores, view(targets), wv, cost);
}

BinarySvm fit_binary_svm(const Matrix& x, std::span<const double> targets,
                         const SvmConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  if (static_cast<Eigen::Index>(targets.size()) != n || n == 0) {
    throw ShapeError("fit_binary_svm: " + std::to_string(targets.size()) + " targets for " +
                     x.shape_string() + " data");
  }
  const auto X = view(x);
  const Eigen::VectorXd y = view(targets);
  const double cost = config.cost;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
  double objective = objective_from_margins(scores, y, w, cost);

  BinarySvm out;
  out.objective.push_back(objective);

  Eigen::VectorXd coeff(n);
  for (std::size_t t = 1; t <= config.max_epochs; ++t) {
    // Subgradient: w − C·Σ yᵢxᵢ and −C·Σ yᵢ over margin violators.
    double grad_b = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool violated = y[i] * scores[i] < 1.0;
      coeff[i] = violated ? y[i] : 0.0;
      grad_b -= violated ? cost * y[i] : 0.0;
    }
    const Eigen::VectorXd grad_w = w - cost * (X.transpose() * coeff);
    if (grad_w.squaredNorm() == 0.0 && grad_b == 0.0) break;

    double step = 1.0 / (cost * static_cast<double>(n) * std::sqrt(static_cast<double>(t)));
    bool accepted = false;
    Eigen::VectorXd w_next;
    Eigen::VectorXd scores_next;
    double b_next = 0.0;
    double objective_next = objective;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      w_next = w - step * grad_w;
      b_next = b - step * grad_b;
      scores_next = (X * w_next).array() + b_next;
      objective_next = objective_from_margins(scores_next, y, w_next, cost);
      if (objective_next <= objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const double change = (objective - objective_next) / std::max(objective, 1e-300);
    w = std::move(w_next);
    b = b_next;
    scores = std::move(scores_next);
    objective = objective_next;
    out.objective.push_back(objective);
    if (change < config.tol) break;
  }

  out.weights.assign(w.data(), w.data() + w.size());
  out.bias = b;
  return out;
}

SvmModel svm_fit(const ZslDataset& data, const SvmConfig& config) {
  config.validate();
  if (data.features.rows() != data.labels.size()) {
    throw ShapeError("svm_fit: feature rows and labels disagree");
  }
  for (std::size_t r = 0; r < data.features.rows(); ++r) {
    for (double v : data.features.row(r)) {
      if (!std::isfinite(v)) {
        throw InputError("svm_fit: non-finite feature in row " + std::to_string(r));
      }
    }
  }
  SvmModel model;
  model.classes = distinct_labels(data.labels);
  if (model.classes.size() < 2) {
    throw InputError("svm_fit needs at least two distinct labels, got " +
                     std::to_string(model.classes.size()));
  }
  model.weights = Matrix(model.classes.size(), data.feature_dim());
  model.biases.resize(model.classes.size());

  std::vector<double> targets(data.size());
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      targets[i] = data.labels[i] == model.classes[c] ? 1.0 : -1.0;
    }
    BinarySvm fit = fit_binary_svm(data.features, targets, config);
    std::ranges::copy(fit.weights, model.weights.row(c).begin());
    model.biases[c] = fit.bias;
  }
  round_to_float(model.weights);
  for (double& b : model.biases) b = static_cast<double>(static_cast<float>(b));
  return model;
}

Matrix svm_scores(const SvmModel& model, const Matrix& x) {
  if (x.cols() != model.feature_dim()) {
    throw ShapeError("svm_scores: input " + x.shape_string() + " vs model with " +
                     std::to_string(model.feature_dim()) + " features");
  }
  Matrix scores = matmul_nt(x, model.weights);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += model.biases[c];
  }
  return scores;
}

std::vector<std::vector<ClassId>> top_k_from_scores(const Matrix& scores,
                                                    std::span<const ClassId> classes,
                                                    std::size_t k) {
  if (scores.cols() != classes.size()) throw ShapeError("top_k: score columns != classes");
  if (k < 1 || k > classes.size()) {
    throw InputError("top-k requires 1 <= k <= " + std::to_string(classes.size()) + ", got " +
                     std::to_string(k));
  }
  std::vector<std::vector<ClassId>> out(scores.rows());
  std::vector<std::size_t> idx(classes.size());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] > row[b] || (row[a] == row[b] && a < b);
                      });
    out[r].reserve(k);
    for (std::size_t i = 0; i < k; ++i) out[r].push_back(classes[idx[i]]);
  }
  return out;
}

std::vector<std::vector<ClassId>> top_k_labels(const SvmModel& model, const Matrix& x,
                                               std::size_t k) {
  return top_k_from_scores(svm_scores(model, x), model.classes, k);
}

std::vector<ClassId> svm_predict(const SvmModel& model, const Matrix& x) {
  const Matrix scores = svm_scores(model, x);
  std::vector<ClassId> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    // max_element returns the first maximum, i.e. the lowest index on ties.
    const auto best = std::max_element(row.begin(), row.end());
    out[r] = model.classes[static_cast<std::size_t>(best - row.begin())];
  }
  return out;
}

std::vector<NamedMatrix> to_checkpoint_entries(const SvmModel& model) {
  Matrix classes(1, model.classes.size());
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    classes(0, i) = static_cast<double>(model.classes[i]);
  }
  return {
      {"svm.classes", std::move(classes)},
      {"svm.weights", model.weights},
      {"svm.biases", Matrix(1, model.biases.size(), model.biases)},
  };
}

SvmModel svm_from_checkpoint_entries(std::span<const NamedMatrix> entries) {
  const Matrix& classes = find_entry(entries, "svm.classes");
  const Matrix& weights = find_entry(entries, "svm.weights");
  const Matrix& biases = find_entry(entries, "svm.biases");
  if (classes.rows() != 1 || weights.rows() != classes.cols() || biases.rows() != 1 ||
      biases.cols() != classes.cols()) {
    throw FormatError("inconsistent svm checkpoint shapes", 0);
  }
  SvmModel model;
  for (double v : classes.data()) model.classes.push_back(static_cast<ClassId>(v));
  model.weights = weights;
  model.biases.assign(biases.data().begin(), biases.data().end());
  return model;
}

void save_checkpoint(const SvmModel& model, const std::filesystem::path& path) {
  save_checkpoint(path, to_checkpoint_entries(model));
}

SvmModel load_svm_checkpoint(const std::filesystem::path& path) {
  return svm_from_checkpoint_entries(load_checkpoint(path));
}

}  // namespace zsl
