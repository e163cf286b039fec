#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "zsl/dataset.hpp"
#include "zsl/io.hpp"
#include "zsl/matrix.hpp"

namespace zsl {

struct SvmConfig {
  double cost = 100.0;
  std::size_t max_epochs = 1000;
  double tol = 1e-6;
  /// Carried for provenance; the full-batch solver draws no random numbers.
  std::uint64_t seed = 0;

  void validate() const;
};

/// One-vs-rest linear SVM: row c of `weights` and `biases[c]` score class
/// `classes[c]`.
struct SvmModel {
  std::vector<ClassId> classes;
  Matrix weights;  // num_classes × d
  std::vector<double> biases;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t feature_dim() const noexcept { return weights.cols(); }
};

/// Result of one binary problem: minimizes ½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b)).
struct BinarySvm {
  std::vector<double> weights;
  double bias = 0.0;
  /// Objective after each accepted epoch, starting with the value at w = 0, b = 0.
  std::vector<double> objective;
};

/// Full-batch subgradient descent with step 1/(C·n·√t). A step that would
/// raise the objective is halved until it does not; if no halving helps the
/// solver stops. Also stops at max_epochs or when the relative objective
/// change drops below tol. `targets` are ±1.
BinarySvm fit_binary_svm(const Matrix& x, std::span<const double> targets,
                         const SvmConfig& config);

double hinge_objective(const Matrix& x, std::span<const double> targets,
                       std::span<const double> w, double b, double cost);

/// Throws InputError for fewer than two classes or non-finite features.
SvmModel svm_fit(const ZslDataset& data, const SvmConfig& config);

/// batch × num_classes matrix of w_c·x + b_c.
Matrix svm_scores(const SvmModel& model, const Matrix& x);
/// Argmax class per row; ties go to the earlier entry of model.classes.
std::vector<ClassId> svm_predict(const SvmModel& model, const Matrix& x);
/// k labels per row by descending score, ties as in svm_predict.
std::vector<std::vector<ClassId>> top_k_labels(const SvmModel& model, const Matrix& x,
                                               std::size_t k);
std::vector<std::vector<ClassId>> top_k_from_scores(const Matrix& scores,
                                                    std::span<const ClassId> classes,
                                                    std::size_t k);

std::vector<NamedMatrix> to_checkpoint_entries(const SvmModel& model);
SvmModel svm_from_checkpoint_entries(std::span<const NamedMatrix> entries);
void save_checkpoint(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm_checkpoint(const std::filesystem::path& path);

}  // namespace zsl
