#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsl/cvae.hpp"
#include "zsl/dataset.hpp"
#include "zsl/metrics.hpp"
#include "zsl/rng.hpp"
#include "zsl/svm.hpp"

namespace zsl {

struct EvalReport {
  std::string protocol;  // "disjoint" or "generalized"
  double per_class_acc = 0.0;
  double per_image_acc = 0.0;
  std::optional<double> seen_acc;
  std::optional<double> unseen_acc;
  std::optional<double> harmonic_mean;
  std::optional<std::size_t> top_k;
  std::optional<double> top_k_acc;
  std::map<ClassId, ClassTally> class_counts;

  // Configuration echo.
  std::uint64_t seed = 0;
  std::size_t n_pseudo = 0;
  double svm_cost = 0.0;
  std::size_t feature_dim = 0;
  std::size_t attr_dim = 0;
  std::size_t latent_dim = 0;
  std::size_t epochs = 0;
  std::optional<double> holdout_frac;

  /// Flat JSON object with fixed key order; absent optionals are omitted.
  std::string to_json() const;
};

struct ProtocolOptions {
  CvaeConfig cvae;
  SvmConfig svm;
  std::size_t n_pseudo = 300;
  double holdout_frac = 0.2;
  std::optional<std::size_t> top_k;
  /// z-score features with statistics of the CVAE training rows.
  bool standardize = false;
  /// Master seed; overrides cvae.seed and svm.seed.
  std::uint64_t seed = 0;
  EpochCallback on_epoch;

  void validate() const;
};

struct ProtocolResult {
  EvalReport report;
  CvaeModel model;
  TrainTrace trace;
  ZslDataset pseudo;
  SvmModel svm;
};

struct HoldoutSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> holdout_rows;
};

/// Per seen class, ceil(frac · n_c) rows go to the holdout (at most n_c − 1).
/// Throws InputError naming a seen class with fewer than two rows.
HoldoutSplit stratified_holdout(const ZslDataset& data, double frac, Rng& rng);

/// Rows the CVAE is trained on for the given protocol ("disjoint" or
/// "generalized"); the generalized holdout is derived from `seed` exactly
/// as run_generalized_zsl derives it.
std::vector<std::size_t> cvae_training_rows(const ZslDataset& data, const std::string& protocol,
                                            double holdout_frac, std::uint64_t seed);

/// Train on seen rows, generate pseudo data for unseen classes, fit the SVM
/// on pseudo data only and score the unseen rows with per-class accuracy.
/// When `pretrained` is given, training is skipped.
ProtocolResult run_disjoint_zsl(const ZslDataset& data, const ProtocolOptions& options,
                                const CvaeModel* pretrained = nullptr);

/// Hold out part of every seen class, train on the rest, generate pseudo data
/// for seen and unseen classes, fit one SVM over all classes and report seen,
/// unseen and harmonic-mean accuracy.
ProtocolResult run_generalized_zsl(const ZslDataset& data, const ProtocolOptions& options,
                                   const CvaeModel* pretrained = nullptr);

struct CentroidFidelity {
  std::vector<ClassId> classes;  // generated classes, ascending
  std::vector<ClassId> nearest;  // nearest true centroid per generated class
  std::size_t hits = 0;          // classes whose nearest centroid is their own
};

/// Compares the mean of each generated class with every true class centroid.
CentroidFidelity centroid_fidelity(const ZslDataset& pseudo, const Matrix& true_centroids);

}  // namespace zsl
