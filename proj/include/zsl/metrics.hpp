#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "zsl/dataset.hpp"

namespace zsl {

struct ClassTally {
  std::size_t correct = 0;
  std::size_t total = 0;

  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

/// Correct/total counts per true label.
std::map<ClassId, ClassTally> tally_per_class(std::span<const ClassId> preds,
                                              std::span<const ClassId> labels);

/// Unweighted mean over classes present in `labels` of correct_c / total_c.
/// Every label must belong to `class_set`.
double per_class_accuracy(std::span<const ClassId> preds, std::span<const ClassId> labels,
                          std::span<const ClassId> class_set);

double per_image_accuracy(std::span<const ClassId> preds, std::span<const ClassId> labels);

/// Fraction of rows whose label appears in its list; every list must hold k labels.
double top_k_accuracy(std::span<const std::vector<ClassId>> top_k,
                      std::span<const ClassId> labels, std::size_t k);

/// 2su/(s+u), or 0 when s + u == 0.
double harmonic_mean(double seen_acc, double unseen_acc);

}  // namespace zsl
