#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zsl/matrix.hpp"

namespace zsl {

using ClassId = int;

/// Features, labels and class attributes with a seen/unseen class split.
/// Rows whose label is a seen class are training data; rows of unseen
/// classes are zero-shot test data.
struct ZslDataset {
  Matrix features;                    // n × d
  std::vector<ClassId> labels;        // n, values in [0, K)
  Matrix attributes;                  // K × q, row k is the embedding of class k
  std::vector<ClassId> seen_classes;  // sorted, disjoint from unseen_classes
  std::vector<ClassId> unseen_classes;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }
  std::size_t attr_dim() const noexcept { return attributes.cols(); }
  std::size_t num_classes() const noexcept { return attributes.rows(); }

  bool is_seen(ClassId c) const;
  bool is_unseen(ClassId c) const;

  /// Throws on any broken invariant: split overlap (InputError), label out of
  /// range or non-finite entries (DataError naming the row), shape mismatch.
  void validate() const;

  /// Row indices whose label is in `classes` (sorted ids), in file order.
  std::vector<std::size_t> rows_in(std::span<const ClassId> classes) const;
  /// Copy restricted to the given rows; attributes and split are kept.
  ZslDataset subset(std::span<const std::size_t> rows) const;
  /// Attribute rows for each label of `rows_labels`.
  Matrix attributes_for(std::span<const ClassId> rows_labels) const;
};

/// Class ids present in `labels`, sorted ascending.
std::vector<ClassId> distinct_labels(std::span<const ClassId> labels);

/// Rows of `b` appended to `a`; attributes and split are taken from `a`.
ZslDataset concat_rows(const ZslDataset& a, const ZslDataset& b);

/// Per-dimension z-score fitted on one matrix and applied to others.
struct Standardizer {
  Matrix mean;   // 1 × d
  Matrix scale;  // 1 × d, standard deviation (1 where it vanishes)

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

}  // namespace zsl
