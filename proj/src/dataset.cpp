#include "zsl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zsl/error.hpp"

namespace zsl {

namespace {

bool contains(std::span<const ClassId> sorted, ClassId c) {
  return std::binary_search(sorted.begin(), sorted.end(), c);
}

void check_class_list(std::span<const ClassId> ids, std::size_t num_classes, const char* which) {
  if (!std::ranges::is_sorted(ids) || std::ranges::adjacent_find(ids) != ids.end()) {
    throw InputError(std::string(which) + " class list must be sorted and free of duplicates");
  }
  for (ClassId c : ids) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw InputError(std::string(which) + " class " + std::to_string(c) +
                       " has no attribute row (K=" + std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

bool ZslDataset::is_seen(ClassId c) const { return contains(seen_classes, c); }

bool ZslDataset::is_unseen(ClassId c) const { return contains(unseen_classes, c); }

void ZslDataset::validate() const {
  if (features.rows() != labels.size()) {
    throw ShapeError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t k = num_classes();
  check_class_list(seen_classes, k, "seen");
  check_class_list(unseen_classes, k, "unseen");
  for (ClassId c : seen_classes) {
    if (is_unseen(c)) {
      throw InputError("class " + std::to_string(c) + " is listed as both seen and unseen");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw DataError("label " + std::to_string(labels[i]) + " outside [0, " +
                          std::to_string(k) + ")",
                      i);
    }
  }
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value", r);
    }
  }
  for (std::size_t r = 0; r < attributes.rows(); ++r) {
    for (double v : attributes.row(r)) {
      if (!std::isfinite(v)) throw DataError("non-finite attribute value", r);
    }
  }
}

std::vector<std::size_t> ZslDataset::rows_in(std::span<const ClassId> classes) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (contains(classes, labels[i])) rows.push_back(i);
  }
  return rows;
}

ZslDataset ZslDataset::subset(std::span<const std::size_t> rows) const {
  ZslDataset out;
  out.features = gather_rows(features, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  out.attributes = attributes;
  out.seen_classes = seen_classes;
  out.unseen_classes = unseen_classes;
  return out;
}

Matrix ZslDataset::attributes_for(std::span<const ClassId> row_labels) const {
  Matrix out(row_labels.size(), attributes.cols());
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    const ClassId c = row_labels[i];
    if (c < 0 || static_cast<std::size_t>(c) >= attributes.rows()) {
      throw InputError("class " + std::to_string(c) + " has no attribute row");
    }
    std::ranges::copy(attributes.row(static_cast<std::size_t>(c)), out.row(i).begin());
  }
  return out;
}

std::vector<ClassId> distinct_labels(std::span<const ClassId> labels) {
  std::vector<ClassId> out(labels.begin(), labels.end());
  std::ranges::sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ZslDataset concat_rows(const ZslDataset& a, const ZslDataset& b) {
  ZslDataset out = a;
  out.features = vconcat(a.features, b.features);
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw InputError("cannot fit a standardizer on zero rows");
  Standardizer s;
  s.mean = column_means(x);
  s.scale = Matrix(1, x.cols());
  auto mu = s.mean.data();
  auto sd = s.scale.data();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double d = row[c] - mu[c];
      sd[c] += d * d;
    }
  }
  for (double& v : sd) {
    v = std::sqrt(v / static_cast<double>(x.rows()));
    if (v < 1e-12) v = 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (mean.cols() != x.cols()) {
    throw ShapeError("standardizer fitted on " + std::to_string(mean.cols()) +
                     " columns applied to " + x.shape_string());
  }
  Matrix out = x;
  auto mu = mean.data();
  auto sd = scale.data();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mu[c]) / sd[c];
  }
  return out;
}

}  // namespace zsl
