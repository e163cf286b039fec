#include "zsl/metrics.hpp"

#include <algorithm>
#include <string>

#include "zsl/error.hpp"

namespace zsl {

namespace {

void check_pair(std::span<const ClassId> preds, std::span<const ClassId> labels) {
  if (preds.size() != labels.size()) {
    throw InputError("predictions (" + std::to_string(preds.size()) + ") and labels (" +
                     std::to_string(labels.size()) + ") differ in length");
  }
  if (labels.empty()) throw InputError("accuracy of an empty prediction set");
}

}  // namespace

std::map<ClassId, ClassTally> tally_per_class(std::span<const ClassId> preds,
                                              std::span<const ClassId> labels) {
  check_pair(preds, labels);
  std::map<ClassId, ClassTally> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& t = out[labels[i]];
    ++t.total;
    if (preds[i] == labels[i]) ++t.correct;
  }
  return out;
}

double per_class_accuracy(std::span<const ClassId> preds, std::span<const ClassId> labels,
                          std::span<const ClassId> class_set) {
  check_pair(preds, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::ranges::find(class_set, labels[i]) == class_set.end()) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                       " is outside the evaluated class set");
    }
  }
  const auto tallies = tally_per_class(preds, labels);
  double sum = 0.0;
  for (const auto& [cls, t] : tallies) {
    sum += static_cast<double>(t.correct) / static_cast<double>(t.total);
  }
  return sum / static_cast<double>(tallies.size());
}

double per_image_accuracy(std::span<const ClassId> preds, std::span<const ClassId> labels) {
  check_pair(preds, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double top_k_accuracy(std::span<const std::vector<ClassId>> top_k,
                      std::span<const ClassId> labels, std::size_t k) {
  if (top_k.size() != labels.size()) {
    throw InputError("top-k lists and labels differ in length");
  }
  if (labels.empty()) throw InputError("top-k accuracy of an empty prediction set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (top_k[i].size() != k) {
      throw InputError("top-k list at row " + std::to_string(i) + " has " +
                       std::to_string(top_k[i].size()) + " entries, expected " +
                       std::to_string(k));
    }
    if (std::ranges::find(top_k[i], labels[i]) != top_k[i].end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double harmonic_mean(double seen_acc, double unseen_acc) {
  const double sum = seen_acc + unseen_acc;
  if (sum == 0.0) return 0.0;
  return 2.0 * seen_acc * unseen_acc / sum;
}

}  // namespace zsl
