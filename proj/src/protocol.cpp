#include "zsl/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "zsl/error.hpp"
#include "zsl/synth.hpp"

namespace zsl {

namespace {

// Rng sub-streams of the master seed used by the protocol runners. The CVAE
// trainer uses streams 0..3 of the same seed internally.
constexpr std::uint64_t kHoldoutStream = 100;
constexpr std::uint64_t kGenerateStream = 101;

template <class F>
auto run_stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::vector<ClassId> labels_at(const ZslDataset& data, std::span<const std::size_t> rows) {
  std::vector<ClassId> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(data.labels[r]);
  return out;
}

std::vector<ClassId> union_sorted(std::span<const ClassId> a, std::span<const ClassId> b) {
  std::vector<ClassId> out;
  std::ranges::set_union(a, b, std::back_inserter(out));
  return out;
}

struct Prepared {
  ZslDataset data;  // possibly standardized copy
  CvaeModel model;
  TrainTrace trace;
};

Prepared prepare_model(const ZslDataset& data, const ProtocolOptions& options,
                       std::span<const std::size_t> train_rows, const CvaeModel* pretrained) {
  ZslDataset work = data;
  if (options.standardize) {
    run_stage("standardize", [&] {
      const Standardizer s = Standardizer::fit(gather_rows(data.features, train_rows));
      work.features = s.apply(data.features);
      return 0;
    });
  }

  if (pretrained != nullptr) {
    const CvaeConfig& c = pretrained->config();
    if (c.feature_dim != work.feature_dim() || c.attr_dim != work.attr_dim()) {
      throw StageError("load_model", ConfigError("checkpoint dims do not match the dataset"));
    }
    return Prepared{std::move(work), *pretrained, {}};
  }

  CvaeConfig cfg = options.cvae;
  cfg.seed = options.seed;
  cfg.feature_dim = work.feature_dim();
  cfg.attr_dim = work.attr_dim();
  auto trained = run_stage("train_cvae", [&] {
    return train_cvae(work.subset(train_rows), cfg, options.on_epoch);
  });
  return Prepared{std::move(work), std::move(trained.model), std::move(trained.trace)};
}

void fill_echo(EvalReport& report, const ProtocolOptions& options, const CvaeModel& model,
               std::size_t epochs_run) {
  report.seed = options.seed;
  report.n_pseudo = options.n_pseudo;
  report.svm_cost = options.svm.cost;
  report.feature_dim = model.config().feature_dim;
  report.attr_dim = model.config().attr_dim;
  report.latent_dim = model.config().latent_dim;
  report.epochs = epochs_run;
}

void check_common(const ZslDataset& data, const ProtocolOptions& options) {
  run_stage("validate", [&] {
    options.validate();
    data.validate();
    if (data.seen_classes.empty() || data.unseen_classes.empty()) {
      throw InputError("protocol needs non-empty seen and unseen class sets");
    }
    return 0;
  });
}

}  // namespace

void ProtocolOptions::validate() const {
  if (n_pseudo == 0) throw ConfigError("n_pseudo must be >= 1");
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) {
    throw ConfigError("holdout_frac must lie in (0, 1)");
  }
  if (top_k && *top_k == 0) throw ConfigError("top_k must be >= 1");
  svm.validate();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["protocol"] = protocol;
  j["per_class_acc"] = per_class_acc;
  j["per_image_acc"] = per_image_acc;
  if (seen_acc) j["seen_acc"] = *seen_acc;
  if (unseen_acc) j["unseen_acc"] = *unseen_acc;
  if (harmonic_mean) j["harmonic_mean"] = *harmonic_mean;
  if (top_k) j["top_k"] = *top_k;
  if (top_k_acc) j["top_k_acc"] = *top_k_acc;
  nlohmann::ordered_json correct = nlohmann::ordered_json::object();
  nlohmann::ordered_json total = nlohmann::ordered_json::object();
  for (const auto& [cls, t] : class_counts) {
    correct[std::to_string(cls)] = t.correct;
    total[std::to_string(cls)] = t.total;
  }
  j["per_class_correct"] = std::move(correct);
  j["per_class_total"] = std::move(total);
  j["seed"] = seed;
  j["n_pseudo"] = n_pseudo;
  j["svm_cost"] = svm_cost;
  j["feature_dim"] = feature_dim;
  j["attr_dim"] = attr_dim;
  j["latent_dim"] = latent_dim;
  j["epochs"] = epochs;
  if (holdout_frac) j["holdout_frac"] = *holdout_frac;
  return j.dump(2) + "\n";
}

HoldoutSplit stratified_holdout(const ZslDataset& data, double frac, Rng& rng) {
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("holdout_frac must lie in (0, 1)");
  HoldoutSplit split;
  for (ClassId c : data.seen_classes) {
    const ClassId one[] = {c};
    std::vector<std::size_t> rows = data.rows_in(one);
    if (rows.size() < 2) {
      throw InputError("seen class " + std::to_string(c) + " has " +
                       std::to_string(rows.size()) + " rows; at least 2 are needed to hold out");
    }
    rng.shuffle(std::span<std::size_t>(rows));
    const auto wanted = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(rows.size())));
    const std::size_t held = std::min(wanted, rows.size() - 1);
    split.holdout_rows.insert(split.holdout_rows.end(), rows.begin(),
                              rows.begin() + static_cast<std::ptrdiff_t>(held));
    split.train_rows.insert(split.train_rows.end(),
                            rows.begin() + static_cast<std::ptrdiff_t>(held), rows.end());
  }
  std::ranges::sort(split.train_rows);
  std::ranges::sort(split.holdout_rows);
  return split;
}

std::vector<std::size_t> cvae_training_rows(const ZslDataset& data, const std::string& protocol,
                                            double holdout_frac, std::uint64_t seed) {
  if (protocol == "disjoint") return data.rows_in(data.seen_classes);
  if (protocol == "generalized") {
    Rng rng = Rng(seed).stream(kHoldoutStream);
    return stratified_holdout(data, holdout_frac, rng).train_rows;
  }
  throw ConfigError("unknown protocol '" + protocol + "'");
}

ProtocolResult run_disjoint_zsl(const ZslDataset& data, const ProtocolOptions& options,
                                const CvaeModel* pretrained) {
  check_common(data, options);
  const auto train_rows = data.rows_in(data.seen_classes);
  const auto test_rows = data.rows_in(data.unseen_classes);
  if (train_rows.empty()) throw StageError("validate", InputError("no seen-class rows to train on"));
  if (test_rows.empty()) throw StageError("validate", InputError("no unseen-class test rows"));

  Prepared prep = prepare_model(data, options, train_rows, pretrained);

  Rng gen = Rng(options.seed).stream(kGenerateStream);
  ZslDataset pseudo = run_stage("generate_pseudo", [&] {
    return generate_pseudo(prep.model, data.unseen_classes, prep.data.attributes,
                           options.n_pseudo, gen);
  });

  SvmConfig svm_cfg = options.svm;
  svm_cfg.seed = options.seed;
  SvmModel svm = run_stage("svm_fit", [&] { return svm_fit(pseudo, svm_cfg); });

  EvalReport report = run_stage("evaluate", [&] {
    EvalReport r;
    r.protocol = "disjoint";
    const Matrix x = gather_rows(prep.data.features, test_rows);
    const auto labels = labels_at(data, test_rows);
    const auto preds = svm_predict(svm, x);
    r.per_class_acc = per_class_accuracy(preds, labels, data.unseen_classes);
    r.per_image_acc = per_image_accuracy(preds, labels);
    r.class_counts = tally_per_class(preds, labels);
    if (options.top_k) {
      const auto lists = top_k_labels(svm, x, *options.top_k);
      r.top_k = options.top_k;
      r.top_k_acc = top_k_accuracy(lists, labels, *options.top_k);
    }
    return r;
  });
  fill_echo(report, options, prep.model, prep.trace.epochs.size());

  return ProtocolResult{std::move(report), std::move(prep.model), std::move(prep.trace),
                        std::move(pseudo), std::move(svm)};
}

ProtocolResult run_generalized_zsl(const ZslDataset& data, const ProtocolOptions& options,
                                   const CvaeModel* pretrained) {
  check_common(data, options);
  Rng holdout_rng = Rng(options.seed).stream(kHoldoutStream);
  const HoldoutSplit split =
      run_stage("holdout", [&] { return stratified_holdout(data, options.holdout_frac, holdout_rng); });
  const auto unseen_rows = data.rows_in(data.unseen_classes);
  if (unseen_rows.empty()) throw StageError("validate", InputError("no unseen-class test rows"));

  Prepared prep = prepare_model(data, options, split.train_rows, pretrained);

  const auto all_classes = union_sorted(data.seen_classes, data.unseen_classes);
  Rng gen = Rng(options.seed).stream(kGenerateStream);
  ZslDataset pseudo = run_stage("generate_pseudo", [&] {
    return generate_pseudo(prep.model, all_classes, prep.data.attributes, options.n_pseudo, gen);
  });

  SvmConfig svm_cfg = options.svm;
  svm_cfg.seed = options.seed;
  SvmModel svm = run_stage("svm_fit", [&] { return svm_fit(pseudo, svm_cfg); });

  EvalReport report = run_stage("evaluate", [&] {
    EvalReport r;
    r.protocol = "generalized";
    const auto seen_labels = labels_at(data, split.holdout_rows);
    const auto unseen_labels = labels_at(data, unseen_rows);
    const auto seen_preds = svm_predict(svm, gather_rows(prep.data.features, split.holdout_rows));
    const auto unseen_preds = svm_predict(svm, gather_rows(prep.data.features, unseen_rows));
    r.seen_acc = per_class_accuracy(seen_preds, seen_labels, data.seen_classes);
    r.unseen_acc = per_class_accuracy(unseen_preds, unseen_labels, data.unseen_classes);
    r.harmonic_mean = harmonic_mean(*r.seen_acc, *r.unseen_acc);

    std::vector<std::size_t> eval_rows = split.holdout_rows;
    eval_rows.insert(eval_rows.end(), unseen_rows.begin(), unseen_rows.end());
    std::vector<ClassId> labels = seen_labels;
    labels.insert(labels.end(), unseen_labels.begin(), unseen_labels.end());
    std::vector<ClassId> preds = seen_preds;
    preds.insert(preds.end(), unseen_preds.begin(), unseen_preds.end());
    r.per_class_acc = per_class_accuracy(preds, labels, all_classes);
    r.per_image_acc = per_image_accuracy(preds, labels);
    r.class_counts = tally_per_class(preds, labels);
    if (options.top_k) {
      const auto lists = top_k_labels(svm, gather_rows(prep.data.features, eval_rows), *options.top_k);
      r.top_k = options.top_k;
      r.top_k_acc = top_k_accuracy(lists, labels, *options.top_k);
    }
    return r;
  });
  fill_echo(report, options, prep.model, prep.trace.epochs.size());
  report.holdout_frac = options.holdout_frac;

  return ProtocolResult{std::move(report), std::move(prep.model), std::move(prep.trace),
                        std::move(pseudo), std::move(svm)};
}

CentroidFidelity centroid_fidelity(const ZslDataset& pseudo, const Matrix& true_centroids) {
  CentroidFidelity out;
  out.classes = distinct_labels(pseudo.labels);
  Matrix means(out.classes.size(), pseudo.feature_dim());
  for (std::size_t i = 0; i < out.classes.size(); ++i) {
    const ClassId one[] = {out.classes[i]};
    const auto rows = pseudo.rows_in(one);
    const Matrix m = column_means(gather_rows(pseudo.features, rows));
    std::ranges::copy(m.row(0), means.row(i).begin());
  }
  out.nearest = nearest_centroid(means, true_centroids);
  for (std::size_t i = 0; i < out.classes.size(); ++i) {
    if (out.nearest[i] == out.classes[i]) ++out.hits;
  }
  return out;
}

}  // namespace zsl
