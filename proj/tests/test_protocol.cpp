#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "zsl/error.hpp"
#include "zsl/protocol.hpp"
#include "zsl/synth.hpp"

namespace zsl {
namespace {

SynthData small_synth() {
  SynthSpec s;
  s.num_seen = 5;
  s.num_unseen = 3;
  s.attr_dim = 5;
  s.feature_dim = 12;
  s.samples_per_class = 43;
  s.seed = 3;
  return synth_generate(s);
}

ZslDataset small_dataset() {
  const SynthData s = small_synth();
  return concat_rows(s.train, s.test);
}

ProtocolOptions small_options() {
  ProtocolOptions o;
  o.cvae.latent_dim = 4;
  o.cvae.enc_hidden1 = 32;
  o.cvae.enc_hidden2 = 32;
  o.cvae.dec_hidden = 32;
  o.cvae.epochs = 5;
  o.n_pseudo = 30;
  o.svm.max_epochs = 200;
  o.seed = 7;
  return o;
}

TEST(Holdout, StratifiedCeilingPerClass) {
  const ZslDataset d = small_dataset();
  Rng rng(1);
  const HoldoutSplit s = stratified_holdout(d, 0.2, rng);
  for (ClassId c : d.seen_classes) {
    const auto held = std::ranges::count_if(s.holdout_rows, [&](std::size_t r) { return d.labels[r] == c; });
    const auto kept = std::ranges::count_if(s.train_rows, [&](std::size_t r) { return d.labels[r] == c; });
    EXPECT_EQ(held, 9);  // ceil(0.2 · 43)
    EXPECT_EQ(kept, 34);
  }
  for (std::size_t r : s.train_rows) EXPECT_TRUE(d.is_seen(d.labels[r]));
  std::vector<std::size_t> both;
  std::ranges::set_intersection(s.train_rows, s.holdout_rows, std::back_inserter(both));
  EXPECT_TRUE(both.empty());
}

TEST(Holdout, SeededAndReproducible) {
  const ZslDataset d = small_dataset();
  Rng a(2);
  Rng b(2);
  Rng c(3);
  const auto sa = stratified_holdout(d, 0.2, a);
  EXPECT_EQ(sa.holdout_rows, stratified_holdout(d, 0.2, b).holdout_rows);
  EXPECT_NE(sa.holdout_rows, stratified_holdout(d, 0.2, c).holdout_rows);
}

TEST(Holdout, SingletonClassIsNamed) {
  ZslDataset d = small_dataset();
  std::vector<std::size_t> keep;
  bool kept_class_zero = false;
  for (std::size_t r = 0; r < d.size(); ++r) {
    if (d.labels[r] == 0) {
      if (kept_class_zero) continue;
      kept_class_zero = true;
    }
    keep.push_back(r);
  }
  const ZslDataset cut = d.subset(keep);
  Rng rng(4);
  try {
    stratified_holdout(cut, 0.2, rng);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("seen class 0"), std::string::npos) << e.what();
  }
}

TEST(TrainingRows, DisjointUsesOnlySeenRows) {
  const ZslDataset d = small_dataset();
  const auto rows = cvae_training_rows(d, "disjoint", 0.2, 1);
  EXPECT_EQ(rows.size(), 5u * 43u);
  for (std::size_t r : rows) EXPECT_TRUE(d.is_seen(d.labels[r]));
  EXPECT_EQ(cvae_training_rows(d, "generalized", 0.2, 1).size(), 5u * 34u);
  EXPECT_THROW(cvae_training_rows(d, "other", 0.2, 1), ConfigError);
}

TEST(Disjoint, SvmSeesOnlyUnseenPseudoData) {
  const ZslDataset d = small_dataset();
  const ProtocolResult r = run_disjoint_zsl(d, small_options());
  EXPECT_EQ(r.svm.classes, d.unseen_classes);
  EXPECT_EQ(r.pseudo.size(), 3u * 30u);
  EXPECT_EQ(r.report.protocol, "disjoint");
  EXPECT_FALSE(r.report.harmonic_mean.has_value());
  std::size_t total = 0;
  for (const auto& [cls, t] : r.report.class_counts) {
    EXPECT_TRUE(d.is_unseen(cls));
    total += t.total;
  }
  EXPECT_EQ(total, 3u * 43u);
  EXPECT_EQ(r.trace.epochs.size(), 5u);
  EXPECT_EQ(r.report.epochs, 5u);
}

TEST(Disjoint, PerClassAccuracyMatchesCounts) {
  const ProtocolResult r = run_disjoint_zsl(small_dataset(), small_options());
  double sum = 0.0;
  for (const auto& [cls, t] : r.report.class_counts) {
    sum += static_cast<double>(t.correct) / static_cast<double>(t.total);
  }
  EXPECT_NEAR(r.report.per_class_acc, sum / static_cast<double>(r.report.class_counts.size()),
              1e-15);
}

TEST(Disjoint, ReportIsDeterministic) {
  const ZslDataset d = small_dataset();
  EXPECT_EQ(run_disjoint_zsl(d, small_options()).report.to_json(),
            run_disjoint_zsl(d, small_options()).report.to_json());
}

TEST(Disjoint, PretrainedModelSkipsTraining) {
  const ZslDataset d = small_dataset();
  const ProtocolResult first = run_disjoint_zsl(d, small_options());
  const ProtocolResult again = run_disjoint_zsl(d, small_options(), &first.model);
  EXPECT_TRUE(again.trace.epochs.empty());
  EXPECT_EQ(again.report.per_class_acc, first.report.per_class_acc);
  EXPECT_EQ(again.pseudo.features, first.pseudo.features);
}

TEST(Disjoint, EmptyUnseenSetFailsInValidateStage) {
  ZslDataset d = small_dataset();
  d.unseen_classes.clear();
  try {
    run_disjoint_zsl(d, small_options());
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "validate");
  }
}

TEST(Disjoint, ZeroPseudoIsConfigError) {
  ProtocolOptions o = small_options();
  o.n_pseudo = 0;
  try {
    run_disjoint_zsl(small_dataset(), o);
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Generalized, ReportsAllGroupsAndPseudoForEveryClass) {
  const ZslDataset d = small_dataset();
  ProtocolOptions o = small_options();
  o.top_k = 3;
  const ProtocolResult r = run_generalized_zsl(d, o);
  ASSERT_TRUE(r.report.seen_acc && r.report.unseen_acc && r.report.harmonic_mean);
  EXPECT_EQ(*r.report.harmonic_mean, harmonic_mean(*r.report.seen_acc, *r.report.unseen_acc));
  EXPECT_EQ(r.svm.classes.size(), 8u);
  EXPECT_EQ(r.pseudo.size(), 8u * 30u);
  EXPECT_TRUE(r.report.top_k_acc.has_value());
  EXPECT_GE(*r.report.top_k_acc, r.report.per_image_acc);
  std::size_t seen_total = 0;
  for (const auto& [cls, t] : r.report.class_counts) {
    if (d.is_seen(cls)) {
      EXPECT_EQ(t.total, 9u);
      seen_total += t.total;
    }
  }
  EXPECT_EQ(seen_total, 5u * 9u);
  EXPECT_EQ(r.report.holdout_frac, 0.2);
}

TEST(Report, JsonKeysAndOrder) {
  EvalReport r;
  r.protocol = "generalized";
  r.seen_acc = 0.5;
  r.unseen_acc = 0.25;
  r.harmonic_mean = harmonic_mean(0.5, 0.25);
  r.class_counts[3] = ClassTally{1, 2};
  r.holdout_frac = 0.2;
  const auto j = nlohmann::ordered_json::parse(r.to_json());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  const std::vector<std::string> expected{
      "protocol",  "per_class_acc", "per_image_acc", "seen_acc",       "unseen_acc",
      "harmonic_mean", "per_class_correct", "per_class_total", "seed", "n_pseudo",
      "svm_cost",  "feature_dim",   "attr_dim",      "latent_dim",     "epochs",
      "holdout_frac"};
  EXPECT_EQ(keys, expected);
  EXPECT_EQ(j["per_class_total"]["3"], 2);
}

TEST(Fidelity, CountsOwnNearestCentroid) {
  const Matrix centroids{{0, 0}, {10, 0}, {0, 10}};
  ZslDataset pseudo;
  pseudo.features = Matrix{{9, 1}, {11, -1}, {1, 1}, {-1, 1}};
  pseudo.labels = {1, 1, 2, 2};
  pseudo.attributes = Matrix(3, 1);
  const CentroidFidelity f = centroid_fidelity(pseudo, centroids);
  EXPECT_EQ(f.classes, (std::vector<ClassId>{1, 2}));
  EXPECT_EQ(f.nearest, (std::vector<ClassId>{1, 0}));
  EXPECT_EQ(f.hits, 1u);
}

}  // namespace
}  // namespace zsl
