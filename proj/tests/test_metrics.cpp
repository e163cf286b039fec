#include <gtest/gtest.h>

#include <cmath>

#include "zsl/error.hpp"
#include "zsl/metrics.hpp"
#include "zsl/rng.hpp"
#include "zsl/svm.hpp"

namespace zsl {
namespace {

using Ids = std::vector<ClassId>;

TEST(PerClass, AllCorrectIsOne) {
  const Ids y{0, 1, 1, 2};
  EXPECT_EQ(per_class_accuracy(y, y, Ids{0, 1, 2}), 1.0);
}

TEST(PerClass, ImbalancedExampleDiffersFromPerImage) {
  const Ids labels{0, 1, 1, 1};
  const Ids preds{0, 0, 0, 0};
  EXPECT_EQ(per_class_accuracy(preds, labels, Ids{0, 1}), 0.5);
  EXPECT_EQ(per_image_accuracy(preds, labels), 0.25);
}

TEST(PerClass, InvariantUnderClassDuplication) {
  const Ids labels{0, 1, 1, 1};
  const Ids preds{0, 0, 0, 0};
  const Ids labels2{0, 0, 0, 1, 1, 1};
  const Ids preds2{0, 0, 0, 0, 0, 0};
  EXPECT_EQ(per_class_accuracy(preds2, labels2, Ids{0, 1}),
            per_class_accuracy(preds, labels, Ids{0, 1}));
  EXPECT_NE(per_image_accuracy(preds2, labels2), per_image_accuracy(preds, labels));
}

TEST(PerClass, AbsentClassesLeaveDenominator) {
  const Ids labels{0, 0};
  const Ids preds{0, 1};
  EXPECT_EQ(per_class_accuracy(preds, labels, Ids{0, 1, 2}), 0.5);
}

TEST(PerClass, Errors) {
  EXPECT_THROW(per_class_accuracy(Ids{}, Ids{}, Ids{0}), InputError);
  EXPECT_THROW(per_class_accuracy(Ids{0}, Ids{3}, Ids{0, 1}), InputError);
  EXPECT_THROW(per_class_accuracy(Ids{0, 1}, Ids{0}, Ids{0, 1}), InputError);
}

TEST(PerImage, Values) {
  EXPECT_EQ(per_image_accuracy(Ids{1, 1}, Ids{0, 0}), 0.0);
  EXPECT_EQ(per_image_accuracy(Ids{0, 1, 2, 2}, Ids{0, 1, 2, 3}), 0.75);
  EXPECT_THROW(per_image_accuracy(Ids{}, Ids{}), InputError);
}

TEST(PerImage, EqualsPerClassWhenBalanced) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(5);
    const std::size_t per = 1 + rng.uniform_index(10);
    Ids labels;
    Ids preds;
    Ids classes;
    for (std::size_t c = 0; c < k; ++c) {
      classes.push_back(static_cast<ClassId>(c));
      for (std::size_t i = 0; i < per; ++i) {
        labels.push_back(static_cast<ClassId>(c));
        preds.push_back(static_cast<ClassId>(rng.uniform_index(k)));
      }
    }
    EXPECT_NEAR(per_image_accuracy(preds, labels), per_class_accuracy(preds, labels, classes),
                1e-12);
  }
}

TEST(Tally, CountsPerTrueLabel) {
  const auto t = tally_per_class(Ids{0, 0, 1}, Ids{0, 1, 1});
  EXPECT_EQ(t.at(0), (ClassTally{1, 1}));
  EXPECT_EQ(t.at(1), (ClassTally{1, 2}));
}

TEST(TopKAccuracy, ExhaustiveListsScoreOne) {
  const std::vector<Ids> lists{{2, 0, 1}, {1, 2, 0}};
  EXPECT_EQ(top_k_accuracy(lists, Ids{0, 1}, 3), 1.0);
}

TEST(TopKAccuracy, WrongLengthIsInputError) {
  const std::vector<Ids> lists{{2, 0}, {1}};
  EXPECT_THROW(top_k_accuracy(lists, Ids{0, 1}, 2), InputError);
}

TEST(TopKAccuracy, KOneMatchesPerImageAndIsMonotone) {
  Rng rng(2);
  Matrix scores(200, 8);
  for (double& v : scores.data()) v = rng.normal();
  const Ids classes{0, 1, 2, 3, 4, 5, 6, 7};
  Ids labels;
  for (std::size_t i = 0; i < 200; ++i) labels.push_back(static_cast<ClassId>(rng.uniform_index(8)));

  const auto top1 = top_k_from_scores(scores, classes, 1);
  Ids pred;
  for (const auto& l : top1) pred.push_back(l.front());
  EXPECT_EQ(top_k_accuracy(top1, labels, 1), per_image_accuracy(pred, labels));

  double prev = 0.0;
  for (std::size_t k = 1; k <= 8; ++k) {
    const double acc = top_k_accuracy(top_k_from_scores(scores, classes, k), labels, k);
    EXPECT_GE(acc, prev);
    prev = acc;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(HarmonicMean, Values) {
  EXPECT_EQ(harmonic_mean(0.5, 0.5), 0.5);
  EXPECT_EQ(harmonic_mean(1.0, 0.0), 0.0);
  EXPECT_EQ(harmonic_mean(0.0, 0.0), 0.0);
  EXPECT_NEAR(harmonic_mean(0.6, 0.3), 0.4, 1e-15);
}

TEST(HarmonicMean, BoundedByArithmeticMean) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double s = rng.uniform();
    const double u = rng.uniform();
    const double h = harmonic_mean(s, u);
    EXPECT_LE(h, (s + u) / 2 + 1e-15);
    EXPECT_LT(h, (s + u) / 2);
  }
  EXPECT_EQ(harmonic_mean(0.7, 0.7), 0.7);
}

}  // namespace
}  // namespace zsl
