// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zsl/commands.hpp"
#include "zsl/cvae.hpp"
#include "zsl/metrics.hpp"
#include "zsl/protocol.hpp"
#include "zsl/svm.hpp"
#include "zsl/synth.hpp"

namespace {

using zsl::ClassId;
using zsl::Matrix;
using zsl::Rng;

constexpr double kGradRelTol = 1e-4;
constexpr double kGradSeconds = 10.0;
constexpr double kKlRelTol = 0.01;
constexpr std::size_t kKlSamples = 1000000;
constexpr int kKlPairs = 20;
constexpr double kKlSeconds = 30.0;
constexpr double kDisjointGate = 0.85;
constexpr double kOracleGate = 0.99;
constexpr double kPipelineSeconds = 120.0;
constexpr double kHarmonicGate = 0.70;
constexpr double kUnseenGate = 0.60;
constexpr std::size_t kFidelityHits = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void check(const std::string& name, const std::function<Outcome()>& fn) {
  try {
    report(name, fn());
  } catch (const std::exception& e) {
    report(name, Outcome{false, std::string("threw: ") + e.what()});
  }
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  zsl::CvaeConfig c;
  c.feature_dim = 6;
  c.attr_dim = 3;
  c.latent_dim = 4;
  c.enc_hidden1 = 5;
  c.enc_hidden2 = 5;
  c.dec_hidden = 5;
  c.dropout_rate = 0.0;
  Rng rng(2024);
  zsl::CvaeModel m(c, rng);
  for (Matrix* p : m.parameters()) {
    for (double& v : p->data()) v += rng.uniform(-0.2, 0.2);
  }
  Matrix x(3, 6);
  Matrix a(3, 3);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  for (double& v : a.data()) v = rng.uniform(0, 1);
  const Matrix noise = zsl::sample_standard_normal(rng, 3, 4);

  const auto step = m.loss_and_gradients(x, a, noise, zsl::Mode::kInference);
  const double h = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  auto params = m.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = m.loss(x, a, noise, zsl::Mode::kInference).total;
      p.data()[i] = saved - h;
      const double down = m.loss(x, a, noise, zsl::Mode::kInference).total;
      p.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = step.grads[k].data()[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max(1e-8, std::abs(numeric) + std::abs(analytic));
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradSeconds,
          std::to_string(checked) + " parameters, max rel err " + fmt("%.2e", worst) + ", " +
              fmt("%.2fs", secs)};
}

Outcome kl_oracle() {
  const auto t0 = Clock::now();
  bool ok = zsl::gaussian_kl(Matrix{{0.0}}, Matrix{{0.0}}) == 0.0 &&
            zsl::gaussian_kl(Matrix{{1.0}}, Matrix{{0.0}}) == 0.5;
  const std::string exact = ok ? "exact values ok" : "exact values WRONG";

  Rng rng(7);
  const std::size_t dim = 4;
  double worst = 0.0;
  for (int pair = 0; pair < kKlPairs; ++pair) {
    Matrix mu(1, dim);
    Matrix lv(1, dim);
    for (double& v : mu.data()) v = rng.uniform(-1.5, 1.5);
    for (double& v : lv.data()) v = rng.uniform(-1.5, 1.5);
    const double closed = zsl::gaussian_kl(mu, lv);

    // Average of log q(z) − log p(z) over z = μ + σ·ε.
    double sum = 0.0;
    for (std::size_t s = 0; s < kKlSamples; ++s) {
      double term = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double e = rng.normal();
        const double z = mu(0, j) + std::exp(0.5 * lv(0, j)) * e;
        term += -0.5 * (lv(0, j) + e * e) + 0.5 * z * z;
      }
      sum += term;
    }
    const double mc = sum / static_cast<double>(kKlSamples);
    worst = std::max(worst, std::abs(mc - closed) / closed);
  }
  const double secs = seconds_since(t0);
  ok = ok && worst < kKlRelTol && secs < kKlSeconds;
  return {ok, exact + ", " + std::to_string(kKlPairs) + " pairs max rel err " +
                  fmt("%.4f", worst) + ", " + fmt("%.1fs", secs)};
}

zsl::ProtocolOptions benchmark_options() {
  zsl::ProtocolOptions o;
  o.cvae.epochs = 50;
  o.n_pseudo = 300;
  o.svm.cost = 100.0;
  o.seed = 1;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome metric_truths() {
  const std::vector<ClassId> labels{0, 1, 1, 1};
  const std::vector<ClassId> preds{0, 0, 0, 0};
  const std::vector<ClassId> classes{0, 1};
  const double pc = zsl::per_class_accuracy(preds, labels, classes);
  const double pi = zsl::per_image_accuracy(preds, labels);
  const double hm = zsl::harmonic_mean(1.0, 0.0);

  Rng rng(3);
  Matrix scores(500, 10);
  for (double& v : scores.data()) v = rng.normal();
  std::vector<ClassId> ids(10);
  for (int i = 0; i < 10; ++i) ids[static_cast<std::size_t>(i)] = i;
  std::vector<ClassId> truth;
  for (int i = 0; i < 500; ++i) truth.push_back(static_cast<ClassId>(rng.uniform_index(10)));
  bool monotone = true;
  double prev = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double acc = zsl::top_k_accuracy(zsl::top_k_from_scores(scores, ids, k), truth, k);
    monotone = monotone && acc >= prev;
    prev = acc;
  }
  monotone = monotone && prev == 1.0;
  const bool ok = pc == 0.5 && pi == 0.25 && hm == 0.0 && monotone;
  return {ok, "per-class " + fmt("%g", pc) + " vs per-image " + fmt("%g", pi) +
                  ", harmonic_mean(1,0) = " + fmt("%g", hm) +
                  (monotone ? ", top-k monotone" : ", top-k NOT monotone")};
}

Outcome svm_toy() {
  Rng rng(11);
  zsl::ZslDataset d;
  d.features = Matrix(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    const bool pos = i < 100;
    d.features(i, 0) = pos ? rng.uniform(1.0, 3.0) : rng.uniform(-3.0, -1.0);
    d.features(i, 1) = rng.uniform(-2.0, 2.0);
    d.labels.push_back(pos ? 0 : 1);
  }
  d.attributes = Matrix(2, 1, 0.0);
  d.unseen_classes = {0, 1};

  const zsl::SvmConfig cfg;
  const zsl::SvmModel model = zsl::svm_fit(d, cfg);
  const auto pred = zsl::svm_predict(model, d.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == d.labels[i];

  bool non_increasing = true;
  std::size_t epochs = 0;
  for (ClassId c : {0, 1}) {
    std::vector<double> y;
    for (ClassId l : d.labels) y.push_back(l == c ? 1.0 : -1.0);
    const zsl::BinarySvm b = zsl::fit_binary_svm(d.features, y, cfg);
    epochs = std::max(epochs, b.objective.size() - 1);
    for (std::size_t t = 1; t < b.objective.size(); ++t) {
      if (b.objective[t] > b.objective[t - 1] * (1.0 + cfg.tol)) non_increasing = false;
    }
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());
  return {acc == 1.0 && non_increasing,
          "train acc " + fmt("%.4f", acc) + ", objective " +
              (non_increasing ? "non-increasing" : "INCREASED") + " over " +
              std::to_string(epochs) + " epochs"};
}

}  // namespace

int main() {
  check("gradient correctness", gradient_check);
  check("kl oracle", kl_oracle);
  check("metric unit truths", metric_truths);
  check("svm separable toy", svm_toy);

  const zsl::SynthSpec spec;  // 15 seen / 5 unseen, q=10, d=50, 200 per class, sigma 0.1, seed 1
  zsl::SynthData synth = zsl::synth_generate(spec);
  const zsl::ZslDataset data = zsl::concat_rows(synth.train, synth.test);

  std::optional<zsl::ProtocolResult> disjoint;
  check("synthetic disjoint zsl", [&] {
    const auto t0 = Clock::now();
    const zsl::SynthData fresh = zsl::synth_generate(spec);
    const zsl::ZslDataset all = zsl::concat_rows(fresh.train, fresh.test);
    disjoint = zsl::run_disjoint_zsl(all, benchmark_options());
    const double secs = seconds_since(t0);

    const auto oracle = zsl::nearest_centroid(fresh.test.features, fresh.centroids);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < oracle.size(); ++i) hit += oracle[i] == fresh.test.labels[i];
    const double oracle_acc = static_cast<double>(hit) / static_cast<double>(oracle.size());
    const double acc = disjoint->report.per_class_acc;
    return Outcome{acc >= kDisjointGate && oracle_acc >= kOracleGate && secs < kPipelineSeconds,
                   "unseen per-class acc " + fmt("%.4f", acc) + " (gate 0.85), oracle " +
                       fmt("%.4f", oracle_acc) + ", " + fmt("%.1fs", secs)};
  });

  check("synthetic generalized zsl", [&] {
    const zsl::ProtocolResult g = zsl::run_generalized_zsl(data, benchmark_options());
    const double hm = *g.report.harmonic_mean;
    const double u = *g.report.unseen_acc;
    return Outcome{hm >= kHarmonicGate && u >= kUnseenGate,
                   "harmonic mean " + fmt("%.4f", hm) + " (seen " +
                       fmt("%.4f", *g.report.seen_acc) + ", unseen " + fmt("%.4f", u) + ")"};
  });

  check("centroid fidelity", [&] {
    if (!disjoint) return Outcome{false, "disjoint run unavailable"};
    const zsl::CentroidFidelity f = zsl::centroid_fidelity(disjoint->pseudo, synth.centroids);
    return Outcome{f.hits >= kFidelityHits && f.classes.size() == 5,
                   std::to_string(f.hits) + " of " + std::to_string(f.classes.size()) +
                       " unseen classes nearest their own true centroid among " +
                       std::to_string(synth.centroids.rows())};
  });

  check("determinism", [&] {
    if (!disjoint) return Outcome{false, "disjoint run unavailable"};
    const auto path = std::filesystem::temp_directory_path() / "zsl_acceptance_report.json";
    zsl::RunConfig cfg;
    cfg.cvae = benchmark_options().cvae;
    cfg.report = path;
    cfg.quiet = true;
    cfg.seed = 1;
    std::ostringstream log;
    zsl::cmd_pipeline(cfg, log);
    const std::string again = slurp(path);
    std::filesystem::remove(path);
    const std::string first = disjoint->report.to_json();
    return Outcome{first == again, first == again
                                       ? "pipeline report byte-identical (" +
                                             std::to_string(first.size()) + " bytes)"
                                       : "reports differ"};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
