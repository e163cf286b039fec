#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zsl/adam.hpp"
#include "zsl/dataset.hpp"
#include "zsl/io.hpp"
#include "zsl/matrix.hpp"
#include "zsl/nn.hpp"
#include "zsl/rng.hpp"

namespace zsl {

struct CvaeConfig {
  std::size_t feature_dim = 0;
  std::size_t attr_dim = 0;
  std::size_t latent_dim = 100;
  std::size_t enc_hidden1 = 1024;
  std::size_t enc_hidden2 = 1024;
  std::size_t dec_hidden = 1024;
  double dropout_rate = 0.3;
  std::size_t batch_size = 50;
  std::size_t epochs = 50;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  /// Throws ConfigError for zero counts, bad rates or a non-positive lr.
  void validate() const;
  std::vector<std::string> warnings() const;
};

struct Posterior {
  Matrix mu;      // batch × latent
  Matrix logvar;  // batch × latent, log σ² per dimension
};

struct LossTerms {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// Encoder q(z | x, a): (d+q) → h1 → dropout → h2 → 2·latent, the output split
/// into μ and log σ². Decoder p(x | z, a): (latent+q) → h → d. Hidden layers
/// use ReLU, outputs are linear.
class CvaeModel {
 public:
  /// Glorot-initialized weights, zero biases, drawn from `rng`.
  CvaeModel(const CvaeConfig& config, Rng& rng);
  CvaeModel(const CvaeConfig& config, Mlp encoder, Mlp decoder);

  const CvaeConfig& config() const noexcept { return config_; }
  const Mlp& encoder() const noexcept { return encoder_; }
  const Mlp& decoder() const noexcept { return decoder_; }
  Mlp& encoder() noexcept { return encoder_; }
  Mlp& decoder() noexcept { return decoder_; }

  /// rng feeds dropout and is required only in training mode.
  Posterior encode(const Matrix& x, const Matrix& attrs, Mode mode, Rng* rng = nullptr);
  Matrix decode(const Matrix& z, const Matrix& attrs);

  /// Loss for one batch with fixed reparameterization noise, followed by
  /// backpropagation. Gradients are ordered like parameters().
  struct Step {
    LossTerms loss;
    std::vector<Matrix> grads;
  };
  Step loss_and_gradients(const Matrix& x, const Matrix& attrs, const Matrix& noise, Mode mode,
                          Rng* rng = nullptr);
  /// Forward-only loss with fixed noise.
  LossTerms loss(const Matrix& x, const Matrix& attrs, const Matrix& noise, Mode mode,
                 Rng* rng = nullptr);

  /// Encoder weights and biases, then decoder, layer by layer (W then b).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;

 private:
  CvaeConfig config_;
  Mlp encoder_;
  Mlp decoder_;
};

/// z = μ + exp(½·logvar) ⊙ noise.
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise);
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng);

/// Per row ½·Σ(μ² + e^logvar − logvar − 1).
std::vector<double> gaussian_kl_rows(const Matrix& mu, const Matrix& logvar);
/// Batch mean of gaussian_kl_rows.
double gaussian_kl(const Matrix& mu, const Matrix& logvar);
/// Batch mean of per-row squared Euclidean distance.
double reconstruction_loss(const Matrix& x, const Matrix& x_hat);
/// reconstruction + kl with unit weights.
LossTerms total_loss(const Matrix& x, const Matrix& x_hat, const Matrix& mu,
                     const Matrix& logvar);

struct EpochStats {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  CvaeModel model;
  TrainTrace trace;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochStats&)>;

/// Trains on every row of `seen`; all labels must be seen classes. Mini-batches
/// are reshuffled each epoch and every parameter gets an Adam update per batch.
/// Parameters are rounded to float precision at the end so checkpoints
/// reproduce the model exactly. Throws DivergedError on a non-finite loss.
TrainResult train_cvae(const ZslDataset& seen, const CvaeConfig& config,
                       const EpochCallback& on_epoch = {});

/// Decodes n_per_class samples per class from z ~ N(0, I) concatenated with
/// the class attributes. Class i of `class_ids` draws from rng stream i.
/// The result's unseen_classes are the generated ids.
ZslDataset generate_pseudo(CvaeModel& model, std::span<const ClassId> class_ids,
                           const Matrix& attrs, std::size_t n_per_class, Rng& rng);

std::vector<NamedMatrix> to_checkpoint_entries(const CvaeModel& model);
CvaeModel cvae_from_checkpoint_entries(std::span<const NamedMatrix> entries);
void save_checkpoint(const CvaeModel& model, const std::filesystem::path& path);
CvaeModel load_cvae_checkpoint(const std::filesystem::path& path);

}  // namespace zsl
