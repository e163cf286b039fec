#include "zsl/cvae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "zsl/error.hpp"

namespace zsl {

void CvaeConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("cvae config: ") + name + " must be >= 1");
  };
  positive(feature_dim, "feature_dim");
  positive(attr_dim, "attr_dim");
  positive(latent_dim, "latent_dim");
  positive(enc_hidden1, "enc_hidden1");
  positive(enc_hidden2, "enc_hidden2");
  positive(dec_hidden, "dec_hidden");
  positive(batch_size, "batch_size");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("cvae config: dropout_rate must lie in [0, 1)");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("cvae config: lr must be positive");
}

std::vector<std::string> CvaeConfig::warnings() const {
  std::vector<std::string> out;
  if (latent_dim > feature_dim) {
    out.push_back("latent_dim (" + std::to_string(latent_dim) + ") exceeds feature_dim (" +
                  std::to_string(feature_dim) + ")");
  }
  return out;
}

namespace {

MlpSpec encoder_spec(const CvaeConfig& c) {
  return MlpSpec{
      .widths = {c.feature_dim + c.attr_dim, c.enc_hidden1, c.enc_hidden2, 2 * c.latent_dim},
      .dropout_rate = c.dropout_rate,
      .dropout_after = 0,
  };
}

MlpSpec decoder_spec(const CvaeConfig& c) {
  return MlpSpec{.widths = {c.latent_dim + c.attr_dim, c.dec_hidden, c.feature_dim},
                 .dropout_rate = 0.0,
                 .dropout_after = std::nullopt};
}

void check_batch(const Matrix& x, const Matrix& attrs, const CvaeConfig& c) {
  if (x.cols() != c.feature_dim || attrs.cols() != c.attr_dim || x.rows() != attrs.rows()) {
    throw ShapeError("cvae input " + x.shape_string() + " with attributes " +
                     attrs.shape_string() + " does not match feature_dim=" +
                     std::to_string(c.feature_dim) + ", attr_dim=" + std::to_string(c.attr_dim));
  }
}

}  // namespace

CvaeModel::CvaeModel(const CvaeConfig& config, Rng& rng)
    : config_(config),
      encoder_((config.validate(), Mlp::build(encoder_spec(config), rng))),
      decoder_(Mlp::build(decoder_spec(config), rng)) {}

CvaeModel::CvaeModel(const CvaeConfig& config, Mlp encoder, Mlp decoder)
    : config_(config), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (encoder_.in_dim() != config_.feature_dim + config_.attr_dim ||
      encoder_.out_dim() != 2 * config_.latent_dim) {
    throw ConfigError("encoder widths do not match the cvae config");
  }
  if (decoder_.in_dim() != config_.latent_dim + config_.attr_dim ||
      decoder_.out_dim() != config_.feature_dim) {
    throw ConfigError("decoder widths do not match the cvae config");
  }
}

Posterior CvaeModel::encode(const Matrix& x, const Matrix& attrs, Mode mode, Rng* rng) {
  check_batch(x, attrs, config_);
  const Matrix out = encoder_.forward(hconcat(x, attrs), mode, rng);
  return Posterior{
      .mu = slice_cols(out, 0, config_.latent_dim),
      .logvar = slice_cols(out, config_.latent_dim, 2 * config_.latent_dim),
  };
}

Matrix CvaeModel::decode(const Matrix& z, const Matrix& attrs) {
  if (z.cols() != config_.latent_dim || attrs.cols() != config_.attr_dim ||
      z.rows() != attrs.rows()) {
    throw ShapeError("decode: latent " + z.shape_string() + " with attributes " +
                     attrs.shape_string());
  }
  return decoder_.forward(hconcat(z, attrs), Mode::kInference);
}

LossTerms CvaeModel::loss(const Matrix& x, const Matrix& attrs, const Matrix& noise, Mode mode,
                          Rng* rng) {
  Posterior post = encode(x, attrs, mode, rng);
  const Matrix x_hat = decode(reparameterize(post.mu, post.logvar, noise), attrs);
  return total_loss(x, x_hat, post.mu, post.logvar);
}

CvaeModel::Step CvaeModel::loss_and_gradients(const Matrix& x, const Matrix& attrs,
                                              const Matrix& noise, Mode mode, Rng* rng) {
  Posterior post = encode(x, attrs, mode, rng);
  require_same_shape(post.mu, noise, "reparameterization noise");
  const Matrix z = reparameterize(post.mu, post.logvar, noise);
  const Matrix x_hat = decode(z, attrs);

  Step step;
  step.loss = total_loss(x, x_hat, post.mu, post.logvar);

  const double inv_batch = 1.0 / static_cast<double>(x.rows());
  Matrix grad_xhat = scale(subtract(x_hat, x), 2.0 * inv_batch);
  MlpGradients dec = decoder_.backward(grad_xhat);

  const std::size_t latent = config_.latent_dim;
  Matrix grad_enc_out(x.rows(), 2 * latent);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto gz = dec.input.row(r);
    auto mu = post.mu.row(r);
    auto lv = post.logvar.row(r);
    auto eps = noise.row(r);
    auto out = grad_enc_out.row(r);
    for (std::size_t j = 0; j < latent; ++j) {
      const double var = std::exp(lv[j]);
      const double sd = std::exp(0.5 * lv[j]);
      // Reconstruction path through z plus the closed-form KL terms.
      out[j] = gz[j] + mu[j] * inv_batch;
      out[latent + j] = gz[j] * 0.5 * sd * eps[j] + 0.5 * (var - 1.0) * inv_batch;
    }
  }
  MlpGradients enc = encoder_.backward(grad_enc_out);

  for (auto* grads : {&enc, &dec}) {
    for (auto& layer : grads->dense) {
      step.grads.push_back(std::move(layer.weights));
      step.grads.push_back(std::move(layer.bias));
    }
  }
  return step;
}

std::vector<Matrix*> CvaeModel::parameters() {
  std::vector<Matrix*> out;
  for (Mlp* net : {&encoder_, &decoder_}) {
    for (DenseLayer* layer : net->dense_layers()) {
      out.push_back(&layer->weights());
      out.push_back(&layer->bias());
    }
  }
  return out;
}

std::vector<const Matrix*> CvaeModel::parameters() const {
  std::vector<const Matrix*> out;
  for (const Mlp* net : {&encoder_, &decoder_}) {
    for (const DenseLayer* layer : net->dense_layers()) {
      out.push_back(&layer->weights());
      out.push_back(&layer->bias());
    }
  }
  return out;
}

std::vector<std::string> CvaeModel::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& [prefix, net] :
       {std::pair<const char*, const Mlp*>{"encoder", &encoder_}, {"decoder", &decoder_}}) {
    const std::size_t n = net->dense_layers().size();
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back(std::string(prefix) + "." + std::to_string(i) + ".weight");
      names.push_back(std::string(prefix) + "." + std::to_string(i) + ".bias");
    }
  }
  return names;
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise) {
  require_same_shape(mu, logvar, "reparameterize");
  require_same_shape(mu, noise, "reparameterize");
  Matrix z(mu.rows(), mu.cols());
  auto m = mu.data();
  auto lv = logvar.data();
  auto e = noise.data();
  auto out = z.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] + std::exp(0.5 * lv[i]) * e[i];
  return z;
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng) {
  require_same_shape(mu, logvar, "reparameterize");
  return reparameterize(mu, logvar, sample_standard_normal(rng, mu.rows(), mu.cols()));
}

std::vector<double> gaussian_kl_rows(const Matrix& mu, const Matrix& logvar) {
  require_same_shape(mu, logvar, "gaussian_kl");
  std::vector<double> out(mu.rows());
  for (std::size_t r = 0; r < mu.rows(); ++r) {
    auto m = mu.row(r);
    auto lv = logvar.row(r);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      // expm1(lv) - lv is e^lv - 1 - lv without cancellation near lv = 0.
      sum += m[j] * m[j] + (std::expm1(lv[j]) - lv[j]);
    }
    out[r] = 0.5 * sum;
  }
  return out;
}

double gaussian_kl(const Matrix& mu, const Matrix& logvar) {
  const auto rows = gaussian_kl_rows(mu, logvar);
  if (rows.empty()) throw ShapeError("gaussian_kl of an empty batch");
  return std::accumulate(rows.begin(), rows.end(), 0.0) / static_cast<double>(rows.size());
}

double reconstruction_loss(const Matrix& x, const Matrix& x_hat) {
  require_same_shape(x, x_hat, "reconstruction_loss");
  if (x.rows() == 0) throw ShapeError("reconstruction_loss of an empty batch");
  double sum = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) sum += squared_distance(x.row(r), x_hat.row(r));
  return sum / static_cast<double>(x.rows());
}

LossTerms total_loss(const Matrix& x, const Matrix& x_hat, const Matrix& mu,
                     const Matrix& logvar) {
  if (mu.rows() != x.rows()) {
    throw ShapeError("total_loss: posterior " + mu.shape_string() + " vs batch " +
                     x.shape_string());
  }
  LossTerms t;
  t.reconstruction = reconstruction_loss(x, x_hat);
  t.kl = gaussian_kl(mu, logvar);
  t.total = t.reconstruction + t.kl;
  return t;
}

TrainResult train_cvae(const ZslDataset& seen, const CvaeConfig& config_in,
                       const EpochCallback& on_epoch) {
  if (seen.size() == 0) throw InputError("cannot train the cvae on an empty dataset");
  CvaeConfig config = config_in;
  if (config.feature_dim == 0) config.feature_dim = seen.feature_dim();
  if (config.attr_dim == 0) config.attr_dim = seen.attr_dim();
  config.validate();
  if (config.feature_dim != seen.feature_dim() || config.attr_dim != seen.attr_dim()) {
    throw ConfigError("cvae config dims (" + std::to_string(config.feature_dim) + ", " +
                      std::to_string(config.attr_dim) + ") do not match the dataset (" +
                      std::to_string(seen.feature_dim()) + ", " +
                      std::to_string(seen.attr_dim()) + ")");
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen.is_seen(seen.labels[i])) {
      throw InputError("cvae training row " + std::to_string(i) + " has label " +
                       std::to_string(seen.labels[i]) + ", which is not a seen class");
    }
  }

  const Rng master(config.seed);
  Rng init_rng = master.stream(0);
  Rng shuffle_rng = master.stream(1);
  Rng noise_rng = master.stream(2);
  Rng dropout_rng = master.stream(3);

  TrainResult result{CvaeModel(config, init_rng), {}};
  CvaeModel& model = result.model;

  std::vector<AdamState> optim;
  const AdamConfig adam{.lr = config.lr};
  for (const Matrix* p : model.parameters()) optim.emplace_back(p->rows(), p->cols(), adam);

  const Matrix row_attrs = seen.attributes_for(seen.labels);
  std::vector<std::size_t> order(seen.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochStats stats;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(begin + config.batch_size, order.size());
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Matrix x = gather_rows(seen.features, idx);
      const Matrix a = gather_rows(row_attrs, idx);
      const Matrix noise = sample_standard_normal(noise_rng, idx.size(), config.latent_dim);

      auto step = model.loss_and_gradients(x, a, noise, Mode::kTrain, &dropout_rng);
      if (!std::isfinite(step.loss.total)) throw DivergedError(static_cast<int>(epoch + 1));

      const double weight = static_cast<double>(idx.size());
      stats.total += step.loss.total * weight;
      stats.reconstruction += step.loss.reconstruction * weight;
      stats.kl += step.loss.kl * weight;

      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) optim[i].step(*params[i], step.grads[i]);
    }
    const double n = static_cast<double>(order.size());
    stats.total /= n;
    stats.reconstruction /= n;
    stats.kl /= n;
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.epochs.push_back(stats);
    if (on_epoch) on_epoch(epoch + 1, stats);
  }

  for (Matrix* p : model.parameters()) {
    if (!all_finite(*p)) throw DivergedError(static_cast<int>(config.epochs));
    round_to_float(*p);
  }
  return result;
}

ZslDataset generate_pseudo(CvaeModel& model, std::span<const ClassId> class_ids,
                           const Matrix& attrs, std::size_t n_per_class, Rng& rng) {
  const CvaeConfig& c = model.config();
  if (n_per_class == 0) throw InputError("n_per_class must be >= 1");
  if (attrs.cols() != c.attr_dim) {
    throw ShapeError("attribute matrix " + attrs.shape_string() + " does not match attr_dim " +
                     std::to_string(c.attr_dim));
  }
  for (ClassId id : class_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= attrs.rows()) {
      throw InputError("unknown class id " + std::to_string(id) + " (have " +
                       std::to_string(attrs.rows()) + " attribute rows)");
    }
  }

  const Rng base(rng.next_u64());
  ZslDataset out;
  out.attributes = attrs;
  out.features = Matrix(class_ids.size() * n_per_class, c.feature_dim);
  out.labels.reserve(out.features.rows());
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    const ClassId id = class_ids[i];
    Rng stream = base.stream(i);
    const Matrix z = sample_standard_normal(stream, n_per_class, c.latent_dim);
    Matrix a(n_per_class, c.attr_dim);
    for (std::size_t r = 0; r < n_per_class; ++r) {
      std::ranges::copy(attrs.row(static_cast<std::size_t>(id)), a.row(r).begin());
    }
    const Matrix x = model.decode(z, a);
    for (std::size_t r = 0; r < n_per_class; ++r) {
      std::ranges::copy(x.row(r), out.features.row(i * n_per_class + r).begin());
      out.labels.push_back(id);
    }
  }
  out.unseen_classes = distinct_labels(out.labels);
  return out;
}

std::vector<NamedMatrix> to_checkpoint_entries(const CvaeModel& model) {
  const CvaeConfig& c = model.config();
  std::vector<NamedMatrix> entries;
  entries.push_back({"cvae.arch",
                     Matrix{{static_cast<double>(c.feature_dim), static_cast<double>(c.attr_dim),
                             static_cast<double>(c.latent_dim), static_cast<double>(c.enc_hidden1),
                             static_cast<double>(c.enc_hidden2),
                             static_cast<double>(c.dec_hidden)}}});
  entries.push_back({"cvae.dropout", Matrix{{c.dropout_rate}}});
  const auto names = model.parameter_names();
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) entries.push_back({names[i], *params[i]});
  return entries;
}

CvaeModel cvae_from_checkpoint_entries(std::span<const NamedMatrix> entries) {
  const Matrix& arch = find_entry(entries, "cvae.arch");
  if (arch.rows() != 1 || arch.cols() != 6) throw FormatError("malformed cvae.arch entry", 0);
  auto count = [&](std::size_t i) {
    const double v = arch(0, i);
    if (!(v >= 1.0) || v != std::floor(v)) throw FormatError("malformed cvae.arch entry", 0);
    return static_cast<std::size_t>(v);
  };
  CvaeConfig config;
  config.feature_dim = count(0);
  config.attr_dim = count(1);
  config.latent_dim = count(2);
  config.enc_hidden1 = count(3);
  config.enc_hidden2 = count(4);
  config.dec_hidden = count(5);
  config.dropout_rate = find_entry(entries, "cvae.dropout")(0, 0);

  Rng scratch(0);
  CvaeModel model(config, scratch);
  const auto names = model.parameter_names();
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& stored = find_entry(entries, names[i]);
    if (stored.rows() != params[i]->rows() || stored.cols() != params[i]->cols()) {
      throw FormatError("checkpoint entry '" + names[i] + "' has shape " +
                            stored.shape_string() + ", expected " + params[i]->shape_string(),
                        0);
    }
    *params[i] = stored;
  }
  return model;
}

void save_checkpoint(const CvaeModel& model, const std::filesystem::path& path) {
  save_checkpoint(path, to_checkpoint_entries(model));
}

CvaeModel load_cvae_checkpoint(const std::filesystem::path& path) {
  return cvae_from_checkpoint_entries(load_checkpoint(path));
}

}  // namespace zsl
