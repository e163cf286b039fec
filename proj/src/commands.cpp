#include "zsl/commands.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>

#include "zsl/error.hpp"

namespace zsl {

namespace {

SynthSpec seeded_synth(const RunConfig& config) {
  SynthSpec spec = config.synth;
  spec.seed = config.seed;
  return spec;
}

ProtocolOptions protocol_options(const RunConfig& config, std::ostream& log) {
  ProtocolOptions opts;
  opts.cvae = config.cvae;
  opts.svm = config.svm;
  opts.n_pseudo = config.n_pseudo;
  opts.holdout_frac = config.holdout_frac;
  opts.top_k = config.top_k;
  opts.standardize = config.standardize;
  opts.seed = config.seed;
  if (!config.quiet) {
    opts.on_epoch = [&log](std::size_t epoch, const EpochStats& s) {
      log << "epoch " << epoch << ": loss " << s.total << " (reconstr " << s.reconstruction
          << ", kl " << s.kl << ") " << s.seconds << "s\n";
    };
  }
  return opts;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void print_headline(const EvalReport& report, std::ostream& log) {
  if (report.harmonic_mean) {
    log << "harmonic_mean " << *report.harmonic_mean << " (seen_acc " << *report.seen_acc
        << ", unseen_acc " << *report.unseen_acc << ")\n";
  } else {
    log << "per_class_acc " << report.per_class_acc << "\n";
  }
  if (report.top_k_acc) log << "top_" << *report.top_k << "_acc " << *report.top_k_acc << "\n";
}

EvalReport finish_eval(const RunConfig& config, const ProtocolResult& result, std::ostream& log) {
  if (!config.report.empty()) write_text(config.report, result.report.to_json());
  if (!config.quiet) print_headline(result.report, log);
  return result.report;
}

ProtocolResult run_protocol(const RunConfig& config, const ZslDataset& data,
                            const CvaeModel* pretrained, std::ostream& log) {
  const ProtocolOptions opts = protocol_options(config, log);
  if (config.protocol == "generalized") return run_generalized_zsl(data, opts, pretrained);
  return run_disjoint_zsl(data, opts, pretrained);
}

}  // namespace

void RunConfig::validate() const {
  if (protocol != "disjoint" && protocol != "generalized") {
    throw ConfigError("protocol must be 'disjoint' or 'generalized', got '" + protocol + "'");
  }
  if (n_pseudo == 0) throw ConfigError("n-pseudo must be >= 1");
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) {
    throw ConfigError("holdout-frac must lie in (0, 1)");
  }
  if (top_k && *top_k == 0) throw ConfigError("top-k must be >= 1");
  const bool any_path = !data.features.empty() || !data.labels.empty() ||
                        !data.attributes.empty() || !data.split.empty();
  const bool all_paths = !data.features.empty() && !data.labels.empty() &&
                         !data.attributes.empty() && !data.split.empty();
  if (any_path && !all_paths) {
    throw ConfigError("--features, --labels, --attributes and --split must be given together");
  }
  if (!any_path) synth.validate();
  svm.validate();
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kShape:
    case ErrorKind::kInput:
    case ErrorKind::kState:
    case ErrorKind::kFormat:
    case ErrorKind::kData: return 3;
    case ErrorKind::kDiverged: return 4;
    case ErrorKind::kIo: return 5;
  }
  return kExitUnexpected;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::uint64_t offset = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line without '=' in '" + path.string() + "'", line_offset);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError("config line with empty key", line_offset);
    out[std::move(key)] = std::move(value);
  }
  return out;
}

ZslDataset load_or_synthesize(const RunConfig& config) {
  if (config.uses_files()) return load_dataset(config.data);
  SynthData synth = synth_generate(seeded_synth(config));
  ZslDataset all = concat_rows(synth.train, synth.test);
  all.validate();
  return all;
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
  std::string text = "epoch,total,reconstr,kl,seconds\n";
  std::array<char, 32> buf{};
  auto num = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
  };
  for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
    const auto& e = trace.epochs[i];
    text += std::to_string(i + 1) + "," + num(e.total) + "," + num(e.reconstruction) + "," +
            num(e.kl) + "," + num(e.seconds) + "\n";
  }
  write_text(path, text);
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  const SynthSpec spec = seeded_synth(config);
  SynthData synth = synth_generate(spec);
  if (config.out_dir.empty()) throw ConfigError("synth needs --out-dir");
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create '" + config.out_dir.string() + "': " + ec.message());

  const ZslDataset all = concat_rows(synth.train, synth.test);
  const bool binary = config.features_format == MatrixFormat::kBinary;
  const auto dir = config.out_dir;
  save_matrix(dir / (binary ? "features.zslm" : "features.csv"), all.features,
              config.features_format);
  save_labels(dir / "labels.txt", all.labels);
  save_matrix(dir / "attributes.csv", all.attributes, MatrixFormat::kCsv);
  save_split(dir / "split.txt", ClassSplit{all.seen_classes, all.unseen_classes});
  save_matrix(dir / "centroids.csv", synth.centroids, MatrixFormat::kCsv);
  if (!config.quiet) {
    for (const auto& w : spec.warnings()) log << "warning: " << w << "\n";
    log << "wrote " << all.size() << " rows (" << synth.train.size() << " seen, "
        << synth.test.size() << " unseen) to " << dir.string() << "\n";
  }
}

TrainTrace cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.checkpoint.empty()) throw ConfigError("train needs --checkpoint");
  ZslDataset data = load_or_synthesize(config);

  const auto rows = cvae_training_rows(data, config.protocol, config.holdout_frac, config.seed);
  if (config.standardize) {
    const Standardizer s = Standardizer::fit(gather_rows(data.features, rows));
    data.features = s.apply(data.features);
  }
  CvaeConfig cfg = config.cvae;
  cfg.seed = config.seed;
  cfg.feature_dim = data.feature_dim();
  cfg.attr_dim = data.attr_dim();
  if (!config.quiet) {
    for (const auto& w : cfg.warnings()) log << "warning: " << w << "\n";
  }
  const ProtocolOptions opts = protocol_options(config, log);
  TrainResult trained = train_cvae(data.subset(rows), cfg, opts.on_epoch);

  save_checkpoint(trained.model, config.checkpoint);
  const auto trace_path =
      config.trace.empty() ? std::filesystem::path(config.checkpoint.string() + ".trace.csv")
                           : config.trace;
  write_trace_csv(trace_path, trained.trace);
  if (!config.quiet) {
    log << "saved checkpoint " << config.checkpoint.string() << " and trace "
        << trace_path.string() << "\n";
  }
  return trained.trace;
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const ZslDataset data = load_or_synthesize(config);
  if (config.checkpoint.empty()) {
    return finish_eval(config, run_protocol(config, data, nullptr, log), log);
  }
  const CvaeModel model = load_cvae_checkpoint(config.checkpoint);
  return finish_eval(config, run_protocol(config, data, &model, log), log);
}

EvalReport cmd_pipeline(const RunConfig& config, std::ostream& log) {
  config.validate();
  const ZslDataset data = load_or_synthesize(config);
  const ProtocolResult result = run_protocol(config, data, nullptr, log);
  if (!config.checkpoint.empty()) save_checkpoint(result.model, config.checkpoint);
  if (!config.trace.empty()) write_trace_csv(config.trace, result.trace);
  return finish_eval(config, result, log);
}

}  // namespace zsl
