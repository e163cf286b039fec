// zsl: command-line driver for the CVAE zero-shot pipeline.
//
//   zsl synth    --out-dir DIR [synthetic flags]
//   zsl train    --checkpoint FILE [data or synthetic flags] [model flags]
//   zsl eval     --report FILE [--checkpoint FILE] [--protocol disjoint|generalized]
//   zsl pipeline --report FILE [all of the above]
//
// Every subcommand also accepts --config FILE with `key = value` lines whose
// keys are flag names; flags given on the command line win.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "zsl/commands.hpp"
#include "zsl/error.hpp"

namespace {

struct Flags {
  zsl::RunConfig run;
  std::string features_format = "binary";
  std::string config_file;
  std::size_t top_k = 0;
};

void add_seed_and_output(CLI::App& cmd, Flags& f) {
  cmd.add_option("--seed", f.run.seed, "Master seed for every random draw")->capture_default_str();
  cmd.add_flag("--quiet", f.run.quiet, "Suppress progress output");
  cmd.add_option("--config", f.config_file, "key = value config file");
}

void add_synth_flags(CLI::App& cmd, Flags& f) {
  auto& s = f.run.synth;
  cmd.add_option("--num-seen", s.num_seen, "Synthetic seen classes")->capture_default_str();
  cmd.add_option("--num-unseen", s.num_unseen, "Synthetic unseen classes")->capture_default_str();
  cmd.add_option("--attr-dim", s.attr_dim, "Synthetic attribute dimension")->capture_default_str();
  cmd.add_option("--feature-dim", s.feature_dim, "Synthetic feature dimension")
      ->capture_default_str();
  cmd.add_option("--samples-per-class", s.samples_per_class, "Synthetic rows per class")
      ->capture_default_str();
  cmd.add_option("--noise-sigma", s.noise_sigma, "Synthetic feature noise")->capture_default_str();
}

void add_data_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--features", f.run.data.features, "Feature matrix (ZSLM binary or CSV)");
  cmd.add_option("--labels", f.run.data.labels, "Labels file, one class id per line");
  cmd.add_option("--attributes", f.run.data.attributes, "Class attribute matrix");
  cmd.add_option("--split", f.run.data.split, "Split file with 'seen' and 'unseen' lines");
  cmd.add_flag("--standardize", f.run.standardize,
               "z-score features using CVAE training-row statistics");
  add_synth_flags(cmd, f);
}

void add_model_flags(CLI::App& cmd, Flags& f) {
  auto& c = f.run.cvae;
  cmd.add_option("--latent-dim", c.latent_dim)->capture_default_str();
  cmd.add_option("--enc-hidden1", c.enc_hidden1)->capture_default_str();
  cmd.add_option("--enc-hidden2", c.enc_hidden2)->capture_default_str();
  cmd.add_option("--dec-hidden", c.dec_hidden)->capture_default_str();
  cmd.add_option("--dropout-rate", c.dropout_rate)->capture_default_str();
  cmd.add_option("--batch-size", c.batch_size)->capture_default_str();
  cmd.add_option("--epochs", c.epochs)->capture_default_str();
  cmd.add_option("--lr", c.lr)->capture_default_str();
  cmd.add_option("--protocol", f.run.protocol, "disjoint or generalized")
      ->check(CLI::IsMember({"disjoint", "generalized"}))
      ->capture_default_str();
  cmd.add_option("--holdout-frac", f.run.holdout_frac, "Seen-class holdout (generalized)")
      ->capture_default_str();
}

void add_eval_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--n-pseudo", f.run.n_pseudo, "Pseudo samples per class")->capture_default_str();
  cmd.add_option("--svm-cost", f.run.svm.cost, "SVM cost C")->capture_default_str();
  cmd.add_option("--svm-max-epochs", f.run.svm.max_epochs)->capture_default_str();
  cmd.add_option("--svm-tol", f.run.svm.tol)->capture_default_str();
  cmd.add_option("--top-k", f.top_k, "Also report top-k accuracy");
  cmd.add_option("--report", f.run.report, "Write the JSON report here");
}

// Expands `--config FILE` into flags placed before the real arguments, so
// explicit flags (parsed later, last value wins) override file values.
std::vector<std::string> expand_config(CLI::App& cmd, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::vector<std::string> out;
  for (const auto& [raw_key, value] : zsl::parse_config_file(path)) {
    std::string key = raw_key;
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    const std::string flag = "--" + key;
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    if (opt == nullptr || key == "config") {
      throw zsl::ConfigError("unknown config key '" + key + "' for '" + cmd.get_name() + "'");
    }
    out.push_back(flag + "=" + value);
  }
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Flags f;
  CLI::App app{"CVAE zero-shot classification"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* synth = app.add_subcommand("synth", "Write the synthetic benchmark to disk");
  synth->add_option("--out-dir", f.run.out_dir, "Output directory")->required();
  synth->add_option("--features-format", f.features_format, "binary or csv")
      ->check(CLI::IsMember({"binary", "csv"}))
      ->capture_default_str();
  add_synth_flags(*synth, f);
  add_seed_and_output(*synth, f);

  auto* train = app.add_subcommand("train", "Train the CVAE and save a checkpoint");
  add_data_flags(*train, f);
  add_model_flags(*train, f);
  train->add_option("--checkpoint", f.run.checkpoint, "Checkpoint output path")->required();
  train->add_option("--trace", f.run.trace, "Trace CSV (default: <checkpoint>.trace.csv)");
  add_seed_and_output(*train, f);

  auto* eval = app.add_subcommand("eval", "Evaluate a protocol, optionally from a checkpoint");
  add_data_flags(*eval, f);
  add_model_flags(*eval, f);
  add_eval_flags(*eval, f);
  eval->add_option("--checkpoint", f.run.checkpoint, "Trained CVAE checkpoint");
  add_seed_and_output(*eval, f);

  auto* pipeline = app.add_subcommand("pipeline", "Train, generate, fit and evaluate");
  add_data_flags(*pipeline, f);
  add_model_flags(*pipeline, f);
  add_eval_flags(*pipeline, f);
  pipeline->add_option("--checkpoint", f.run.checkpoint, "Also save the trained CVAE here");
  pipeline->add_option("--trace", f.run.trace, "Also write the training trace here");
  add_seed_and_output(*pipeline, f);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) {
      for (auto* sub : app.get_subcommands({})) {
        if (sub->get_name() == args.front()) {
          std::vector<std::string> rest(args.begin() + 1, args.end());
          rest = expand_config(*sub, rest);
          rest.insert(rest.begin(), args.front());
          args = std::move(rest);
          break;
        }
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : zsl::exit_code_for(zsl::ErrorKind::kConfig);
  } catch (const zsl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zsl::exit_code_for(e.kind());
  }

  f.run.features_format =
      f.features_format == "csv" ? zsl::MatrixFormat::kCsv : zsl::MatrixFormat::kBinary;
  if (f.top_k > 0) f.run.top_k = f.top_k;

  try {
    if (synth->parsed()) {
      zsl::cmd_synth(f.run, std::cerr);
    } else if (train->parsed()) {
      zsl::cmd_train(f.run, std::cerr);
    } else if (eval->parsed()) {
      zsl::cmd_eval(f.run, std::cout);
    } else {
      zsl::cmd_pipeline(f.run, std::cout);
    }
  } catch (const zsl::Error& e) {
    std::cerr << "error [" << zsl::to_string(e.kind()) << "]: " << e.what() << "\n";
    return zsl::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zsl::kExitUnexpected;
  }
  return zsl::kExitOk;
}
