#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "zsl/cvae.hpp"
#include "zsl/error.hpp"
#include "zsl/io.hpp"
#include "zsl/protocol.hpp"
#include "zsl/svm.hpp"
#include "zsl/synth.hpp"

namespace zsl {

/// Everything a command-line run can configure. Dataset paths left empty
/// mean "generate the synthetic benchmark in memory from `synth`".
struct RunConfig {
  DatasetPaths data;
  SynthSpec synth;
  CvaeConfig cvae;
  SvmConfig svm;

  std::filesystem::path out_dir;  // synth output directory
  MatrixFormat features_format = MatrixFormat::kBinary;
  std::filesystem::path checkpoint;
  std::filesystem::path trace;
  std::filesystem::path report;

  std::string protocol = "disjoint";
  std::size_t n_pseudo = 300;
  double holdout_frac = 0.2;
  std::optional<std::size_t> top_k;
  bool standardize = false;
  std::uint64_t seed = 1;
  bool quiet = false;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
  bool uses_files() const { return !data.features.empty(); }
};

/// Exit code for a failure category: 2 config, 3 input/data/format, 4
/// training divergence, 5 I/O.
int exit_code_for(ErrorKind kind);
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;

/// Reads `key = value` lines; '#' starts a comment. Keys are returned as given.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// Writes features (all rows), labels, attributes, split and the oracle
/// centroids into config.out_dir.
void cmd_synth(const RunConfig& config, std::ostream& log);

/// Trains the CVAE, writes the checkpoint and a per-epoch trace CSV
/// (epoch,total,reconstr,kl,seconds).
TrainTrace cmd_train(const RunConfig& config, std::ostream& log);

/// Runs the configured protocol, reusing config.checkpoint when it is set.
EvalReport cmd_eval(const RunConfig& config, std::ostream& log);

/// Synthesize-or-load, train, generate, fit and evaluate in one run.
EvalReport cmd_pipeline(const RunConfig& config, std::ostream& log);

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

/// Dataset for the run: loaded from files or synthesized (seen rows then unseen rows).
ZslDataset load_or_synthesize(const RunConfig& config);

}  // namespace zsl
