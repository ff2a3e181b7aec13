#ifndef SLR_RUN_RUNNER_H_
#define SLR_RUN_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slr/analysis/analysis.h"
#include "slr/ppo/trainer.h"
#include "slr/run/config.h"

namespace slr {

enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kNumericAbort = 3,
};

// runs/<name>-<seed>/{config.toml, manifest.json, metrics.csv, checkpoints/,
// traces/}
struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path config;
  std::filesystem::path manifest;
  std::filesystem::path metrics;
  std::filesystem::path checkpoints;
  std::filesystem::path traces;
};

RunPaths RunPathsFor(const std::filesystem::path& output_dir,
                     const std::string& name, std::uint64_t seed);

inline constexpr const char* kMetricsHeader =
    "iter,mean_reward,mean_ep_len,surrogate,value_loss,triplet_loss,kl,lr,"
    "terrain_level";
std::string MetricsRow(const IterationMetrics& m);

struct TrainHooks {
  // called after every completed iteration; an exception thrown here ends
  // the run as if the iteration had thrown it
  std::function<void(const RunConfig&, const IterationMetrics&)> after_iteration;
};

struct TrainResult {
  ExitCode status = ExitCode::kOk;
  RunPaths paths;
  std::vector<IterationMetrics> metrics;
  std::string error;
  // mean of mean_reward over the last final_window iterations
  double final_reward = 0.0;
  std::filesystem::path last_checkpoint;
};

// Writes the resolved config first, then one metrics row and the manifest per
// iteration, checkpoints every checkpoint_every iterations and at the end. A
// NumericError (or non-finite parameters) stops the run with kNumericAbort
// and saves the parameters from before the failing iteration as
// checkpoints/last_good.json.
TrainResult TrainRun(const RunConfig& config, const TrainHooks& hooks = {},
                     std::ostream* log = nullptr);

// throws ConfigError when the checkpoint's dims or variant differ from config
Agent<float> LoadAgentFor(const std::filesystem::path& checkpoint,
                          const RunConfig& config);

// deterministic episodes on the command grid; seeds from run.seed
EvalReport EvalRun(const Agent<float>& agent, const RunConfig& config);

struct AnalyzeResult {
  LatentTrace trace;
  AnalysisSummary summary;
};

// Records the course, scores it, and writes latents.csv and analysis.json
// into `traces_dir` (created if missing).
AnalyzeResult AnalyzeRun(const Agent<float>& agent, const RunConfig& config,
                         const std::filesystem::path& traces_dir);

struct AblationRun {
  VariantKind variant = VariantKind::kSlr;
  std::uint64_t seed = 0;
  ExitCode status = ExitCode::kOk;
  double final_reward = 0.0;
  std::string error;
  std::filesystem::path dir;
};

struct AblationRow {
  VariantKind variant = VariantKind::kSlr;
  int runs = 0;
  int failed = 0;
  // over the successful runs; std is the sample deviation, 0 for one run
  double mean = 0.0;
  double std = 0.0;
};

struct AblationResult {
  std::vector<AblationRun> runs;
  std::vector<AblationRow> rows;
  std::filesystem::path summary;
};

// Trains every variant x seed in sequence as <name>-<variant>-<seed>. A
// failed run is recorded and the rest continue. Summary CSV:
//   variant,runs,failed,mean_final_reward,std_final_reward,finals
// where finals lists per-seed values in seed order, `failed` for failures.
AblationResult AblateRun(const RunConfig& config, const TrainHooks& hooks = {},
                         std::ostream* log = nullptr);

}  // namespace slr

#endif  // SLR_RUN_RUNNER_H_
