#include "cli.h"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slr/run/config.h"
#include "slr/run/runner.h"
#include "slr/tensor/matrix.h"

namespace slr {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> out;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "TOML run config (defaults when omitted)");
  cmd->add_option("--set", f.sets, "override, section.key=value (repeatable)");
}

// file, then --set, then the dedicated flags
RunConfig ResolveConfig(const CommonFlags& f) {
  Json tree = Json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError({"cannot read config file " + f.config});
    std::stringstream text;
    text << in.rdbuf();
    try {
      tree = ParseToml(text.str());
    } catch (const TomlError& e) {
      throw ConfigError({f.config + ": " + e.what()});
    }
  }
  for (const std::string& s : f.sets) ApplyOverride(tree, s);
  if (f.seed) ApplyOverride(tree, "run.seed=" + std::to_string(*f.seed));
  if (f.variant) ApplyOverride(tree, "run.variant=\"" + *f.variant + "\"");
  if (f.out) tree["run"]["output_dir"] = *f.out;
  return ConfigFromToml(tree);
}

int Train(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig config = ResolveConfig(f);
  const TrainResult r = TrainRun(config, {}, &out);
  if (r.status != ExitCode::kOk) {
    err << "train failed: " << r.error << "\n";
    if (!r.last_checkpoint.empty()) {
      err << "last good checkpoint: " << r.last_checkpoint.string() << "\n";
    }
  } else {
    out << "run written to " << r.paths.root.string() << "\n";
  }
  return static_cast<int>(r.status);
}

int Eval(const CommonFlags& f, const std::string& checkpoint, std::ostream& out) {
  const RunConfig config = ResolveConfig(f);
  const Agent<float> agent = LoadAgentFor(checkpoint, config);
  const std::string json = EvalReportJson(EvalRun(agent, config)).dump(2) + "\n";
  out << json;
  if (f.out) {
    std::ofstream file(*f.out);
    if (!file) throw std::runtime_error("cannot write " + *f.out);
    file << json;
  }
  return 0;
}

int Ablate(const CommonFlags& f, const std::vector<std::string>& variants,
           const std::vector<std::uint64_t>& seeds, std::ostream& out) {
  CommonFlags g = f;
  if (!variants.empty()) {
    std::string list;
    for (const std::string& v : variants) list += (list.empty() ? "\"" : ", \"") + v + "\"";
    g.sets.push_back("ablate.variants=[" + list + "]");
  }
  if (!seeds.empty()) {
    std::string list;
    for (std::uint64_t s : seeds) list += (list.empty() ? "" : ", ") + std::to_string(s);
    g.sets.push_back("ablate.seeds=[" + list + "]");
  }
  const RunConfig config = ResolveConfig(g);
  const AblationResult r = AblateRun(config, {}, &out);
  std::ifstream summary(r.summary);
  out << summary.rdbuf();
  int failed = 0;
  for (const AblationRow& row : r.rows) failed += row.failed;
  return failed == 0 ? 0 : 1;
}

int Analyze(const CommonFlags& f, const std::string& checkpoint, std::ostream& out) {
  const RunConfig config = ResolveConfig(f);
  const Agent<float> agent = LoadAgentFor(checkpoint, config);
  const fs::path dir = f.out ? fs::path(*f.out)
                             : fs::path(checkpoint).parent_path().parent_path() / "traces";
  const AnalyzeResult r = AnalyzeRun(agent, config, dir);
  out << SummaryJson(r.summary).dump(2) << "\n";
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"self-learned latent locomotion: train, eval, ablate, analyze"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, ablate_flags, analyze_flags;
  std::string eval_ckpt, analyze_ckpt;
  std::vector<std::string> ablate_variants;
  std::vector<std::uint64_t> ablate_seeds;

  CLI::App* train = app.add_subcommand("train", "run the training loop");
  AddCommon(train, train_flags);
  train->add_option("--seed", train_flags.seed, "run.seed");
  train->add_option("--variant", train_flags.variant, "run.variant");
  train->add_option("--out", train_flags.out, "run.output_dir");

  CLI::App* eval = app.add_subcommand("eval", "velocity tracking over a command grid");
  AddCommon(eval, eval_flags);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint manifest (.json)")->required();
  eval->add_option("--seed", eval_flags.seed, "run.seed");
  eval->add_option("--out", eval_flags.out, "also write the JSON here");

  CLI::App* ablate = app.add_subcommand("ablate", "train variants x seeds");
  AddCommon(ablate, ablate_flags);
  ablate->add_option("--variant", ablate_variants, "variant to include (repeatable)");
  ablate->add_option("--seed", ablate_seeds, "seed to include (repeatable)");
  ablate->add_option("--out", ablate_flags.out, "run.output_dir");

  CLI::App* analyze = app.add_subcommand("analyze", "latent trace and separability");
  AddCommon(analyze, analyze_flags);
  analyze->add_option("--checkpoint", analyze_ckpt, "checkpoint manifest (.json)")
      ->required();
  analyze->add_option("--seed", analyze_flags.seed, "run.seed");
  analyze->add_option("--out", analyze_flags.out,
                      "trace directory (default: the run's traces/)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 routes --help to the first stream and errors to the second
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
  }

  try {
    if (*train) return Train(train_flags, out, err);
    if (*eval) return Eval(eval_flags, eval_ckpt, out);
    if (*ablate) return Ablate(ablate_flags, ablate_variants, ablate_seeds, out);
    if (*analyze) return Analyze(analyze_flags, analyze_ckpt, out);
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const std::string& issue : e.issues()) err << "  " << issue << "\n";
    return static_cast<int>(ExitCode::kConfigError);
  } catch (const NumericError& e) {
    err << "numeric abort: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kNumericAbort);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kFailure);
  }
  return static_cast<int>(ExitCode::kFailure);
}

}  // namespace slr
