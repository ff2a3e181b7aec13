#ifndef SLR_RUN_CONFIG_H_
#define SLR_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slr/analysis/analysis.h"
#include "slr/ppo/trainer.h"
#include "slr/run/toml.h"

namespace slr {

// Every problem found in a config, one "section.key: message" per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct AblationConfig {
  std::vector<VariantKind> variants{VariantKind::kSlr,
                                    VariantKind::kSlrWithoutLatent};
  std::vector<std::uint64_t> seeds{0, 1, 2};

  bool operator==(const AblationConfig&) const = default;
};

// Everything a run reads. Sections of the file:
//   [run] [env] [env.randomization] [env.noise] [env.reward] [networks]
//   [ppo] [slr] [analysis] [eval] [ablate]
struct RunConfig {
  std::string name = "slr";
  std::string output_dir = "runs";
  int checkpoint_every = 100;
  // iterations averaged for the final reward of an ablation run
  int final_window = 50;
  int shuffles = 100;
  TrainerConfig trainer;
  CourseConfig course;
  EvalConfig eval;
  AblationConfig ablate;

  // throws ConfigError naming the first bad field
  void Validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Defaults overlaid with `tree`. Unknown keys and type mismatches are all
// collected before throwing ConfigError; then Validate() runs.
RunConfig ConfigFromToml(const Json& tree);
RunConfig LoadConfig(const std::filesystem::path& path);

// the fully resolved tree, defaults included
Json ConfigToToml(const RunConfig& config);
std::string ConfigText(const RunConfig& config);

// Applies one `section.key=value` override to a parsed tree. The value is
// read as TOML; text that does not parse as a TOML value is taken as a
// string, so `run.variant=baseline` works unquoted.
void ApplyOverride(Json& tree, std::string_view assignment);

// FNV-1a of the resolved config with run.name, run.output_dir, run.seed and
// run.variant blanked: equal for runs that differ only in those.
std::string SharedConfigHash(const RunConfig& config);

}  // namespace slr

#endif  // SLR_RUN_CONFIG_H_
