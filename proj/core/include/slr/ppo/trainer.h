#ifndef SLR_PPO_TRAINER_H_
#define SLR_PPO_TRAINER_H_

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "slr/env/rover_env.h"
#include "slr/model/agent.h"
#include "slr/model/history.h"
#include "slr/ppo/buffer.h"
#include "slr/ppo/config.h"
#include "slr/ppo/update.h"
#include "slr/reward/reward.h"
#include "slr/variants/variant.h"

namespace slr {

struct TrainerConfig {
  EnvConfig env;
  int num_envs = 256;
  int horizon = 24;
  int iterations = 1500;
  AgentDims dims;
  NetworkConfig net;
  PpoConfig ppo;
  VariantKind variant = VariantKind::kSlr;
  std::uint64_t seed = 0;
  bool curriculum = true;
  int max_terrain_level = 10;

  void Validate() const;

  bool operator==(const TrainerConfig&) const = default;
};

struct IterationMetrics {
  int iter = 0;
  double mean_reward = 0.0;  // per-step mean over the buffer
  double mean_ep_len = 0.0;  // episodes finished this iteration
  double surrogate = 0.0;
  double value_loss = 0.0;
  double triplet_loss = 0.0;
  double kl = 0.0;
  double lr = 0.0;
  int terrain_level = 0;
  double entropy = 0.0;
  double estimator_loss = 0.0;
  double grad_norm = 0.0;
  std::array<double, kNumRewardTerms> term_means{};
};

// The outer loop: collect num_envs x horizon transitions with the current
// policy, update, repeat. Environments keep running across iterations.
class Trainer {
 public:
  explicit Trainer(const TrainerConfig& config);

  // one rollout + one update
  IterationMetrics Iterate();

  Agent<float>& agent() { return agent_; }
  const Agent<float>& agent() const { return agent_; }
  const TrainerConfig& config() const { return config_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  PpoUpdater& updater() { return *updater_; }
  int iteration() const { return iteration_; }
  int terrain_level() const { return terrain_level_; }

 private:
  void Rollout(IterationMetrics& m);

  TrainerConfig config_;
  Agent<float> agent_;
  VecEnv envs_;
  HistoryBuffer history_;
  RolloutBuffer buffer_;
  std::unique_ptr<PpoUpdater> updater_;
  std::mt19937_64 action_rng_;
  MatF obs_;
  std::vector<int> episode_steps_;
  int iteration_ = 0;
  int terrain_level_ = 0;
  double last_ep_len_ = 0.0;
};

}  // namespace slr

#endif  // SLR_PPO_TRAINER_H_
