#ifndef SLR_PPO_BUFFER_H_
#define SLR_PPO_BUFFER_H_

#include <cstdint>
#include <random>
#include <vector>

#include "slr/tensor/matrix.h"

namespace slr {

// One iteration of on-policy experience, num_envs x horizon transitions.
// Row index of (env, t) is t * num_envs + env. Filled once by the rollout,
// consumed by one update, then cleared.
class RolloutBuffer {
 public:
  RolloutBuffer(int num_envs, int horizon, int obs_dim, int history_dim,
                int privileged_dim, int action_dim);

  // one step for every env; every matrix has num_envs rows
  void Add(const MatF& obs, const MatF& history, const MatF& privileged,
           const MatF& actions, const MatF& means, const MatF& log_probs,
           const MatF& values, const std::vector<double>& rewards,
           const std::vector<std::uint8_t>& dones);
  // state after the last step: its history and the bootstrap value
  void Finish(const MatF& next_history, const MatF& bootstrap_values);

  // GAE per env, then advantages normalized over the whole buffer
  void ComputeAdvantages(double gamma, double lambda);

  // history o^H_{t+1} that follows row `row`
  Eigen::Ref<const MatF> NextHistory(int row) const;
  // uniform row other than the one holding (env, t+1)
  int SampleNegativeRow(int env, int t, std::mt19937_64& rng) const;

  void Clear();

  int num_envs() const { return num_envs_; }
  int horizon() const { return horizon_; }
  int rows() const { return num_envs_ * horizon_; }
  int steps() const { return steps_; }
  bool full() const { return steps_ == horizon_ && finished_; }
  // number of Clear() calls so far
  std::uint64_t generation() const { return generation_; }

  const MatF& obs() const { return obs_; }
  const MatF& history() const { return history_; }
  const MatF& privileged() const { return privileged_; }
  const MatF& actions() const { return actions_; }
  const MatF& means() const { return means_; }
  const MatF& log_probs() const { return log_probs_; }
  const MatF& values() const { return values_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<std::uint8_t>& dones() const { return dones_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }
  const MatF& bootstrap_values() const { return bootstrap_values_; }

 private:
  int num_envs_;
  int horizon_;
  int steps_ = 0;
  bool finished_ = false;
  std::uint64_t generation_ = 0;
  MatF obs_, history_, privileged_, actions_, means_, log_probs_, values_;
  MatF next_history_, bootstrap_values_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> dones_;
  std::vector<double> advantages_, returns_;
};

}  // namespace slr

#endif  // SLR_PPO_BUFFER_H_
