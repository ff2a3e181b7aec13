#include "slr/ppo/buffer.h"

#include <stdexcept>
#include <string>

#include "slr/model/losses.h"
#include "slr/ppo/gae.h"

namespace slr {

namespace {

void CheckRows(const MatF& m, int rows, int cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string("buffer: ") + what + " must be " +
                         ShapeString(rows, cols) + ", got " +
                         ShapeString(m.rows(), m.cols()));
  }
}

}  // namespace

RolloutBuffer::RolloutBuffer(int num_envs, int horizon, int obs_dim,
                             int history_dim, int privileged_dim,
                             int action_dim)
    : num_envs_(num_envs), horizon_(horizon) {
  if (num_envs < 1 || horizon < 1) {
    throw std::invalid_argument("buffer: num_envs and horizon must be positive");
  }
  const int n = num_envs * horizon;
  obs_.resize(n, obs_dim);
  history_.resize(n, history_dim);
  privileged_.resize(n, privileged_dim);
  actions_.resize(n, action_dim);
  means_.resize(n, action_dim);
  log_probs_.resize(n, 1);
  values_.resize(n, 1);
  next_history_.resize(num_envs, history_dim);
  bootstrap_values_.resize(num_envs, 1);
  rewards_.resize(n);
  dones_.resize(n);
}

void RolloutBuffer::Add(const MatF& obs, const MatF& history,
                        const MatF& privileged, const MatF& actions,
                        const MatF& means, const MatF& log_probs,
                        const MatF& values, const std::vector<double>& rewards,
                        const std::vector<std::uint8_t>& dones) {
  if (steps_ >= horizon_) throw std::logic_error("buffer: already full");
  CheckRows(obs, num_envs_, obs_.cols(), "obs");
  CheckRows(history, num_envs_, history_.cols(), "history");
  CheckRows(privileged, num_envs_, privileged_.cols(), "privileged");
  CheckRows(actions, num_envs_, actions_.cols(), "actions");
  CheckRows(means, num_envs_, means_.cols(), "means");
  CheckRows(log_probs, num_envs_, 1, "log_probs");
  CheckRows(values, num_envs_, 1, "values");
  if (static_cast<int>(rewards.size()) != num_envs_ ||
      static_cast<int>(dones.size()) != num_envs_) {
    throw DimensionError("buffer: rewards/dones need one entry per env");
  }
  const int base = steps_ * num_envs_;
  obs_.middleRows(base, num_envs_) = obs;
  history_.middleRows(base, num_envs_) = history;
  privileged_.middleRows(base, num_envs_) = privileged;
  actions_.middleRows(base, num_envs_) = actions;
  means_.middleRows(base, num_envs_) = means;
  log_probs_.middleRows(base, num_envs_) = log_probs;
  values_.middleRows(base, num_envs_) = values;
  for (int e = 0; e < num_envs_; ++e) {
    rewards_[base + e] = rewards[e];
    dones_[base + e] = dones[e];
  }
  ++steps_;
}

void RolloutBuffer::Finish(const MatF& next_history,
                           const MatF& bootstrap_values) {
  if (steps_ != horizon_) {
    throw std::logic_error("buffer: finish called after " +
                           std::to_string(steps_) + " of " +
                           std::to_string(horizon_) + " steps");
  }
  CheckRows(next_history, num_envs_, next_history_.cols(), "next_history");
  CheckRows(bootstrap_values, num_envs_, 1, "bootstrap_values");
  next_history_ = next_history;
  bootstrap_values_ = bootstrap_values;
  finished_ = true;
}

void RolloutBuffer::ComputeAdvantages(double gamma, double lambda) {
  if (!full()) throw std::logic_error("buffer: advantages need a full buffer");
  advantages_.assign(rows(), 0.0);
  returns_.assign(rows(), 0.0);
  std::vector<double> r(horizon_), v(horizon_);
  std::vector<std::uint8_t> d(horizon_);
  for (int e = 0; e < num_envs_; ++e) {
    for (int t = 0; t < horizon_; ++t) {
      const int row = t * num_envs_ + e;
      r[t] = rewards_[row];
      v[t] = values_(row, 0);
      d[t] = dones_[row];
    }
    const GaeResult g =
        ComputeGae(r, v, d, bootstrap_values_(e, 0), gamma, lambda);
    for (int t = 0; t < horizon_; ++t) {
      advantages_[t * num_envs_ + e] = g.advantages[t];
      returns_[t * num_envs_ + e] = g.returns[t];
    }
  }
  NormalizeAdvantages(advantages_);
}

Eigen::Ref<const MatF> RolloutBuffer::NextHistory(int row) const {
  const int t = row / num_envs_;
  const int e = row % num_envs_;
  if (t + 1 < horizon_) return history_.middleRows(row + num_envs_, 1);
  return next_history_.middleRows(e, 1);
}

int RolloutBuffer::SampleNegativeRow(int env, int t, std::mt19937_64& rng) const {
  std::optional<std::size_t> excluded;
  if (t + 1 < horizon_) excluded = static_cast<std::size_t>((t + 1) * num_envs_ + env);
  return static_cast<int>(SampleNegativeSlot(rows(), excluded, rng));
}

void RolloutBuffer::Clear() {
  steps_ = 0;
  finished_ = false;
  advantages_.clear();
  returns_.clear();
  ++generation_;
}

}  // namespace slr
