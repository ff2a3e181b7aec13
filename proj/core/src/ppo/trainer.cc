#include "slr/ppo/trainer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slr/env/params.h"

namespace slr {

namespace {

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

const TrainerConfig& Validated(const TrainerConfig& c) {
  c.Validate();
  return c;
}

Agent<float> InitialAgent(const TrainerConfig& c) {
  std::mt19937_64 rng(DeriveSeed(c.seed, 1));
  return BuildVariant(c.variant, c.dims, c.net, rng);
}

void CheckHidden(const std::vector<int>& sizes, const char* name) {
  for (int s : sizes) {
    if (s < 1) {
      throw std::invalid_argument(std::string("networks.") + name +
                                  " sizes must be positive");
    }
  }
}

}  // namespace

void TrainerConfig::Validate() const {
  if (num_envs < 1) throw std::invalid_argument("env.num_envs must be >= 1");
  if (horizon < 1) throw std::invalid_argument("env.horizon must be >= 1");
  if (iterations < 1) throw std::invalid_argument("run.iterations must be >= 1");
  if (max_terrain_level < 0) {
    throw std::invalid_argument("env.max_terrain_level must be >= 0");
  }
  if (!(env.dt > 0.0)) throw std::invalid_argument("env.dt must be positive");
  if (env.substeps < 1) throw std::invalid_argument("env.substeps must be >= 1");
  if (env.episode_length < 1) {
    throw std::invalid_argument("env.episode_length must be >= 1");
  }
  if (env.command_vx.lo > env.command_vx.hi) {
    throw std::invalid_argument("env.command_vx has lo > hi");
  }
  if (env.command_yaw.lo > env.command_yaw.hi) {
    throw std::invalid_argument("env.command_yaw has lo > hi");
  }
  env.randomization.Validate();
  if (dims.history_len < 1) throw std::invalid_argument("slr.history_len must be >= 1");
  if (dims.latent_dim < 1) throw std::invalid_argument("slr.latent_dim must be >= 1");
  if (dims.teacher_latent_dim < 1) {
    throw std::invalid_argument("networks.teacher_latent_dim must be >= 1");
  }
  CheckHidden(net.encoder_hidden, "encoder_hidden");
  CheckHidden(net.actor_hidden, "actor_hidden");
  CheckHidden(net.critic_hidden, "critic_hidden");
  CheckHidden(net.transition_hidden, "transition_hidden");
  CheckHidden(net.teacher_hidden, "teacher_hidden");
  ppo.Validate();
  if (num_envs * horizon < ppo.minibatches) {
    throw std::invalid_argument("ppo.minibatches exceeds num_envs x horizon");
  }
}

Trainer::Trainer(const TrainerConfig& config)
    : config_(Validated(config)),
      agent_(InitialAgent(config)),
      envs_(config.num_envs, config.env, DeriveSeed(config.seed, 2)),
      history_(config.num_envs, config.dims.history_len, config.dims.obs_dim),
      buffer_(config.num_envs, config.horizon, config.dims.obs_dim,
              config.dims.history_dim(), config.dims.privileged_dim,
              config.dims.action_dim),
      action_rng_(DeriveSeed(config.seed, 3)),
      episode_steps_(config.num_envs, 0) {
  updater_ = std::make_unique<PpoUpdater>(agent_, config_.ppo,
                                          DeriveSeed(config.seed, 4));
  if (config_.curriculum) {
    envs_.SetTerrainScale(
        CurriculumTerrainScale(config_.env.randomization.terrain_scale, 0));
  }
  obs_ = envs_.ResetAll();
  history_.PushAll(obs_);
}

void Trainer::Rollout(IterationMetrics& m) {
  const int n = config_.num_envs;
  const int act = config_.dims.action_dim;
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const MatF std_row = agent_.log_std.array().exp().matrix();
  MatF privileged = envs_.PrivilegedMatrix();
  double reward_sum = 0.0;
  double finished_len = 0.0;
  int finished = 0;

  for (int t = 0; t < config_.horizon; ++t) {
    const MatF history = history_.flat();
    const PolicyOutput<float> out = Evaluate(agent_, obs_, history, privileged);
    MatF actions(n, act);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < act; ++j) {
        actions(i, j) = out.mean(i, j) + std_row(0, j) * normal(action_rng_);
      }
    }
    const MatF log_probs = GaussianLogProb(out.mean, agent_.log_std, actions);
    VecEnv::Batch step = envs_.Step(actions);
    // a time limit is not a failure: bootstrap it with v(s_t)
    std::vector<double> rewards = step.rewards;
    for (int i = 0; i < n; ++i) {
      if (step.timeouts[i]) rewards[i] += config_.ppo.gamma * out.value(i, 0);
    }
    buffer_.Add(obs_, history, privileged, actions, out.mean, log_probs,
                out.value, rewards, step.dones);

    for (int i = 0; i < n; ++i) {
      reward_sum += step.rewards[i];
      for (std::size_t k = 0; k < kNumRewardTerms; ++k) {
        m.term_means[k] += step.breakdowns[i].terms[k];
      }
      ++episode_steps_[i];
      if (step.dones[i]) {
        finished_len += episode_steps_[i];
        ++finished;
        episode_steps_[i] = 0;
        history_.Clear(i);
      }
    }
    obs_ = std::move(step.observations);
    privileged = std::move(step.privileged);
    history_.PushAll(obs_);
  }

  const PolicyOutput<float> last =
      Evaluate(agent_, obs_, history_.flat(), privileged);
  buffer_.Finish(history_.flat(), last.value);

  const double count = static_cast<double>(buffer_.rows());
  m.mean_reward = reward_sum / count;
  for (double& v : m.term_means) v /= count;
  if (finished > 0) last_ep_len_ = finished_len / finished;
  m.mean_ep_len = last_ep_len_;
}

IterationMetrics Trainer::Iterate() {
  IterationMetrics m;
  m.iter = iteration_;
  Rollout(m);
  const UpdateMetrics u = updater_->Update(buffer_);
  m.surrogate = u.surrogate;
  m.value_loss = u.value_loss;
  m.triplet_loss = u.triplet_loss;
  m.kl = u.kl;
  m.lr = u.lr;
  m.entropy = u.entropy;
  m.estimator_loss = u.estimator_loss;
  m.grad_norm = u.grad_norm;
  m.terrain_level = terrain_level_;

  if (config_.curriculum) {
    const double tracking = m.term_means[static_cast<std::size_t>(
        RewardTerm::kLinearVelocityTracking)];
    terrain_level_ = std::min(UpdateTerrainLevel(tracking, terrain_level_),
                              config_.max_terrain_level);
    envs_.SetTerrainScale(CurriculumTerrainScale(
        config_.env.randomization.terrain_scale, terrain_level_));
  }
  ++iteration_;
  return m;
}

}  // namespace slr
