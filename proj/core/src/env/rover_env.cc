#include "slr/env/rover_env.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace slr {

namespace {

// impacts slower than this settle instead of bouncing
constexpr double kBounceThreshold = 0.1;
constexpr double kFallMargin = 0.05;
constexpr std::array<double, 4> kSampleOffsets = {-0.3, -0.1, 0.1, 0.3};

double WrapAngle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

bool Finite(const EnvState& s) {
  return std::isfinite(s.x) && std::isfinite(s.height) &&
         std::isfinite(s.vx) && std::isfinite(s.vz) &&
         std::isfinite(s.pitch) && std::isfinite(s.wheel_speed[0]) &&
         std::isfinite(s.wheel_speed[1]);
}

}  // namespace

RewardConfig EnvConfig::RoverRewardConfig() {
  RewardConfig cfg = RewardConfig::TableDefaults();
  cfg.weight(RewardTerm::kAngularVelocityXy) = 0.0;
  cfg.weight(RewardTerm::kBaseHeight) = 0.0;
  cfg.weight(RewardTerm::kFootClearance) = 0.0;
  return cfg;
}

Observation ObserveState(const EnvState& s) {
  Observation o{};
  o[0] = static_cast<float>(s.command[0]);
  o[1] = static_cast<float>(s.command[1]);
  o[2] = static_cast<float>(std::sin(s.pitch));
  o[3] = static_cast<float>(-std::cos(s.pitch));
  o[4] = static_cast<float>(0.25 * s.pitch_rate);
  o[5] = static_cast<float>(WrapAngle(s.wheel_angle[0]));
  o[6] = static_cast<float>(WrapAngle(s.wheel_angle[1]));
  o[7] = static_cast<float>(0.1 * s.wheel_speed[0]);
  o[8] = static_cast<float>(0.1 * s.wheel_speed[1]);
  o[9] = static_cast<float>(s.prev_action[0][0]);
  o[10] = static_cast<float>(s.prev_action[0][1]);
  return o;
}

Observation NoiseBounds(const EnvConfig& config) {
  const SensorNoise& n = config.sensor_noise;
  const double level = config.observation_noise;
  Observation b{};
  b[2] = b[3] = static_cast<float>(level * n.gravity);
  b[4] = static_cast<float>(level * 0.25 * n.pitch_rate);
  b[5] = b[6] = static_cast<float>(level * n.wheel_angle);
  b[7] = b[8] = static_cast<float>(level * 0.1 * n.wheel_speed);
  return b;
}

RoverEnv::RoverEnv(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.randomization.Validate();
  if (config_.dt <= 0.0 || config_.substeps < 1 || config_.episode_length < 1) {
    throw std::invalid_argument("env: dt, substeps and episode_length must be positive");
  }
  Reset();
}

double RoverEnv::mass() const {
  return config_.geometry.nominal_mass * params_.body_mass_scale +
         params_.payload_mass;
}

double RoverEnv::WheelX(int i, double x) const {
  const double half = 0.5 * config_.geometry.wheelbase;
  return i == 0 ? x + half : x - half;
}

double RoverEnv::SupportHeight(double x, double pitch) const {
  const RoverGeometry& g = config_.geometry;
  const double lift = 0.5 * g.wheelbase * std::sin(pitch);
  const double front = terrain_.SmoothHeight(WheelX(0, x), g.wheel_radius);
  const double rear = terrain_.SmoothHeight(WheelX(1, x), g.wheel_radius);
  return std::max(front + g.wheel_radius - lift, rear + g.wheel_radius + lift);
}

std::array<bool, 2> RoverEnv::Contacts(const EnvState& s) const {
  const RoverGeometry& g = config_.geometry;
  const double lift = 0.5 * g.wheelbase * std::sin(s.pitch);
  std::array<bool, 2> c{};
  for (int i = 0; i < 2; ++i) {
    const double center = s.height + (i == 0 ? lift : -lift);
    const double ground = terrain_.SmoothHeight(WheelX(i, s.x), g.wheel_radius);
    c[i] = center - g.wheel_radius - ground < g.contact_band;
  }
  return c;
}

Observation RoverEnv::Reset() {
  params_ = fixed_params_ ? *fixed_params_
                          : SampleEnvParams(rng_, config_.randomization);
  terrain_ = fixed_terrain_ ? *fixed_terrain_
                            : Terrain(params_.terrain_mode, params_.terrain_scale,
                                      config_.step_shape);
  state_ = EnvState{};
  for (int i = 0; i < 2; ++i) {
    state_.wheel_angle[i] =
        config_.geometry.nominal_joint_angle *
        SampleRange(rng_, config_.randomization.initial_joint_scale);
  }
  if (fixed_command_) {
    state_.command = *fixed_command_;
  } else {
    state_.command = {SampleRange(rng_, config_.command_vx),
                      SampleRange(rng_, config_.command_yaw)};
  }
  const RoverGeometry& g = config_.geometry;
  const double front = terrain_.SmoothHeight(WheelX(0, 0.0), g.wheel_radius);
  const double rear = terrain_.SmoothHeight(WheelX(1, 0.0), g.wheel_radius);
  state_.pitch = std::atan((front - rear) / g.wheelbase);
  state_.height = SupportHeight(0.0, state_.pitch);
  state_.contact = Contacts(state_);
  delay_queue_.assign(params_.action_delay_steps, Action{});
  return Observe();
}

double RoverEnv::ExtendTerrain(TerrainMode mode, double scale) {
  const RoverGeometry& g = config_.geometry;
  const double ahead = WheelX(0, state_.x) + g.wheel_radius;
  const double start =
      std::max(ahead, terrain_.segments().back().x_start + 1e-3);
  terrain_.Append(mode, scale, start);
  return start;
}

Observation RoverEnv::Observe() {
  Observation o = ObserveState(state_);
  if (config_.observation_noise > 0.0) {
    const Observation bound = NoiseBounds(config_);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int k = 0; k < kObservationDim; ++k) {
      if (bound[k] > 0.0f) o[k] += static_cast<float>(bound[k] * unit(rng_));
    }
  }
  return o;
}

Privileged RoverEnv::PrivilegedInfo() const {
  Privileged e{};
  e[0] = static_cast<float>(params_.friction);
  e[1] = static_cast<float>(params_.restitution);
  const double base = state_.height - config_.geometry.wheel_radius;
  for (std::size_t k = 0; k < kSampleOffsets.size(); ++k) {
    e[2 + k] =
        static_cast<float>(terrain_.Height(state_.x + kSampleOffsets[k]) - base);
  }
  e[6] = state_.contact[0] ? 1.0f : 0.0f;
  e[7] = state_.contact[1] ? 1.0f : 0.0f;
  e[8] = static_cast<float>(params_.payload_mass);
  e[9] = static_cast<float>(params_.motor_strength_scale);
  return e;
}

StepResult RoverEnv::Step(const Action& action_in) {
  Action action{};
  for (int i = 0; i < kActionDim; ++i) {
    if (!std::isfinite(action_in[i])) {
      throw NumericError("env: non-finite action component " +
                         std::to_string(i));
    }
    action[i] = std::clamp(action_in[i], -config_.action_limit,
                           config_.action_limit);
  }
  Action applied = action;
  if (params_.action_delay_steps > 0) {
    delay_queue_.push_back(action);
    applied = delay_queue_.front();
    delay_queue_.pop_front();
  }

  const RoverGeometry& g = config_.geometry;
  const double m = mass();
  const double h = config_.dt / config_.substeps;
  const double fx = params_.external_force[0];
  const double fz = params_.external_force[1];
  const double g_eff = g.gravity - fz / m;
  const double pitch_start = state_.pitch;
  const auto speed_start = state_.wheel_speed;
  std::array<double, 2> torque_sum{};
  EnvState& s = state_;

  for (int k = 0; k < config_.substeps; ++k) {
    const auto contact = Contacts(s);
    const int n_contact = int(contact[0]) + int(contact[1]);
    const double normal_total =
        n_contact > 0 ? std::max(0.0, m * g.gravity - fz) : 0.0;
    double traction = 0.0;
    double grade = 0.0;
    std::array<double, 2> wheel_acc{};
    for (int i = 0; i < 2; ++i) {
      const double normal = contact[i] ? normal_total / n_contact : 0.0;
      const double slip = g.wheel_radius * s.wheel_speed[i] - s.vx;
      const double force =
          params_.friction * normal * std::tanh(slip / g.slip_scale);
      const double torque =
          params_.motor_strength_scale *
          (params_.kp_scale * g.kp * g.action_scale * applied[i] -
           params_.kd_scale * g.kd * s.wheel_speed[i]);
      torque_sum[i] += torque;
      traction += force;
      grade += normal * terrain_.SmoothSlope(WheelX(i, s.x), g.wheel_radius);
      wheel_acc[i] = (torque - g.wheel_radius * force) / g.wheel_inertia;
    }
    const double support_old = SupportHeight(s.x, s.pitch);
    // velocities from the old state, positions from the new velocities
    s.vx += h * (traction - g.drag * s.vx - grade + fx) / m;
    for (int i = 0; i < 2; ++i) {
      s.wheel_speed[i] += h * wheel_acc[i];
      s.wheel_angle[i] += h * s.wheel_speed[i];
    }
    s.x += h * s.vx;

    const double front = terrain_.SmoothHeight(WheelX(0, s.x), g.wheel_radius);
    const double rear = terrain_.SmoothHeight(WheelX(1, s.x), g.wheel_radius);
    const double pitch_target = std::atan((front - rear) / g.wheelbase);
    s.pitch += (h / g.pitch_lag) * (pitch_target - s.pitch);

    const double support = SupportHeight(s.x, s.pitch);
    const double support_rate = (support - support_old) / h;
    const double vz_free = s.vz - h * g_eff;
    const double z_free = s.height + h * vz_free;
    if (z_free <= support) {
      const double impact = support_rate - vz_free;
      s.height = support;
      s.vz = impact > kBounceThreshold
                 ? support_rate + params_.restitution * impact
                 : support_rate;
    } else {
      s.height = z_free;
      s.vz = vz_free;
    }
  }

  s.pitch_rate = (s.pitch - pitch_start) / config_.dt;
  s.contact = Contacts(s);
  s.step_index += 1;
  if (!Finite(s)) throw NumericError("env: state became non-finite");

  StepResult out;
  RewardInputs& in = out.reward_inputs;
  in.v_xy = {s.vx, 0.0};
  in.v_xy_cmd = {s.command[0], 0.0};
  in.v_z = s.vz;
  in.omega_yaw = s.pitch_rate;
  in.omega_yaw_cmd = s.command[1];
  in.omega_xy = {0.0, 0.0};
  in.torques = {torque_sum[0] / config_.substeps,
                torque_sum[1] / config_.substeps};
  in.joint_vel = {s.wheel_speed[0], s.wheel_speed[1]};
  in.joint_acc = {(s.wheel_speed[0] - speed_start[0]) / config_.dt,
                  (s.wheel_speed[1] - speed_start[1]) / config_.dt};
  in.base_height = s.height - terrain_.SmoothHeight(s.x, g.wheel_radius);
  in.action = {action[0], action[1]};
  in.prev_action = {s.prev_action[0][0], s.prev_action[0][1]};
  in.prev_prev_action = {s.prev_action[1][0], s.prev_action[1][1]};
  const double lift = 0.5 * g.wheelbase * std::sin(s.pitch);
  in.foot_height.resize(2);
  in.foot_speed_xy.resize(2);
  for (int i = 0; i < 2; ++i) {
    const double center = s.height + (i == 0 ? lift : -lift);
    in.foot_height[i] = center - g.wheel_radius -
                        terrain_.SmoothHeight(WheelX(i, s.x), g.wheel_radius);
    in.foot_speed_xy[i] = std::abs(g.wheel_radius * s.wheel_speed[i]);
  }
  in.gravity_xy = {std::sin(s.pitch), 0.0};
  out.reward = ComputeReward(in, config_.reward);

  s.prev_action[1] = s.prev_action[0];
  s.prev_action[0] = action;

  const bool tipped = std::abs(s.pitch) > std::numbers::pi / 3.0;
  const bool fell = s.height < SupportHeight(s.x, s.pitch) - kFallMargin;
  out.timeout = !tipped && !fell && s.step_index >= config_.episode_length;
  out.done = tipped || fell || out.timeout;
  out.observation = Observe();
  out.privileged = PrivilegedInfo();
  return out;
}

VecEnv::VecEnv(int num_envs, const EnvConfig& config, std::uint64_t base_seed) {
  if (num_envs < 1) throw std::invalid_argument("vec env: need at least one env");
  envs_.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) envs_.emplace_back(config, base_seed + i);
}

MatF VecEnv::ResetAll() {
  MatF obs(size(), kObservationDim);
  for (int i = 0; i < size(); ++i) {
    const Observation o = envs_[i].Reset();
    for (int j = 0; j < kObservationDim; ++j) obs(i, j) = o[j];
  }
  return obs;
}

MatF VecEnv::PrivilegedMatrix() const {
  MatF e(size(), kPrivilegedDim);
  for (int i = 0; i < size(); ++i) {
    const Privileged p = envs_[i].PrivilegedInfo();
    for (int j = 0; j < kPrivilegedDim; ++j) e(i, j) = p[j];
  }
  return e;
}

VecEnv::Batch VecEnv::Step(const MatF& actions) {
  if (actions.rows() != size() || actions.cols() != kActionDim) {
    throw DimensionError("vec env: actions must be " +
                         ShapeString(size(), kActionDim) + ", got " +
                         ShapeString(actions.rows(), actions.cols()));
  }
  Batch b;
  b.observations.resize(size(), kObservationDim);
  b.privileged.resize(size(), kPrivilegedDim);
  b.rewards.resize(size());
  b.dones.resize(size());
  b.timeouts.resize(size());
  b.breakdowns.resize(size());
  b.terrain_modes.resize(size());
  for (int i = 0; i < size(); ++i) {
    RoverEnv& env = envs_[i];
    StepResult r = env.Step({actions(i, 0), actions(i, 1)});
    b.rewards[i] = r.reward.total;
    b.dones[i] = r.done;
    b.timeouts[i] = r.timeout;
    b.breakdowns[i] = r.reward;
    b.terrain_modes[i] = env.terrain().ModeAt(env.state().x);
    Observation obs = r.observation;
    Privileged priv = r.privileged;
    if (r.done) {
      obs = env.Reset();
      priv = env.PrivilegedInfo();
    }
    for (int j = 0; j < kObservationDim; ++j) b.observations(i, j) = obs[j];
    for (int j = 0; j < kPrivilegedDim; ++j) b.privileged(i, j) = priv[j];
  }
  return b;
}

void VecEnv::SetTerrainScale(double scale) {
  for (RoverEnv& env : envs_) env.SetTerrainScale(scale);
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << "step,x,height,pitch,vx,cmd_vx,terrain_mode,terrain_level,done\n";
}

void TrajectoryWriter::Write(const RoverEnv& env, bool done, int terrain_level) {
  const EnvState& s = env.state();
  out_ << s.step_index << ',' << s.x << ',' << s.height << ',' << s.pitch << ','
       << s.vx << ',' << s.command[0] << ','
       << TerrainName(env.terrain().ModeAt(s.x)) << ',' << terrain_level << ','
       << (done ? 1 : 0) << '\n';
}

}  // namespace slr
