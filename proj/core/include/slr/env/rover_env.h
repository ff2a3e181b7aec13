#ifndef SLR_ENV_ROVER_ENV_H_
#define SLR_ENV_ROVER_ENV_H_

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "slr/env/params.h"
#include "slr/env/terrain.h"
#include "slr/reward/reward.h"
#include "slr/tensor/matrix.h"

namespace slr {

inline constexpr int kObservationDim = 11;
inline constexpr int kPrivilegedDim = 10;
inline constexpr int kActionDim = 2;

using Action = std::array<double, kActionDim>;
using Observation = std::array<float, kObservationDim>;
using Privileged = std::array<float, kPrivilegedDim>;

// Fixed geometry and gains of the rover.
struct RoverGeometry {
  double wheel_radius = 0.1;
  double wheelbase = 0.3;
  double wheel_inertia = 0.3;
  double nominal_mass = 25.0;
  double gravity = 9.81;
  double kp = 20.0;
  double kd = 0.5;
  // position-target offset per unit action (rad)
  double action_scale = 0.25;
  double drag = 5.0;
  double slip_scale = 0.5;
  double pitch_lag = 0.05;
  double contact_band = 0.01;
  double nominal_joint_angle = 1.0;

  bool operator==(const RoverGeometry&) const = default;
};

// Uniform sensor noise half-widths in physical units, before observation
// scaling. Commands and the previous action are exact.
struct SensorNoise {
  double gravity = 0.05;
  double pitch_rate = 0.2;    // rad/s
  double wheel_angle = 0.01;  // rad
  double wheel_speed = 1.5;   // rad/s

  bool operator==(const SensorNoise&) const = default;
};

struct EnvConfig {
  RandomizationConfig randomization;
  RoverGeometry geometry;
  StepShape step_shape{0.5, 0.5};
  double dt = 0.02;
  int substeps = 8;
  int episode_length = 200;
  double action_limit = 4.0;
  // multiplier on `sensor_noise`; 0 gives clean observations
  double observation_noise = 1.0;
  SensorNoise sensor_noise;
  Range command_vx{-1.0, 1.0};
  // target pitch rate, the stand-in for a yaw-rate command
  Range command_yaw{0.0, 0.0};
  RewardConfig reward = RoverRewardConfig();

  // table weights with the terms that have no planar counterpart zeroed
  static RewardConfig RoverRewardConfig();

  bool operator==(const EnvConfig&) const = default;
};

struct EnvState {
  double x = 0.0;
  double height = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double pitch = 0.0;
  double pitch_rate = 0.0;
  std::array<double, 2> wheel_angle{};
  std::array<double, 2> wheel_speed{};
  std::array<bool, 2> contact{};
  // prev_action[0] = a_{t-1}, prev_action[1] = a_{t-2}
  std::array<Action, 2> prev_action{};
  int step_index = 0;
  std::array<double, 2> command{};
};

// Observation as a function of state alone; reads neither the hidden
// parameters nor the linear velocity. Layout:
//   command(2) sin/cos pitch(2) pitch rate(1) wheel angle(2)
//   wheel speed(2) previous action(2)
Observation ObserveState(const EnvState& s);
// per-component noise half-width in observation units
Observation NoiseBounds(const EnvConfig& config);

struct StepResult {
  Observation observation{};
  Privileged privileged{};
  RewardInputs reward_inputs;
  RewardBreakdown reward;
  bool done = false;
  bool timeout = false;
};

class RoverEnv {
 public:
  RoverEnv(EnvConfig config, std::uint64_t seed);

  // resample parameters and terrain, return the first observation
  Observation Reset();
  StepResult Step(const Action& action);

  // evaluation hooks: fixed parameters, course or command for the next
  // resets (std::nullopt restores sampling)
  void OverrideParams(std::optional<EnvParams> params) { fixed_params_ = params; }
  void OverrideTerrain(std::optional<Terrain> terrain) {
    fixed_terrain_ = std::move(terrain);
  }
  void OverrideCommand(std::optional<std::array<double, 2>> cmd) {
    fixed_command_ = cmd;
  }
  void SetTerrainScale(double scale) { config_.randomization.terrain_scale = scale; }

  // continues the current course with a new segment that starts just ahead
  // of the front wheel; returns its start
  double ExtendTerrain(TerrainMode mode, double scale);

  // replaces the dynamic state of the current episode
  void RestoreState(const EnvState& state) { state_ = state; }

  Privileged PrivilegedInfo() const;
  Observation Observe();

  const EnvState& state() const { return state_; }
  const EnvParams& params() const { return params_; }
  const Terrain& terrain() const { return terrain_; }
  const EnvConfig& config() const { return config_; }
  double mass() const;

 private:
  double SupportHeight(double x, double pitch) const;
  std::array<bool, 2> Contacts(const EnvState& s) const;
  double WheelX(int i, double x) const;

  EnvConfig config_;
  std::mt19937_64 rng_;
  EnvParams params_;
  Terrain terrain_;
  EnvState state_;
  std::deque<Action> delay_queue_;
  std::optional<EnvParams> fixed_params_;
  std::optional<Terrain> fixed_terrain_;
  std::optional<std::array<double, 2>> fixed_command_;
};

// N independent rovers stepped in lockstep. Env i is seeded base_seed + i.
// Finished episodes are reset in place; the returned observation of such an
// env is the first observation of its new episode.
class VecEnv {
 public:
  struct Batch {
    MatF observations;  // N x obs
    MatF privileged;    // N x 10
    std::vector<double> rewards;
    std::vector<std::uint8_t> dones;
    std::vector<std::uint8_t> timeouts;
    std::vector<RewardBreakdown> breakdowns;
    std::vector<TerrainMode> terrain_modes;
  };

  VecEnv(int num_envs, const EnvConfig& config, std::uint64_t base_seed);

  // returns N x obs
  MatF ResetAll();
  Batch Step(const MatF& actions);
  MatF PrivilegedMatrix() const;

  void SetTerrainScale(double scale);
  int size() const { return static_cast<int>(envs_.size()); }
  RoverEnv& env(int i) { return envs_[i]; }
  const RoverEnv& env(int i) const { return envs_[i]; }

 private:
  std::vector<RoverEnv> envs_;
};

// Trajectory dump, one row per step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void Write(const RoverEnv& env, bool done, int terrain_level);

 private:
  std::ostream& out_;
};

}  // namespace slr

#endif  // SLR_ENV_ROVER_ENV_H_
