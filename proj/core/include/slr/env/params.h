#ifndef SLR_ENV_PARAMS_H_
#define SLR_ENV_PARAMS_H_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "slr/env/terrain.h"

namespace slr {

// Hidden physical parameters of one episode.
struct EnvParams {
  double friction = 1.0;
  double restitution = 0.0;
  double body_mass_scale = 1.0;
  double payload_mass = 0.0;
  double motor_strength_scale = 1.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  int action_delay_steps = 0;
  std::array<double, 2> external_force{};  // (horizontal, vertical)
  TerrainMode terrain_mode = TerrainMode::kFlat;
  double terrain_scale = 0.0;

  bool operator==(const EnvParams&) const = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  static Range Point(double v) { return {v, v}; }

  bool operator==(const Range&) const = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;

  bool operator==(const IntRange&) const = default;
};

struct RandomizationConfig {
  Range friction{0.2, 2.75};
  Range restitution{0.0, 1.0};
  Range body_mass_scale{0.8, 1.2};
  Range payload_mass{-1.0, 3.0};
  Range motor_strength_scale{0.8, 1.2};
  Range kp_scale{0.8, 1.2};
  Range kd_scale{0.8, 1.2};
  IntRange action_delay_steps{0, 3};
  Range external_force{-30.0, 30.0};
  // multiplier on the nominal initial wheel angle
  Range initial_joint_scale{0.5, 1.5};
  std::vector<TerrainMode> terrains = AllTerrains();
  double terrain_scale = 0.1;

  // every range collapsed to its nominal value, flat terrain only
  static RandomizationConfig Disabled();
  // throws std::invalid_argument when a range has lo > hi or no terrain is
  // enabled
  void Validate() const;

  bool operator==(const RandomizationConfig&) const = default;
};

// uniform draw; a collapsed range returns its point without touching rng
double SampleRange(std::mt19937_64& rng, const Range& r);

EnvParams SampleEnvParams(std::mt19937_64& rng, const RandomizationConfig& cfg);

// Threshold curriculum on the mean normalized tracking reward.
int UpdateTerrainLevel(double tracking_reward_mean, int level);
double CurriculumTerrainScale(double base, int level);

}  // namespace slr

#endif  // SLR_ENV_PARAMS_H_
