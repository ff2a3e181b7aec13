#include "slr/env/params.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace slr {

namespace {

void Check(const Range& r, const char* name) {
  if (!(r.lo <= r.hi)) {
    throw std::invalid_argument(std::string("env.randomization.") + name +
                                " range has min > max");
  }
}

}  // namespace

double SampleRange(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

RandomizationConfig RandomizationConfig::Disabled() {
  RandomizationConfig c;
  c.friction = Range::Point(1.0);
  c.restitution = Range::Point(0.0);
  c.body_mass_scale = Range::Point(1.0);
  c.payload_mass = Range::Point(0.0);
  c.motor_strength_scale = Range::Point(1.0);
  c.kp_scale = Range::Point(1.0);
  c.kd_scale = Range::Point(1.0);
  c.action_delay_steps = {0, 0};
  c.external_force = Range::Point(0.0);
  c.initial_joint_scale = Range::Point(1.0);
  c.terrains = {TerrainMode::kFlat};
  return c;
}

void RandomizationConfig::Validate() const {
  Check(friction, "friction");
  Check(restitution, "restitution");
  Check(body_mass_scale, "body_mass_scale");
  Check(payload_mass, "payload_mass");
  Check(motor_strength_scale, "motor_strength_scale");
  Check(kp_scale, "kp_scale");
  Check(kd_scale, "kd_scale");
  Check(external_force, "external_force");
  Check(initial_joint_scale, "initial_joint_scale");
  if (action_delay_steps.lo > action_delay_steps.hi ||
      action_delay_steps.lo < 0) {
    throw std::invalid_argument("env.randomization.action_delay_steps has lo > hi or a negative delay");
  }
  if (terrains.empty()) {
    throw std::invalid_argument("env.randomization.terrains must name at least one terrain");
  }
  if (terrain_scale < 0.0) {
    throw std::invalid_argument("env.randomization.terrain_scale must be >= 0");
  }
}

EnvParams SampleEnvParams(std::mt19937_64& rng, const RandomizationConfig& cfg) {
  cfg.Validate();
  EnvParams p;
  p.friction = SampleRange(rng, cfg.friction);
  p.restitution = SampleRange(rng, cfg.restitution);
  p.body_mass_scale = SampleRange(rng, cfg.body_mass_scale);
  p.payload_mass = SampleRange(rng, cfg.payload_mass);
  p.motor_strength_scale = SampleRange(rng, cfg.motor_strength_scale);
  p.kp_scale = SampleRange(rng, cfg.kp_scale);
  p.kd_scale = SampleRange(rng, cfg.kd_scale);
  p.action_delay_steps =
      std::uniform_int_distribution<int>(cfg.action_delay_steps.lo,
                                         cfg.action_delay_steps.hi)(rng);
  p.external_force = {SampleRange(rng, cfg.external_force),
                      SampleRange(rng, cfg.external_force)};
  const auto pick = std::uniform_int_distribution<std::size_t>(
      0, cfg.terrains.size() - 1)(rng);
  p.terrain_mode = cfg.terrains[pick];
  p.terrain_scale = cfg.terrain_scale;
  return p;
}

int UpdateTerrainLevel(double tracking_reward_mean, int level) {
  if (level < 0) throw std::invalid_argument("curriculum: level must be >= 0");
  if (tracking_reward_mean > 0.8) return level + 1;
  if (tracking_reward_mean < 0.4) return std::max(0, level - 1);
  return level;
}

double CurriculumTerrainScale(double base, int level) {
  return base * (1.0 + 0.5 * level);
}

}  // namespace slr
