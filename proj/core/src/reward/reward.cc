#include "slr/reward/reward.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slr {

namespace {

constexpr std::array<std::string_view, kNumRewardTerms> kNames = {
    "powers",         "lin_vel_tracking", "ang_vel_tracking",
    "lin_vel_z",      "ang_vel_xy",       "joint_acc",
    "base_height",    "joint_torques",    "action_rate",
    "action_smoothness", "foot_clearance", "orientation",
};

double SquaredNorm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void RequireSameLength(const std::vector<double>& a,
                       const std::vector<double>& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string("reward: length mismatch in ") +
                                what);
  }
}

}  // namespace

std::string_view RewardTermName(RewardTerm term) {
  return kNames[static_cast<std::size_t>(term)];
}

std::string_view RewardTermName(std::size_t index) { return kNames.at(index); }

RewardConfig RewardConfig::TableDefaults(bool literal_torque_weight) {
  RewardConfig cfg;
  cfg.weight(RewardTerm::kPowers) = -2e-5;
  cfg.weight(RewardTerm::kLinearVelocityTracking) = 1.0;
  cfg.weight(RewardTerm::kAngularVelocityTracking) = 0.5;
  cfg.weight(RewardTerm::kLinearVelocityZ) = -2.0;
  cfg.weight(RewardTerm::kAngularVelocityXy) = -0.05;
  cfg.weight(RewardTerm::kJointAcceleration) = -2.5e-7;
  cfg.weight(RewardTerm::kBaseHeight) = -10.0;
  cfg.weight(RewardTerm::kJointTorques) = literal_torque_weight ? 1.0 : -1e-4;
  cfg.weight(RewardTerm::kActionRate) = -0.01;
  cfg.weight(RewardTerm::kActionSmoothness) = -0.01;
  cfg.weight(RewardTerm::kFootClearance) = -0.01;
  cfg.weight(RewardTerm::kOrientation) = -0.2;
  cfg.sigma = 0.25;
  return cfg;
}

RewardBreakdown ComputeReward(const RewardInputs& in, const RewardConfig& cfg) {
  RequireSameLength(in.torques, in.joint_vel, "torques/joint_vel");
  RequireSameLength(in.action, in.prev_action, "action/prev_action");
  RequireSameLength(in.action, in.prev_prev_action, "action/prev_prev_action");
  RequireSameLength(in.foot_height, in.foot_speed_xy,
                    "foot_height/foot_speed_xy");

  RewardBreakdown out;
  auto set = [&out](RewardTerm t, double v) {
    out.terms[static_cast<std::size_t>(t)] = v;
  };

  double power = 0.0;
  for (std::size_t i = 0; i < in.torques.size(); ++i) {
    power += std::abs(in.torques[i]) * std::abs(in.joint_vel[i]);
  }
  set(RewardTerm::kPowers, power);

  const double dvx = in.v_xy_cmd[0] - in.v_xy[0];
  const double dvy = in.v_xy_cmd[1] - in.v_xy[1];
  set(RewardTerm::kLinearVelocityTracking,
      std::exp(-(dvx * dvx + dvy * dvy) / cfg.sigma));
  const double dw = in.omega_yaw_cmd - in.omega_yaw;
  set(RewardTerm::kAngularVelocityTracking, std::exp(-(dw * dw) / cfg.sigma));

  set(RewardTerm::kLinearVelocityZ, in.v_z * in.v_z);
  set(RewardTerm::kAngularVelocityXy,
      in.omega_xy[0] * in.omega_xy[0] + in.omega_xy[1] * in.omega_xy[1]);
  set(RewardTerm::kJointAcceleration, SquaredNorm(in.joint_acc));
  const double dh = cfg.base_height_target - in.base_height;
  set(RewardTerm::kBaseHeight, dh * dh);
  set(RewardTerm::kJointTorques, SquaredNorm(in.torques));

  double rate = 0.0;
  double smooth = 0.0;
  for (std::size_t i = 0; i < in.action.size(); ++i) {
    const double d1 = in.action[i] - in.prev_action[i];
    const double d2 = in.action[i] - 2.0 * in.prev_action[i] + in.prev_prev_action[i];
    rate += d1 * d1;
    smooth += d2 * d2;
  }
  set(RewardTerm::kActionRate, rate);
  set(RewardTerm::kActionSmoothness, smooth);

  double clearance = 0.0;
  for (std::size_t i = 0; i < in.foot_height.size(); ++i) {
    const double d = cfg.foot_height_target - in.foot_height[i];
    clearance += d * d * in.foot_speed_xy[i];
  }
  set(RewardTerm::kFootClearance, clearance);
  set(RewardTerm::kOrientation, in.gravity_xy[0] * in.gravity_xy[0] +
                                    in.gravity_xy[1] * in.gravity_xy[1]);

  double total = 0.0;
  for (std::size_t k = 0; k < kNumRewardTerms; ++k) {
    total += cfg.weights[k] * out.terms[k];
  }
  out.total = total;
  return out;
}

}  // namespace slr
