#ifndef SLR_REWARD_REWARD_H_
#define SLR_REWARD_REWARD_H_

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace slr {

// The twelve locomotion reward terms. Order is the column order of the
// per-term metrics output.
enum class RewardTerm : std::size_t {
  kPowers = 0,
  kLinearVelocityTracking,
  kAngularVelocityTracking,
  kLinearVelocityZ,
  kAngularVelocityXy,
  kJointAcceleration,
  kBaseHeight,
  kJointTorques,
  kActionRate,
  kActionSmoothness,
  kFootClearance,
  kOrientation,
};

inline constexpr std::size_t kNumRewardTerms = 12;

std::string_view RewardTermName(RewardTerm term);
std::string_view RewardTermName(std::size_t index);

// Quantities the reward terms are computed from. Vectors over joints (or
// wheels) and over contact points may have any length, as long as the
// per-contact arrays agree with each other and the action arrays agree.
struct RewardInputs {
  std::array<double, 2> v_xy{};
  std::array<double, 2> v_xy_cmd{};
  double v_z = 0.0;
  double omega_yaw = 0.0;
  double omega_yaw_cmd = 0.0;
  std::array<double, 2> omega_xy{};
  std::vector<double> torques;
  std::vector<double> joint_vel;
  std::vector<double> joint_acc;
  double base_height = 0.0;
  std::vector<double> action;
  std::vector<double> prev_action;
  std::vector<double> prev_prev_action;
  std::vector<double> foot_height;
  std::vector<double> foot_speed_xy;
  std::array<double, 2> gravity_xy{};
};

struct RewardConfig {
  std::array<double, kNumRewardTerms> weights{};
  // tracking shaping scale
  double sigma = 0.25;
  double base_height_target = 0.0;
  double foot_height_target = 0.0;

  double weight(RewardTerm t) const {
    return weights[static_cast<std::size_t>(t)];
  }
  double& weight(RewardTerm t) { return weights[static_cast<std::size_t>(t)]; }

  // Weights of the published reward table. The joint-torque row is listed
  // with +1, which would pay for torque; the default here is -1e-4 and
  // `literal_torque_weight` restores the listed value.
  static RewardConfig TableDefaults(bool literal_torque_weight = false);

  bool operator==(const RewardConfig&) const = default;
};

struct RewardBreakdown {
  double total = 0.0;
  // unweighted term values
  std::array<double, kNumRewardTerms> terms{};
  double term(RewardTerm t) const { return terms[static_cast<std::size_t>(t)]; }
};

// Pure: tracking terms lie in (0, 1]; every other term is a non-negative
// magnitude and carries its sign through the weight. total = sum w_k term_k.
RewardBreakdown ComputeReward(const RewardInputs& in, const RewardConfig& cfg);

}  // namespace slr

#endif  // SLR_REWARD_REWARD_H_
