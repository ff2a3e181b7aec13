#ifndef SLR_PPO_CONFIG_H_
#define SLR_PPO_CONFIG_H_

namespace slr {

struct PpoConfig {
  double clip_range = 0.2;
  double entropy_coef = 0.01;
  double gamma = 0.99;
  double lambda = 0.95;
  double desired_kl = 0.01;
  double learning_rate = 1e-3;
  double adam_eps = 1e-8;
  double value_coef = 1.0;
  // 0 disables clipping
  double max_grad_norm = 1.0;
  bool adaptive_lr = true;
  double lr_min = 1e-5;
  double lr_max = 1e-2;
  int epochs = 5;
  int minibatches = 4;
  // weight of the triplet term in L_ppo + alpha * L_trip
  double triplet_coef = 1.0;
  double margin = 1.0;
  // weight of the privileged-estimate MSE for the explicit variants
  double estimator_coef = 1.0;

  // throws std::invalid_argument naming the first bad field
  void Validate() const;
  bool operator==(const PpoConfig&) const = default;
};

}  // namespace slr

#endif  // SLR_PPO_CONFIG_H_
