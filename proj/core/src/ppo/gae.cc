#include "slr/ppo/gae.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slr/ppo/config.h"
#include "slr/tensor/matrix.h"

namespace slr {

void PpoConfig::Validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("ppo.") + name +
                                  " must be positive");
    }
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("ppo.") + name +
                                  " must be >= 0");
    }
  };
  positive(clip_range, "clip_range");
  if (clip_range >= 1.0) {
    throw std::invalid_argument("ppo.clip_range must be below 1");
  }
  non_negative(entropy_coef, "entropy_coef");
  positive(gamma, "gamma");
  if (gamma > 1.0) throw std::invalid_argument("ppo.gamma must be <= 1");
  positive(lambda, "lambda");
  if (lambda > 1.0) throw std::invalid_argument("ppo.lambda must be <= 1");
  positive(desired_kl, "desired_kl");
  positive(learning_rate, "learning_rate");
  positive(adam_eps, "adam_eps");
  non_negative(value_coef, "value_coef");
  non_negative(max_grad_norm, "max_grad_norm");
  positive(lr_min, "lr_min");
  positive(lr_max, "lr_max");
  if (lr_min > lr_max) throw std::invalid_argument("ppo.lr_min exceeds lr_max");
  if (epochs < 1) throw std::invalid_argument("ppo.epochs must be >= 1");
  if (minibatches < 1) throw std::invalid_argument("ppo.minibatches must be >= 1");
  non_negative(triplet_coef, "triplet_coef");
  non_negative(margin, "margin");
  non_negative(estimator_coef, "estimator_coef");
}

GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values,
                     std::span<const std::uint8_t> dones,
                     double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw DimensionError("gae: rewards/values/dones lengths " +
                         std::to_string(n) + "/" +
                         std::to_string(values.size()) + "/" +
                         std::to_string(dones.size()));
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

void NormalizeAdvantages(std::span<double> adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double sd = std::sqrt(var);
  for (double& a : adv) a = sd > 0.0 ? (a - mean) / sd : 0.0;
}

double AdaptLearningRate(double kl, double lr, double desired_kl, double lo,
                         double hi) {
  if (kl < 0.0) throw std::invalid_argument("adapt lr: kl must be >= 0");
  if (kl > 2.0 * desired_kl) {
    lr /= 1.5;
  } else if (kl > 0.0 && kl < 0.5 * desired_kl) {
    lr *= 1.5;
  }
  return std::clamp(lr, lo, hi);
}

SurrogateTerms PpoSurrogate(std::span<const double> ratios,
                            std::span<const double> advantages,
                            std::span<const double> values,
                            std::span<const double> returns, double entropy,
                            double clip_range, double value_coef,
                            double entropy_coef) {
  if (ratios.size() != advantages.size() || values.size() != returns.size()) {
    throw DimensionError("surrogate: length mismatch");
  }
  SurrogateTerms s;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double clipped =
        std::clamp(ratios[i], 1.0 - clip_range, 1.0 + clip_range);
    s.policy -= std::min(ratios[i] * advantages[i], clipped * advantages[i]);
  }
  if (!ratios.empty()) s.policy /= static_cast<double>(ratios.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.value += (values[i] - returns[i]) * (values[i] - returns[i]);
  }
  if (!values.empty()) s.value /= static_cast<double>(values.size());
  s.entropy = entropy;
  s.total = s.policy + value_coef * s.value - entropy_coef * s.entropy;
  return s;
}

}  // namespace slr
