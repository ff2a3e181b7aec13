#ifndef SLR_PPO_GAE_H_
#define SLR_PPO_GAE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace slr {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// One environment's trajectory segment. done[t] marks that the episode
// ended after step t, which cuts both the bootstrap and the recursion:
//   delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t
//   A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// with v_T = bootstrap_value. Throws DimensionError on length mismatch.
GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values,
                     std::span<const std::uint8_t> dones,
                     double bootstrap_value, double gamma, double lambda);

// In place: mean 0, population std 1. A constant batch becomes all zeros.
void NormalizeAdvantages(std::span<double> advantages);

// lr / 1.5 above twice the target, lr * 1.5 below half of it (for kl > 0),
// clamped to [lo, hi].
double AdaptLearningRate(double kl, double lr, double desired_kl,
                         double lo = 1e-5, double hi = 1e-2);

struct SurrogateTerms {
  double policy = 0.0;   // -mean(min(rho A, clip(rho) A))
  double value = 0.0;    // mean((V - R)^2)
  double entropy = 0.0;  // mean entropy
  double total = 0.0;    // policy + value_coef value - entropy_coef entropy
};

// Plain evaluation of the PPO loss for given ratios; the training update
// builds the same expression on a tape.
SurrogateTerms PpoSurrogate(std::span<const double> ratios,
                            std::span<const double> advantages,
                            std::span<const double> values,
                            std::span<const double> returns, double entropy,
                            double clip_range, double value_coef,
                            double entropy_coef);

}  // namespace slr

#endif  // SLR_PPO_GAE_H_
