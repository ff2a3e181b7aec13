#ifndef SLR_PPO_UPDATE_H_
#define SLR_PPO_UPDATE_H_

#include <cstdint>
#include <random>
#include <vector>

#include "slr/model/agent.h"
#include "slr/ppo/buffer.h"
#include "slr/ppo/config.h"
#include "slr/tensor/adam.h"

namespace slr {

// Everything one minibatch contributes to the loss.
template <typename S>
struct Minibatch {
  Mat<S> obs;
  Mat<S> history;
  Mat<S> privileged;
  Mat<S> actions;
  Mat<S> old_log_probs;  // B x 1
  Mat<S> old_means;
  Mat<S> advantages;  // B x 1, already normalized
  Mat<S> returns;     // B x 1
  // triplet inputs; empty when the variant has no transition model
  Mat<S> next_history;
  Mat<S> negative_history;
  Mat<S> triplet_mask;  // B x 1, 0 where t+1 starts a new episode
};

template <typename S>
struct LossVars {
  Var total;
  Var ppo;        // surrogate + value_coef value - entropy_coef entropy
  Var surrogate;
  Var value;
  Var entropy;
  Var triplet;    // invalid without a transition model
  Var estimator;  // invalid without an explicit estimate
  Var mean;
};

// Builds L_ppo + alpha L_trip (+ estimator MSE) on `tape`.
template <typename S>
LossVars<S> AssembleLoss(Tape<S>& tape, const BoundAgent<S>& bound,
                         const Minibatch<S>& mb, const PpoConfig& cfg);

struct UpdateMetrics {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double triplet_loss = 0.0;
  double estimator_loss = 0.0;
  double kl = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
  int minibatches = 0;
};

// Owns the optimizer state of one agent and applies PPO updates to it.
class PpoUpdater {
 public:
  PpoUpdater(Agent<float>& agent, const PpoConfig& cfg, std::uint64_t seed);

  // epochs x shuffled minibatches over a full buffer, then clears it. Throws
  // NumericError on a non-finite loss or gradient; parameters touched by
  // earlier minibatches stay updated, the failing one is not applied.
  UpdateMetrics Update(RolloutBuffer& buffer);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  Minibatch<float> Gather(const RolloutBuffer& buffer,
                          const std::vector<int>& rows);

  Agent<float>& agent_;
  PpoConfig cfg_;
  double lr_;
  std::mt19937_64 shuffle_rng_;
  std::mt19937_64 negative_rng_;
  std::vector<AdamState<float>> net_states_;
  AdamState<float> log_std_state_;
};

}  // namespace slr

#endif  // SLR_PPO_UPDATE_H_
