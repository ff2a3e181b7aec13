#ifndef SLR_TESTS_SUPPORT_FIXTURES_H_
#define SLR_TESTS_SUPPORT_FIXTURES_H_

#include <random>

#include "slr/model/agent.h"
#include "slr/ppo/update.h"
#include "slr/tensor/matrix.h"
#include "slr/variants/variant.h"

namespace slr::testing {

// tiny shapes so gradient checks stay fast
inline AgentDims SmallDims() {
  AgentDims d;
  d.obs_dim = 3;
  d.action_dim = 2;
  d.privileged_dim = 4;
  d.history_len = 2;
  d.latent_dim = 5;
  d.teacher_latent_dim = 3;
  return d;
}

inline NetworkConfig SmallNets() {
  NetworkConfig n;
  n.encoder_hidden = {6};
  n.actor_hidden = {7};
  n.critic_hidden = {7};
  n.transition_hidden = {6};
  n.teacher_hidden = {4};
  return n;
}

template <typename S>
Mat<S> Random(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat<S> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(n(rng));
  return m;
}

// random minibatch; row 1 is masked out of the triplet term
inline Minibatch<double> RandomMinibatch(const AgentDims& d, int b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Minibatch<double> mb;
  mb.obs = Random<double>(b, d.obs_dim, rng);
  mb.history = Random<double>(b, d.history_dim(), rng);
  mb.privileged = Random<double>(b, d.privileged_dim, rng);
  mb.actions = Random<double>(b, d.action_dim, rng);
  mb.old_log_probs = Random<double>(b, 1, rng).array() - 2.0;
  mb.old_means = Random<double>(b, d.action_dim, rng);
  mb.advantages = Random<double>(b, 1, rng);
  mb.returns = Random<double>(b, 1, rng);
  mb.next_history = Random<double>(b, d.history_dim(), rng);
  mb.negative_history = Random<double>(b, d.history_dim(), rng);
  mb.triplet_mask = MatD::Ones(b, 1);
  mb.triplet_mask(1, 0) = 0.0;
  return mb;
}

}  // namespace slr::testing

#endif  // SLR_TESTS_SUPPORT_FIXTURES_H_
