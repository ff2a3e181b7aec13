#include "slr/ppo/update.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "slr/model/losses.h"
#include "slr/ppo/gae.h"

namespace slr {

template <typename S>
LossVars<S> AssembleLoss(Tape<S>& tape, const BoundAgent<S>& bound,
                         const Minibatch<S>& mb, const PpoConfig& cfg) {
  const Wiring& w = bound.agent->wiring;
  LossVars<S> L;
  Var obs = tape.Constant(mb.obs);
  Var history = tape.Constant(mb.history);
  Var privileged = tape.Constant(mb.privileged);
  Var actions = tape.Constant(mb.actions);
  const AgentVars<S> v = AgentForward(tape, bound, obs, history, privileged);
  L.mean = v.mean;

  Var log_prob = GaussianLogProb(tape, v.mean, bound.log_std, actions);
  Var ratio = tape.Exp(tape.Sub(log_prob, tape.Constant(mb.old_log_probs)));
  Var adv = tape.Constant(mb.advantages);
  Var unclipped = tape.Mul(ratio, adv);
  Var clipped = tape.Mul(
      tape.Clamp(ratio, S(1.0 - cfg.clip_range), S(1.0 + cfg.clip_range)), adv);
  L.surrogate = tape.Scale(tape.Mean(tape.Minimum(unclipped, clipped)), S(-1));
  L.value = tape.Mean(tape.Square(tape.Sub(v.value, tape.Constant(mb.returns))));
  L.entropy = GaussianEntropy(tape, bound.log_std);
  L.ppo = tape.Sub(tape.Add(L.surrogate, tape.Scale(L.value, S(cfg.value_coef))),
                   tape.Scale(L.entropy, S(cfg.entropy_coef)));
  L.total = L.ppo;

  if (w.has_triplet) {
    Var z = LatentPart(tape, bound, v.encoded);
    Var predicted = PredictNextLatent(tape, bound, z, actions);
    Var z_next =
        LatentPart(tape, bound, Encode(tape, bound, tape.Constant(mb.next_history)));
    Var z_negative = LatentPart(
        tape, bound, Encode(tape, bound, tape.Constant(mb.negative_history)));
    L.triplet = TripletLoss(tape, z_next, predicted, z_negative, S(cfg.margin),
                            tape.Constant(mb.triplet_mask));
    L.total = tape.Add(L.total, tape.Scale(L.triplet, S(cfg.triplet_coef)));
  }
  if (w.estimate_dim > 0) {
    Var estimate = tape.SliceCols(v.encoded, w.latent_dim, w.estimate_dim);
    L.estimator = ExplicitEstimatorLoss(tape, estimate, privileged);
    L.total = tape.Add(L.total, tape.Scale(L.estimator, S(cfg.estimator_coef)));
  }
  return L;
}

template LossVars<float> AssembleLoss(Tape<float>&, const BoundAgent<float>&,
                                      const Minibatch<float>&, const PpoConfig&);
template LossVars<double> AssembleLoss(Tape<double>&, const BoundAgent<double>&,
                                       const Minibatch<double>&, const PpoConfig&);

PpoUpdater::PpoUpdater(Agent<float>& agent, const PpoConfig& cfg,
                       std::uint64_t seed)
    : agent_(agent),
      cfg_(cfg),
      lr_(cfg.learning_rate),
      shuffle_rng_(seed),
      negative_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.Validate();
  AdamConfig adam;
  adam.epsilon = cfg.adam_eps;
  for (const auto& [name, net] : agent_.Networks()) {
    net_states_.emplace_back(*net, adam);
  }
  log_std_state_ = AdamState<float>(agent_.log_std, adam);
}

Minibatch<float> PpoUpdater::Gather(const RolloutBuffer& buf,
                                    const std::vector<int>& rows) {
  const int b = static_cast<int>(rows.size());
  Minibatch<float> mb;
  auto take = [&](const MatF& src) {
    MatF out(b, src.cols());
    for (int i = 0; i < b; ++i) out.row(i) = src.row(rows[i]);
    return out;
  };
  mb.obs = take(buf.obs());
  mb.history = take(buf.history());
  mb.privileged = take(buf.privileged());
  mb.actions = take(buf.actions());
  mb.old_log_probs = take(buf.log_probs());
  mb.old_means = take(buf.means());
  mb.advantages.resize(b, 1);
  mb.returns.resize(b, 1);
  for (int i = 0; i < b; ++i) {
    mb.advantages(i, 0) = static_cast<float>(buf.advantages()[rows[i]]);
    mb.returns(i, 0) = static_cast<float>(buf.returns()[rows[i]]);
  }
  if (agent_.wiring.has_triplet) {
    mb.next_history.resize(b, buf.history().cols());
    mb.negative_history.resize(b, buf.history().cols());
    mb.triplet_mask.resize(b, 1);
    for (int i = 0; i < b; ++i) {
      const int row = rows[i];
      const int t = row / buf.num_envs();
      const int env = row % buf.num_envs();
      mb.next_history.row(i) = buf.NextHistory(row);
      mb.negative_history.row(i) =
          buf.history().row(buf.SampleNegativeRow(env, t, negative_rng_));
      mb.triplet_mask(i, 0) = buf.dones()[row] ? 0.0f : 1.0f;
    }
  }
  return mb;
}

UpdateMetrics PpoUpdater::Update(RolloutBuffer& buf) {
  if (!buf.full()) throw std::logic_error("ppo: update needs a full buffer");
  if (buf.rows() < cfg_.minibatches) {
    throw std::invalid_argument("ppo: fewer transitions than minibatches");
  }
  buf.ComputeAdvantages(cfg_.gamma, cfg_.lambda);
  const MatF old_log_std = agent_.log_std;
  const int n = buf.rows();
  std::vector<int> order(n);
  UpdateMetrics m;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng_);
    for (int k = 0; k < cfg_.minibatches; ++k) {
      const int begin = static_cast<int>(static_cast<long>(n) * k / cfg_.minibatches);
      const int end = static_cast<int>(static_cast<long>(n) * (k + 1) / cfg_.minibatches);
      const std::vector<int> rows(order.begin() + begin, order.begin() + end);
      const Minibatch<float> mb = Gather(buf, rows);

      Tape<float> tape;
      const BoundAgent<float> bound = BindAgent(tape, agent_);
      const LossVars<float> L = AssembleLoss(tape, bound, mb, cfg_);
      auto scalar = [&](Var v) {
        return v.valid() ? static_cast<double>(tape.Value(v)(0, 0)) : 0.0;
      };
      const double total = scalar(L.total);
      if (!std::isfinite(total)) {
        std::ostringstream msg;
        msg << "ppo: non-finite loss at epoch " << epoch << " minibatch " << k
            << " (surrogate " << scalar(L.surrogate) << ", value "
            << scalar(L.value) << ", triplet " << scalar(L.triplet)
            << ", estimator " << scalar(L.estimator) << ")";
        throw NumericError(msg.str());
      }
      tape.Backward(L.total);

      std::vector<Gradients<float>> grads;
      if (bound.encoder) grads.push_back(CollectGradients(tape, *bound.encoder));
      if (bound.teacher) grads.push_back(CollectGradients(tape, *bound.teacher));
      if (bound.transition) grads.push_back(CollectGradients(tape, *bound.transition));
      grads.push_back(CollectGradients(tape, bound.actor));
      grads.push_back(CollectGradients(tape, bound.critic));
      MatF log_std_grad = tape.Grad(bound.log_std);

      std::vector<MatF*> all;
      for (auto& g : grads) {
        for (MatF* t : g.Tensors()) all.push_back(t);
      }
      all.push_back(&log_std_grad);
      double norm = 0.0;
      if (cfg_.max_grad_norm > 0.0) {
        norm = ClipGlobalNorm<float>(all, cfg_.max_grad_norm);
      } else {
        std::vector<const MatF*> view(all.begin(), all.end());
        norm = GlobalNorm<float>(view);
      }
      if (!std::isfinite(norm)) {
        throw NumericError("ppo: non-finite gradient at epoch " +
                           std::to_string(epoch) + " minibatch " +
                           std::to_string(k));
      }

      const double kl = MeanGaussianKl<float>(mb.old_means, old_log_std,
                                              tape.Value(L.mean), agent_.log_std);
      if (cfg_.adaptive_lr) {
        lr_ = AdaptLearningRate(kl, lr_, cfg_.desired_kl, cfg_.lr_min, cfg_.lr_max);
      }

      auto nets = agent_.Networks();
      for (std::size_t i = 0; i < nets.size(); ++i) {
        AdamStep(*nets[i].second, grads[i], net_states_[i], lr_, nets[i].first);
      }
      AdamStep(agent_.log_std, log_std_grad, log_std_state_, lr_, "log_std");

      m.surrogate += scalar(L.surrogate);
      m.value_loss += scalar(L.value);
      m.entropy += scalar(L.entropy);
      m.triplet_loss += scalar(L.triplet);
      m.estimator_loss += scalar(L.estimator);
      m.kl += kl;
      m.grad_norm += norm;
      ++m.minibatches;
    }
  }
  const double count = static_cast<double>(m.minibatches);
  m.surrogate /= count;
  m.value_loss /= count;
  m.entropy /= count;
  m.triplet_loss /= count;
  m.estimator_loss /= count;
  m.kl /= count;
  m.grad_norm /= count;
  m.lr = lr_;
  buf.Clear();
  return m;
}

}  // namespace slr
