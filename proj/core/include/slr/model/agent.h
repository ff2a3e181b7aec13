#ifndef SLR_MODEL_AGENT_H_
#define SLR_MODEL_AGENT_H_

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slr/tensor/checkpoint.h"
#include "slr/tensor/matrix.h"
#include "slr/tensor/mlp.h"
#include "slr/tensor/tape.h"
#include "slr/variants/variant.h"

namespace slr {

struct NetworkConfig {
  std::vector<int> encoder_hidden{256, 128};
  std::vector<int> actor_hidden{512, 256, 128};
  std::vector<int> critic_hidden{512, 256, 128};
  std::vector<int> transition_hidden{256, 128};
  std::vector<int> teacher_hidden{64, 32};
  Activation activation = Activation::kElu;
  // actor reads the whole history instead of o_t
  bool actor_full_history = false;
  double init_log_std = 0.0;

  bool operator==(const NetworkConfig&) const = default;
};

// Parameters of every network a variant uses plus the policy log-std row.
template <typename S>
struct Agent {
  Wiring wiring;
  AgentDims dims;
  std::optional<ParamSet<S>> encoder;
  std::optional<ParamSet<S>> teacher;
  std::optional<ParamSet<S>> transition;
  ParamSet<S> actor;
  ParamSet<S> critic;
  Mat<S> log_std;  // 1 x action_dim

  // present networks in a fixed order: encoder, teacher, transition, actor,
  // critic
  std::vector<std::pair<std::string, ParamSet<S>*>> Networks();
  std::vector<std::pair<std::string, const ParamSet<S>*>> Networks() const;
  bool AllFinite() const;
};

// Builds the networks of `kind` with orthogonal initialization.
Agent<float> BuildVariant(VariantKind kind, const AgentDims& dims,
                          const NetworkConfig& net, std::mt19937_64& rng);

template <typename To, typename From>
Agent<To> CastAgent(const Agent<From>& from);

Checkpoint AgentToCheckpoint(const Agent<float>& agent);
// throws std::runtime_error when the checkpoint lacks a network the recorded
// variant needs or the shapes disagree with the recorded dims
Agent<float> AgentFromCheckpoint(const Checkpoint& ckpt);

// ---- recorded forward passes ----

template <typename S>
struct BoundAgent {
  const Agent<S>* agent = nullptr;
  std::optional<BoundParams<S>> encoder;
  std::optional<BoundParams<S>> teacher;
  std::optional<BoundParams<S>> transition;
  BoundParams<S> actor;
  BoundParams<S> critic;
  Var log_std;
};

template <typename S>
BoundAgent<S> BindAgent(Tape<S>& tape, const Agent<S>& agent);

// encoder output [z | e_hat] for a batch of flattened histories
template <typename S>
Var Encode(Tape<S>& tape, const BoundAgent<S>& b, Var history);

// first latent_dim columns of the encoder output
template <typename S>
Var LatentPart(Tape<S>& tape, const BoundAgent<S>& b, Var encoded);

template <typename S>
Var TeacherLatent(Tape<S>& tape, const BoundAgent<S>& b, Var privileged);

// pi(actor_obs, sg[encoded], teacher): the encoder output is cut from the
// graph before it reaches the actor. Invalid vars are skipped.
template <typename S>
Var PolicyMean(Tape<S>& tape, const BoundAgent<S>& b, Var actor_obs,
               Var encoded, Var teacher);

// V(obs, encoded, teacher) without stop-gradient
template <typename S>
Var ValueForward(Tape<S>& tape, const BoundAgent<S>& b, Var obs, Var encoded,
                 Var teacher);

// mu([z | a])
template <typename S>
Var PredictNextLatent(Tape<S>& tape, const BoundAgent<S>& b, Var z, Var action);

template <typename S>
struct AgentVars {
  Var encoded;  // invalid without an encoder
  Var teacher;  // invalid without a teacher
  Var mean;
  Var value;
};

// everything a PPO minibatch needs from one pass
template <typename S>
AgentVars<S> AgentForward(Tape<S>& tape, const BoundAgent<S>& b, Var obs,
                          Var history, Var privileged);

// log N(actions | mean, exp(log_std)) per row -> [batch x 1]
template <typename S>
Var GaussianLogProb(Tape<S>& tape, Var mean, Var log_std, Var actions);

// entropy of the diagonal Gaussian -> 1x1
template <typename S>
Var GaussianEntropy(Tape<S>& tape, Var log_std);

// ---- tape-free evaluation ----

template <typename S>
struct PolicyOutput {
  Mat<S> encoded;  // empty without an encoder
  Mat<S> teacher;  // empty without a teacher
  Mat<S> mean;
  Mat<S> value;  // batch x 1
};

template <typename S>
PolicyOutput<S> Evaluate(const Agent<S>& agent, const Mat<S>& obs,
                         const Mat<S>& history, const Mat<S>& privileged);

template <typename S>
Mat<S> GaussianLogProb(const Mat<S>& mean, const Mat<S>& log_std,
                       const Mat<S>& actions);

// mean over rows of KL(old || new) between diagonal Gaussians
template <typename S>
double MeanGaussianKl(const Mat<S>& old_mean, const Mat<S>& old_log_std,
                      const Mat<S>& new_mean, const Mat<S>& new_log_std);

}  // namespace slr

#endif  // SLR_MODEL_AGENT_H_
