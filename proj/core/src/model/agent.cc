#include "slr/model/agent.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slr {

namespace {

std::vector<int> Sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

ParamSet<float> MakeNet(int in, const std::vector<int>& hidden, int out,
                        Activation act, double output_gain,
                        std::mt19937_64& rng) {
  ParamSet<float> p(Sizes(in, hidden, out), act);
  p.InitOrthogonal(rng, std::sqrt(2.0), output_gain);
  return p;
}

template <typename S>
Var Concat(Tape<S>& tape, std::initializer_list<Var> parts) {
  std::vector<Var> valid;
  for (Var v : parts) {
    if (v.valid()) valid.push_back(v);
  }
  if (valid.size() == 1) return valid.front();
  return tape.ConcatCols(valid);
}

template <typename S>
Mat<S> ConcatMats(std::initializer_list<const Mat<S>*> parts) {
  Eigen::Index rows = 0, cols = 0;
  for (const Mat<S>* m : parts) {
    if (m->size() == 0) continue;
    rows = m->rows();
    cols += m->cols();
  }
  Mat<S> out(rows, cols);
  Eigen::Index c = 0;
  for (const Mat<S>* m : parts) {
    if (m->size() == 0) continue;
    out.middleCols(c, m->cols()) = *m;
    c += m->cols();
  }
  return out;
}

void RequireNetwork(const ParamSet<float>* p, const std::string& name,
                    int in, int out) {
  if (p == nullptr) {
    throw std::runtime_error("checkpoint: missing network '" + name + "'");
  }
  if (p->input_dim() != in || p->output_dim() != out) {
    throw std::runtime_error("checkpoint: network '" + name + "' is " +
                             std::to_string(p->input_dim()) + "->" +
                             std::to_string(p->output_dim()) + ", expected " +
                             std::to_string(in) + "->" + std::to_string(out));
  }
}

}  // namespace

template <typename S>
std::vector<std::pair<std::string, ParamSet<S>*>> Agent<S>::Networks() {
  std::vector<std::pair<std::string, ParamSet<S>*>> out;
  if (encoder) out.emplace_back("encoder", &*encoder);
  if (teacher) out.emplace_back("teacher", &*teacher);
  if (transition) out.emplace_back("transition", &*transition);
  out.emplace_back("actor", &actor);
  out.emplace_back("critic", &critic);
  return out;
}

template <typename S>
std::vector<std::pair<std::string, const ParamSet<S>*>> Agent<S>::Networks()
    const {
  std::vector<std::pair<std::string, const ParamSet<S>*>> out;
  if (encoder) out.emplace_back("encoder", &*encoder);
  if (teacher) out.emplace_back("teacher", &*teacher);
  if (transition) out.emplace_back("transition", &*transition);
  out.emplace_back("actor", &actor);
  out.emplace_back("critic", &critic);
  return out;
}

template <typename S>
bool Agent<S>::AllFinite() const {
  for (const auto& [name, net] : Networks()) {
    if (!net->AllFinite()) return false;
  }
  return log_std.allFinite();
}

Agent<float> BuildVariant(VariantKind kind, const AgentDims& dims,
                          const NetworkConfig& net, std::mt19937_64& rng) {
  if (dims.obs_dim < 1 || dims.action_dim < 1 || dims.history_len < 1 ||
      dims.latent_dim < 1 || dims.privileged_dim < 1 ||
      dims.teacher_latent_dim < 1) {
    throw std::invalid_argument("agent: all dims must be positive");
  }
  Agent<float> a;
  a.dims = dims;
  a.wiring = MakeWiring(kind, dims, net.actor_full_history);
  const Wiring& w = a.wiring;
  if (w.has_encoder) {
    a.encoder = MakeNet(dims.history_dim(), net.encoder_hidden,
                        w.encoder_output_dim(), net.activation, 1.0, rng);
  }
  if (w.has_teacher) {
    a.teacher = MakeNet(dims.privileged_dim, net.teacher_hidden, w.teacher_dim,
                        net.activation, 1.0, rng);
  }
  if (w.has_triplet) {
    a.transition = MakeNet(w.latent_dim + dims.action_dim, net.transition_hidden,
                           w.latent_dim, net.activation, 1.0, rng);
  }
  a.actor = MakeNet(w.actor_input_dim(dims), net.actor_hidden, dims.action_dim,
                    net.activation, 0.01, rng);
  a.critic = MakeNet(w.critic_input_dim(dims), net.critic_hidden, 1,
                     net.activation, 1.0, rng);
  a.log_std = MatF::Constant(1, dims.action_dim,
                             static_cast<float>(net.init_log_std));
  return a;
}

template <typename To, typename From>
Agent<To> CastAgent(const Agent<From>& from) {
  Agent<To> to;
  to.wiring = from.wiring;
  to.dims = from.dims;
  if (from.encoder) to.encoder = CastParams<To>(*from.encoder);
  if (from.teacher) to.teacher = CastParams<To>(*from.teacher);
  if (from.transition) to.transition = CastParams<To>(*from.transition);
  to.actor = CastParams<To>(from.actor);
  to.critic = CastParams<To>(from.critic);
  to.log_std = from.log_std.template cast<To>();
  return to;
}

Checkpoint AgentToCheckpoint(const Agent<float>& agent) {
  Checkpoint c;
  for (const auto& [name, net] : agent.Networks()) c.networks.emplace_back(name, *net);
  c.tensors.emplace_back("log_std", agent.log_std);
  const AgentDims& d = agent.dims;
  c.metadata["variant"] = std::string(VariantName(agent.wiring.kind));
  c.metadata["actor_full_history"] = agent.wiring.actor_full_history;
  c.metadata["dims"] = {{"obs_dim", d.obs_dim},
                        {"action_dim", d.action_dim},
                        {"privileged_dim", d.privileged_dim},
                        {"history_len", d.history_len},
                        {"latent_dim", d.latent_dim},
                        {"teacher_latent_dim", d.teacher_latent_dim}};
  return c;
}

Agent<float> AgentFromCheckpoint(const Checkpoint& ckpt) {
  Agent<float> a;
  try {
    const auto& dims = ckpt.metadata.at("dims");
    a.dims.obs_dim = dims.at("obs_dim").get<int>();
    a.dims.action_dim = dims.at("action_dim").get<int>();
    a.dims.privileged_dim = dims.at("privileged_dim").get<int>();
    a.dims.history_len = dims.at("history_len").get<int>();
    a.dims.latent_dim = dims.at("latent_dim").get<int>();
    a.dims.teacher_latent_dim = dims.at("teacher_latent_dim").get<int>();
    a.wiring = MakeWiring(
        ParseVariant(ckpt.metadata.at("variant").get<std::string>()), a.dims,
        ckpt.metadata.at("actor_full_history").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad agent metadata: ") +
                             e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  const Wiring& w = a.wiring;
  const AgentDims& d = a.dims;
  if (w.has_encoder) {
    const auto* p = ckpt.FindNetwork("encoder");
    RequireNetwork(p, "encoder", d.history_dim(), w.encoder_output_dim());
    a.encoder = *p;
  }
  if (w.has_teacher) {
    const auto* p = ckpt.FindNetwork("teacher");
    RequireNetwork(p, "teacher", d.privileged_dim, w.teacher_dim);
    a.teacher = *p;
  }
  if (w.has_triplet) {
    const auto* p = ckpt.FindNetwork("transition");
    RequireNetwork(p, "transition", w.latent_dim + d.action_dim, w.latent_dim);
    a.transition = *p;
  }
  const auto* actor = ckpt.FindNetwork("actor");
  RequireNetwork(actor, "actor", w.actor_input_dim(d), d.action_dim);
  a.actor = *actor;
  const auto* critic = ckpt.FindNetwork("critic");
  RequireNetwork(critic, "critic", w.critic_input_dim(d), 1);
  a.critic = *critic;
  const MatF* log_std = ckpt.FindTensor("log_std");
  if (log_std == nullptr || log_std->rows() != 1 ||
      log_std->cols() != d.action_dim) {
    throw std::runtime_error("checkpoint: missing or misshaped log_std");
  }
  a.log_std = *log_std;
  return a;
}

template <typename S>
BoundAgent<S> BindAgent(Tape<S>& tape, const Agent<S>& agent) {
  BoundAgent<S> b;
  b.agent = &agent;
  if (agent.encoder) b.encoder = Bind(tape, *agent.encoder);
  if (agent.teacher) b.teacher = Bind(tape, *agent.teacher);
  if (agent.transition) b.transition = Bind(tape, *agent.transition);
  b.actor = Bind(tape, agent.actor);
  b.critic = Bind(tape, agent.critic);
  b.log_std = tape.Leaf(agent.log_std);
  return b;
}

template <typename S>
Var Encode(Tape<S>& tape, const BoundAgent<S>& b, Var history) {
  if (!b.encoder) throw std::logic_error("agent: variant has no encoder");
  return MlpForward(tape, *b.encoder, history);
}

template <typename S>
Var LatentPart(Tape<S>& tape, const BoundAgent<S>& b, Var encoded) {
  const Wiring& w = b.agent->wiring;
  if (w.estimate_dim == 0) return encoded;
  return tape.SliceCols(encoded, 0, w.latent_dim);
}

template <typename S>
Var TeacherLatent(Tape<S>& tape, const BoundAgent<S>& b, Var privileged) {
  if (!b.teacher) throw std::logic_error("agent: variant has no teacher");
  return MlpForward(tape, *b.teacher, privileged);
}

template <typename S>
Var PolicyMean(Tape<S>& tape, const BoundAgent<S>& b, Var actor_obs,
               Var encoded, Var teacher) {
  Var cut = encoded.valid() ? tape.StopGradient(encoded) : Var{};
  return MlpForward(tape, b.actor, Concat(tape, {actor_obs, cut, teacher}));
}

template <typename S>
Var ValueForward(Tape<S>& tape, const BoundAgent<S>& b, Var obs, Var encoded,
                 Var teacher) {
  return MlpForward(tape, b.critic, Concat(tape, {obs, encoded, teacher}));
}

template <typename S>
Var PredictNextLatent(Tape<S>& tape, const BoundAgent<S>& b, Var z,
                      Var action) {
  if (!b.transition) {
    throw std::logic_error("agent: variant has no transition model");
  }
  return MlpForward(tape, *b.transition, Concat(tape, {z, action}));
}

template <typename S>
AgentVars<S> AgentForward(Tape<S>& tape, const BoundAgent<S>& b, Var obs,
                          Var history, Var privileged) {
  const Wiring& w = b.agent->wiring;
  AgentVars<S> v;
  if (w.has_encoder) v.encoded = Encode(tape, b, history);
  if (w.has_teacher) v.teacher = TeacherLatent(tape, b, privileged);
  v.mean = PolicyMean(tape, b, w.actor_full_history ? history : obs, v.encoded,
                      v.teacher);
  v.value = ValueForward(tape, b, obs, v.encoded, v.teacher);
  return v;
}

template <typename S>
Var GaussianLogProb(Tape<S>& tape, Var mean, Var log_std, Var actions) {
  const int d = static_cast<int>(tape.Value(log_std).cols());
  Var inv_std = tape.Exp(tape.Scale(log_std, S(-1)));
  Var scaled = tape.Mul(tape.Sub(actions, mean), inv_std);
  Var quad = tape.Scale(tape.RowSum(tape.Square(scaled)), S(-0.5));
  Var lp = tape.Sub(quad, tape.Sum(log_std));
  return tape.AddScalar(lp, S(-0.5 * d * std::log(2.0 * std::numbers::pi)));
}

template <typename S>
Var GaussianEntropy(Tape<S>& tape, Var log_std) {
  const int d = static_cast<int>(tape.Value(log_std).cols());
  return tape.AddScalar(tape.Sum(log_std),
                        S(0.5 * d * (1.0 + std::log(2.0 * std::numbers::pi))));
}

template <typename S>
PolicyOutput<S> Evaluate(const Agent<S>& agent, const Mat<S>& obs,
                         const Mat<S>& history, const Mat<S>& privileged) {
  const Wiring& w = agent.wiring;
  PolicyOutput<S> out;
  if (w.has_encoder) out.encoded = MlpForward(*agent.encoder, history);
  if (w.has_teacher) out.teacher = MlpForward(*agent.teacher, privileged);
  const Mat<S>& actor_obs = w.actor_full_history ? history : obs;
  out.mean = MlpForward(agent.actor,
                        ConcatMats<S>({&actor_obs, &out.encoded, &out.teacher}));
  out.value =
      MlpForward(agent.critic, ConcatMats<S>({&obs, &out.encoded, &out.teacher}));
  return out;
}

template <typename S>
Mat<S> GaussianLogProb(const Mat<S>& mean, const Mat<S>& log_std,
                       const Mat<S>& actions) {
  const int d = static_cast<int>(log_std.cols());
  const double c = -0.5 * d * std::log(2.0 * std::numbers::pi);
  Mat<S> out(mean.rows(), 1);
  for (Eigen::Index i = 0; i < mean.rows(); ++i) {
    double lp = c;
    for (int j = 0; j < d; ++j) {
      const double z = (actions(i, j) - mean(i, j)) / std::exp(double(log_std(0, j)));
      lp += -0.5 * z * z - log_std(0, j);
    }
    out(i, 0) = static_cast<S>(lp);
  }
  return out;
}

template <typename S>
double MeanGaussianKl(const Mat<S>& old_mean, const Mat<S>& old_log_std,
                      const Mat<S>& new_mean, const Mat<S>& new_log_std) {
  if (old_mean.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < old_mean.rows(); ++i) {
    for (Eigen::Index j = 0; j < old_mean.cols(); ++j) {
      const double so = std::exp(double(old_log_std(0, j)));
      const double sn = std::exp(double(new_log_std(0, j)));
      const double dm = double(old_mean(i, j)) - double(new_mean(i, j));
      total += std::log(sn / so) + (so * so + dm * dm) / (2.0 * sn * sn) - 0.5;
    }
  }
  return total / static_cast<double>(old_mean.rows());
}

#define SLR_INSTANTIATE(S)                                                     \
  template struct Agent<S>;                                                    \
  template BoundAgent<S> BindAgent(Tape<S>&, const Agent<S>&);                 \
  template Var Encode(Tape<S>&, const BoundAgent<S>&, Var);                    \
  template Var LatentPart(Tape<S>&, const BoundAgent<S>&, Var);                \
  template Var TeacherLatent(Tape<S>&, const BoundAgent<S>&, Var);             \
  template Var PolicyMean(Tape<S>&, const BoundAgent<S>&, Var, Var, Var);      \
  template Var ValueForward(Tape<S>&, const BoundAgent<S>&, Var, Var, Var);    \
  template Var PredictNextLatent(Tape<S>&, const BoundAgent<S>&, Var, Var);    \
  template AgentVars<S> AgentForward(Tape<S>&, const BoundAgent<S>&, Var, Var, \
                                     Var);                                     \
  template Var GaussianLogProb(Tape<S>&, Var, Var, Var);                       \
  template Var GaussianEntropy(Tape<S>&, Var);                                 \
  template PolicyOutput<S> Evaluate(const Agent<S>&, const Mat<S>&,            \
                                    const Mat<S>&, const Mat<S>&);             \
  template Mat<S> GaussianLogProb(const Mat<S>&, const Mat<S>&, const Mat<S>&); \
  template double MeanGaussianKl(const Mat<S>&, const Mat<S>&, const Mat<S>&,  \
                                 const Mat<S>&);

SLR_INSTANTIATE(float)
SLR_INSTANTIATE(double)
#undef SLR_INSTANTIATE

template Agent<double> CastAgent(const Agent<float>&);
template Agent<float> CastAgent(const Agent<double>&);
template Agent<float> CastAgent(const Agent<float>&);

}  // namespace slr
