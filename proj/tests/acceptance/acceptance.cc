// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.
//
//   acceptance <work_dir> [--only=N,M,...]
//
// Criteria 6-8 train 2 variants x 3 seeds with configs/acceptance.toml; expect
// several minutes on one core.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "slr/model/agent.h"
#include "slr/model/losses.h"
#include "slr/ppo/gae.h"
#include "slr/ppo/trainer.h"
#include "slr/ppo/update.h"
#include "slr/run/config.h"
#include "slr/run/runner.h"
#include "support/fixtures.h"
#include "support/gradcheck.h"

namespace slr {
namespace {

namespace fs = std::filesystem;

using testing::CentralDifferences;
using testing::MaxRelativeError;
using testing::Random;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

fs::path SourcePath(const std::string& rel) { return fs::path(SLR_SOURCE_DIR) / rel; }

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- 1. triplet loss ----

Outcome TripletExactness() {
  const std::vector<double> origin{0, 0};
  const double cases[3] = {
      TripletLoss(origin, origin, std::vector<double>{2, 0}, 1.0),
      TripletLoss(origin, std::vector<double>{1, 0}, std::vector<double>{1, 0}, 1.0),
      TripletLoss(origin, std::vector<double>{1, 1}, std::vector<double>{1, 0}, 1.0)};
  const double want[3] = {0.0, 1.0, 2.0};
  double case_err = 0.0;
  for (int i = 0; i < 3; ++i) case_err = std::max(case_err, std::abs(cases[i] - want[i]));

  std::mt19937_64 rng(101);
  double worst = 0.0;
  int checked = 0;
  while (checked < 50) {
    MatD a = Random<double>(4, 6, rng);
    MatD p = a + 0.5 * Random<double>(4, 6, rng);
    MatD n = a + 0.5 * Random<double>(4, 6, rng);
    // every row strictly inside the active region, away from the kink
    bool active = true;
    for (int r = 0; r < 4; ++r) {
      const double arg =
          (a.row(r) - p.row(r)).squaredNorm() - (a.row(r) - n.row(r)).squaredNorm() + 1.0;
      if (arg < 0.05) active = false;
    }
    if (!active) continue;
    Tape<double> tape;
    Var va = tape.Leaf(a), vp = tape.Leaf(p), vn = tape.Leaf(n);
    tape.Backward(TripletLoss(tape, va, vp, vn, 1.0));
    // oracle: mean of the scalar formula, no tape
    auto f = [&] {
      double s = 0.0;
      for (int r = 0; r < 4; ++r) {
        auto row = [&](const MatD& m) {
          return std::vector<double>(m.row(r).begin(), m.row(r).end());
        };
        s += TripletLoss(row(a), row(p), row(n), 1.0);
      }
      return s / 4.0;
    };
    worst = std::max({worst, MaxRelativeError(tape.Grad(va), CentralDifferences(a, f, 1e-6)),
                      MaxRelativeError(tape.Grad(vp), CentralDifferences(p, f, 1e-6)),
                      MaxRelativeError(tape.Grad(vn), CentralDifferences(n, f, 1e-6))});
    ++checked;
  }
  return {case_err <= 1e-9 && worst < 1e-5,
          "cases (0,1,2) max err " + Fmt("%.3g", case_err) + ", hinge grad rel err " +
              Fmt("%.3g", worst) + " over 50 batches"};
}

// ---- 2. stop-gradient ----

TrainerConfig StopGradConfig() {
  TrainerConfig c;
  c.num_envs = 16;
  c.horizon = 12;
  c.iterations = 1;
  c.net = testing::SmallNets();
  c.ppo.epochs = 1;
  c.ppo.minibatches = 1;  // exactly one optimizer step
  c.curriculum = false;
  c.seed = 3;
  return c;
}

// true when one update leaves the encoder bitwise unchanged
bool EncoderUnchanged(double alpha, double value_coef) {
  TrainerConfig c = StopGradConfig();
  c.ppo.triplet_coef = alpha;
  c.ppo.value_coef = value_coef;
  Trainer trainer(c);
  const ParamSet<float> before = *trainer.agent().encoder;
  const ParamSet<float> actor_before = trainer.agent().actor;
  trainer.Iterate();
  if (trainer.agent().actor == actor_before) {
    throw std::runtime_error("actor did not move; update was a no-op");
  }
  return *trainer.agent().encoder == before;
}

Outcome StopGradient() {
  const bool frozen = EncoderUnchanged(0.0, 0.0);
  const bool trip_moves = !EncoderUnchanged(1.0, 0.0);
  const bool value_moves = !EncoderUnchanged(0.0, 1.0);
  return {frozen && trip_moves && value_moves,
          std::string("alpha=0,vc=0 unchanged: ") + (frozen ? "yes" : "no") +
              "; alpha restored moves: " + (trip_moves ? "yes" : "no") +
              "; value restored moves: " + (value_moves ? "yes" : "no")};
}

// ---- 3. autodiff soundness ----

ParamSet<double> RandomMlp(int in, int out, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(0, 3), width(2, 8), act(0, 2);
  std::vector<int> sizes{in};
  const int hidden = depth(rng);
  for (int i = 0; i < hidden; ++i) sizes.push_back(width(rng));
  sizes.push_back(out);
  const Activation a[3] = {Activation::kElu, Activation::kTanh, Activation::kIdentity};
  ParamSet<double> p(sizes, a[act(rng)]);
  for (MatD* t : p.Tensors()) *t = Random<double>(t->rows(), t->cols(), rng);
  return p;
}

// worst relative error of one random MLP + loss configuration
double MlpLossCheck(int trial) {
  std::mt19937_64 rng(5000 + trial);
  std::uniform_int_distribution<int> dim(1, 6), batch(1, 5);
  const int kind = trial % 4;
  const int in = dim(rng), b = batch(rng);
  const int out = kind == 3 ? 3 * dim(rng) : dim(rng);
  ParamSet<double> p = RandomMlp(in, out, rng);
  const MatD x = Random<double>(b, in, rng);
  const MatD target = Random<double>(b, out, rng);
  MatD log_std = 0.3 * Random<double>(1, out, rng);

  auto loss = [&](Tape<double>& t, const BoundParams<double>& bp, Var ls) {
    Var y = MlpForward(t, bp, t.Constant(x));
    switch (kind) {
      case 0:
        return t.Mean(t.Square(t.Sub(y, t.Constant(target))));
      case 1:
        return t.Add(t.Mean(t.Tanh(y)), t.Scale(t.Sum(t.Square(y)), 0.1));
      case 2:
        return t.Scale(t.Mean(GaussianLogProb(t, y, ls, t.Constant(target))), -1.0);
      default: {
        // large margin keeps every hinge active, so the loss is smooth
        const int k = out / 3;
        return TripletLoss(t, t.SliceCols(y, 0, k), t.SliceCols(y, k, k),
                           t.SliceCols(y, 2 * k, k), 50.0);
      }
    }
  };
  Tape<double> tape;
  const BoundParams<double> bound = Bind(tape, p);
  Var ls = tape.Leaf(log_std);
  tape.Backward(loss(tape, bound, ls));
  const Gradients<double> g = CollectGradients(tape, bound);
  const MatD g_ls = tape.Grad(ls);
  auto f = [&] {
    Tape<double> t;
    const BoundParams<double> bp = Bind(t, p);
    return t.Value(loss(t, bp, t.Leaf(log_std)))(0, 0);
  };
  double worst = 0.0;
  auto params = p.Tensors();
  auto grads = g.Tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    worst = std::max(worst, MaxRelativeError(*grads[i], CentralDifferences(*params[i], f)));
  }
  if (kind == 2) worst = std::max(worst, MaxRelativeError(g_ls, CentralDifferences(log_std, f)));
  return worst;
}

// worst relative error of the full PPO + triplet loss of a random variant
double AgentLossCheck(int trial) {
  std::mt19937_64 rng(9000 + trial);
  std::uniform_int_distribution<int> small(1, 4), variant(0, 6);
  AgentDims d;
  d.obs_dim = small(rng) + 1;
  d.action_dim = small(rng);
  d.privileged_dim = small(rng) + 1;
  d.history_len = small(rng);
  d.latent_dim = small(rng);
  d.teacher_latent_dim = small(rng);
  NetworkConfig net = testing::SmallNets();
  net.activation = trial % 2 ? Activation::kTanh : Activation::kElu;
  const VariantKind kind = static_cast<VariantKind>(variant(rng));
  Agent<double> agent = CastAgent<double>(BuildVariant(kind, d, net, rng));
  Minibatch<double> mb = testing::RandomMinibatch(d, 6, 7000 + trial);
  // rollout policy = current policy, the regime PPO evaluates the ratio in
  const PolicyOutput<double> out = Evaluate(agent, mb.obs, mb.history, mb.privileged);
  mb.old_log_probs = GaussianLogProb(out.mean, agent.log_std, mb.actions);
  PpoConfig cfg;
  cfg.clip_range = 1e6;  // no clip kink
  cfg.margin = 50.0;     // no hinge kink

  // The actor reads the encoder output through a stop-gradient, so the
  // encoder's analytic gradient omits the surrogate by design. Its oracle is
  // the total minus the surrogate; the surrogate touches the encoder nowhere
  // else.
  bool encoder_oracle = false;
  auto value = [&] {
    Tape<double> t;
    const BoundAgent<double> b = BindAgent(t, agent);
    const LossVars<double> L = AssembleLoss(t, b, mb, cfg);
    return t.Value(encoder_oracle ? t.Sub(L.total, L.surrogate) : L.total)(0, 0);
  };
  Tape<double> tape;
  const BoundAgent<double> b = BindAgent(tape, agent);
  tape.Backward(AssembleLoss(tape, b, mb, cfg).total);
  std::vector<Gradients<double>> grads;
  if (b.encoder) grads.push_back(CollectGradients(tape, *b.encoder));
  if (b.teacher) grads.push_back(CollectGradients(tape, *b.teacher));
  if (b.transition) grads.push_back(CollectGradients(tape, *b.transition));
  grads.push_back(CollectGradients(tape, b.actor));
  grads.push_back(CollectGradients(tape, b.critic));
  const MatD g_ls = tape.Grad(b.log_std);

  double worst = 0.0;
  auto nets = agent.Networks();
  for (std::size_t n = 0; n < nets.size(); ++n) {
    encoder_oracle = nets[n].first == "encoder";
    auto params = nets[n].second->Tensors();
    auto g = grads[n].Tensors();
    for (std::size_t i = 0; i < params.size(); ++i) {
      worst = std::max(worst, MaxRelativeError(*g[i], CentralDifferences(*params[i], value)));
    }
  }
  encoder_oracle = false;
  return std::max(worst, MaxRelativeError(g_ls, CentralDifferences(agent.log_std, value)));
}

Outcome AutodiffSoundness() {
  double worst = 0.0;
  int passed = 0;
  const int total = 100;
  for (int trial = 0; trial < total; ++trial) {
    // 80 bare network/loss pairs, 20 whole-agent losses
    const double err = trial < 80 ? MlpLossCheck(trial) : AgentLossCheck(trial);
    worst = std::max(worst, err);
    if (err < 1e-4) ++passed;
  }
  return {passed == total, std::to_string(passed) + "/" + std::to_string(total) +
                               " configurations, max rel err " + Fmt("%.3g", worst)};
}

// ---- 4. GAE ----

// A_t as an explicit sum of discounted TD errors, truncated at the first done
std::vector<double> GaeBySum(const std::vector<double>& r, const std::vector<double>& v,
                             const std::vector<std::uint8_t>& d, double boot,
                             double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = t; k < n; ++k) {
      const double next_v = k + 1 < n ? v[k + 1] : boot;
      const double delta = r[k] + (d[k] ? 0.0 : gamma * next_v) - v[k];
      adv[t] += std::pow(gamma * lambda, static_cast<double>(k - t)) * delta;
      if (d[k]) break;
    }
  }
  return adv;
}

Outcome GaeOracle() {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 64);
  std::bernoulli_distribution done(0.08);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n);
    for (int i = 0; i < n; ++i) {
      r[i] = normal(rng);
      v[i] = normal(rng);
      d[i] = done(rng);
    }
    const double boot = normal(rng);
    const GaeResult g = ComputeGae(r, v, d, boot, 0.99, 0.95);
    const std::vector<double> oracle = GaeBySum(r, v, d, boot, 0.99, 0.95);
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(g.advantages[i] - oracle[i]));
  }
  return {worst <= 1e-8, "1000 sequences, max abs err " + Fmt("%.3g", worst)};
}

// ---- 5. on-policy buffer ----

Outcome BufferEmptied() {
  TrainerConfig c = StopGradConfig();
  c.ppo.minibatches = 4;
  Trainer trainer(c);
  const int iterations = 5;
  bool ok = true;
  std::string why;
  for (int i = 0; i < iterations; ++i) {
    const std::uint64_t gen = trainer.buffer().generation();
    if (trainer.buffer().steps() != 0) {
      ok = false;
      why = "buffer not empty before iteration " + std::to_string(i);
    }
    trainer.Iterate();
    if (trainer.buffer().generation() != gen + 1) {
      ok = false;
      why = "iteration " + std::to_string(i) + " did not clear exactly once";
    }
    if (trainer.buffer().steps() != 0 || trainer.buffer().full()) {
      ok = false;
      why = "buffer holds data after iteration " + std::to_string(i);
    }
  }
  return {ok, ok ? std::to_string(iterations) +
                       " iterations, one clear each, empty between iterations"
                 : why};
}

// ---- 6-8. trained agents ----

struct Trained {
  std::optional<AblationResult> ablation;
  RunConfig config;
  std::string error;
};

Trained& Ablation(const fs::path& work) {
  static Trained t;
  static bool done = false;
  if (done) return t;
  done = true;
  try {
    t.config = LoadConfig(SourcePath("configs/acceptance.toml"));
    t.config.output_dir = (work / "ablation").string();
    t.config.ablate.variants = {VariantKind::kSlr, VariantKind::kSlrWithoutLatent};
    t.config.ablate.seeds = {0, 1, 2};
    std::cerr << "training " << t.config.ablate.variants.size() * 3
              << " runs of " << t.config.trainer.iterations << " iterations\n";
    t.ablation = AblateRun(t.config);
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

const AblationRun* FindRun(const AblationResult& r, VariantKind kind, std::uint64_t seed) {
  for (const AblationRun& run : r.runs) {
    if (run.variant == kind && run.seed == seed) return &run;
  }
  return nullptr;
}

RunConfig SlrRunConfig(const RunConfig& base, std::uint64_t seed) {
  RunConfig c = base;
  c.trainer.variant = VariantKind::kSlr;
  c.trainer.seed = seed;
  return c;
}

Outcome AblationDirection(const fs::path& work) {
  Trained& t = Ablation(work);
  if (!t.ablation) return {false, "ablation failed: " + t.error};
  int wins = 0, ok_seeds = 0;
  double slr_sum = 0.0, wo_sum = 0.0;
  std::string finals;
  for (std::uint64_t seed : t.config.ablate.seeds) {
    const AblationRun* a = FindRun(*t.ablation, VariantKind::kSlr, seed);
    const AblationRun* b = FindRun(*t.ablation, VariantKind::kSlrWithoutLatent, seed);
    if (!a || !b || a->status != ExitCode::kOk || b->status != ExitCode::kOk) {
      finals += " seed " + std::to_string(seed) + " failed;";
      continue;
    }
    ++ok_seeds;
    slr_sum += a->final_reward;
    wo_sum += b->final_reward;
    if (a->final_reward >= b->final_reward) ++wins;
    finals += " s" + std::to_string(seed) + " " + Fmt("%.4f", a->final_reward) + " vs " +
              Fmt("%.4f", b->final_reward) + ";";
  }
  const int n = static_cast<int>(t.config.ablate.seeds.size());
  const bool pass = ok_seeds == n && wins >= 2 && slr_sum > wo_sum;
  return {pass, "slr >= w/o-latent on " + std::to_string(wins) + "/" + std::to_string(n) +
                    " seeds, means " + Fmt("%.4f", slr_sum / std::max(ok_seeds, 1)) +
                    " vs " + Fmt("%.4f", wo_sum / std::max(ok_seeds, 1)) + ";" + finals};
}

Outcome Separability(const fs::path& work) {
  Trained& t = Ablation(work);
  if (!t.ablation) return {false, "ablation failed: " + t.error};
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : t.config.ablate.seeds) {
    const AblationRun* run = FindRun(*t.ablation, VariantKind::kSlr, seed);
    if (!run || run->status != ExitCode::kOk) {
      pass = false;
      detail += " s" + std::to_string(seed) + " no run;";
      continue;
    }
    const RunConfig c = SlrRunConfig(t.config, seed);
    const Agent<float> agent = LoadAgentFor(run->dir / "checkpoints" / "final.json", c);
    const AnalyzeResult r = AnalyzeRun(agent, c, run->dir / "traces");
    const double gap = r.summary.silhouette - r.summary.null_mean;
    if (gap < 0.2) pass = false;
    detail += " s" + std::to_string(seed) + " s=" + Fmt("%.3f", r.summary.silhouette) +
              " null=" + Fmt("%.3f", r.summary.null_mean) + ";";
  }
  return {pass, "need s >= null + 0.2 on every seed;" + detail};
}

Outcome Tracking(const fs::path& work) {
  Trained& t = Ablation(work);
  if (!t.ablation) return {false, "ablation failed: " + t.error};
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : t.config.ablate.seeds) {
    const AblationRun* run = FindRun(*t.ablation, VariantKind::kSlr, seed);
    if (!run || run->status != ExitCode::kOk) {
      pass = false;
      detail += " s" + std::to_string(seed) + " no run;";
      continue;
    }
    const RunConfig c = SlrRunConfig(t.config, seed);
    const Agent<float> trained = LoadAgentFor(run->dir / "checkpoints" / "final.json", c);
    // same config and seed, before any update
    const Agent<float> untrained = Trainer(c.trainer).agent();
    const double after = EvalRun(trained, c).aggregate.lvte;
    const double before = EvalRun(untrained, c).aggregate.lvte;
    const double ratio = after / before;
    if (!(ratio <= 0.2)) pass = false;
    detail += " s" + std::to_string(seed) + " " + Fmt("%.4f", after) + "/" +
              Fmt("%.4f", before) + "=" + Fmt("%.3f", ratio) + ";";
  }
  return {pass, "trained/untrained LVTE on [-1,1]:" + detail};
}

// ---- 9. determinism ----

Outcome Determinism(const fs::path& work) {
  const std::string config = SourcePath("configs/acceptance.toml").string();
  std::vector<std::string> metrics;
  for (const char* dir : {"determinism-a", "determinism-b"}) {
    const std::string out = (work / dir).string();
    fs::remove_all(out);
    const char* argv[] = {"slr", "train", "--config", config.c_str(), "--seed", "7",
                          "--set", "run.iterations=20", "--out", out.c_str()};
    std::ostringstream log, err;
    const int code = RunCli(10, argv, log, err);
    if (code != 0) return {false, "train exited " + std::to_string(code) + ": " + err.str()};
    metrics.push_back(ReadFile(fs::path(out) / "acceptance-7" / "metrics.csv"));
  }
  const bool same = metrics[0] == metrics[1];
  const long lines = std::count(metrics[0].begin(), metrics[0].end(), '\n');
  return {same && lines == 21,
          std::string(same ? "identical" : "different") + " metrics.csv (" +
              std::to_string(metrics[0].size()) + " bytes, " + std::to_string(lines) +
              " lines) from two train invocations"};
}

// ---- 10. golden defaults ----

Outcome GoldenConfig() {
  const RunConfig d;
  const PpoConfig& p = d.trainer.ppo;
  const AgentDims& a = d.trainer.dims;
  std::vector<std::string> bad;
  auto check = [&](const char* name, double got, double want) {
    if (got != want) bad.push_back(std::string(name) + "=" + Fmt("%.17g", got));
  };
  check("clip", p.clip_range, 0.2);
  check("entropy", p.entropy_coef, 0.01);
  check("gamma", p.gamma, 0.99);
  check("lambda", p.lambda, 0.95);
  check("desired_kl", p.desired_kl, 0.01);
  check("lr", p.learning_rate, 1e-3);
  check("eps", p.adam_eps, 1e-8);
  check("alpha", p.triplet_coef, 1.0);
  check("margin", p.margin, 1.0);
  check("H", a.history_len, 10);
  check("latent", a.latent_dim, 20);

  // the shipped file is the resolved default, and reads back to it
  const fs::path file = SourcePath("configs/default.toml");
  std::string text = ReadFile(file);
  while (!text.empty() && text[0] == '#') text.erase(0, text.find('\n') + 1);
  while (!text.empty() && text[0] == '\n') text.erase(0, 1);
  const bool golden = text == ConfigText(d);
  const bool loads = LoadConfig(file) == d;
  if (!golden) bad.push_back("configs/default.toml differs from resolved defaults");
  if (!loads) bad.push_back("configs/default.toml does not load to the defaults");
  std::string detail = bad.empty() ? "11 hyperparameters and configs/default.toml match"
                                   : "mismatch:";
  for (const std::string& b : bad) detail += " " + b;
  return {bad.empty(), detail};
}

}  // namespace
}  // namespace slr

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  if (argc < 2) {
    std::cerr << "usage: acceptance <work_dir> [--only=N,M,...]\n";
    return 2;
  }
  const fs::path work = argv[1];
  fs::create_directories(work);
  std::set<int> only;
  for (int i = 2; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--only=", 0) != 0) {
      std::cerr << "unknown argument " << arg << "\n";
      return 2;
    }
    std::stringstream list(arg.substr(7));
    for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
  }

  using Check = std::function<slr::Outcome()>;
  const std::vector<std::pair<const char*, Check>> checks = {
      {"triplet loss exactness", slr::TripletExactness},
      {"stop-gradient contract", slr::StopGradient},
      {"autodiff soundness", slr::AutodiffSoundness},
      {"GAE oracle equivalence", slr::GaeOracle},
      {"on-policy buffer", slr::BufferEmptied},
      {"ablation direction", [&] { return slr::AblationDirection(work); }},
      {"latent separability", [&] { return slr::Separability(work); }},
      {"tracking improvement", [&] { return slr::Tracking(work); }},
      {"determinism", [&] { return slr::Determinism(work); }},
      {"golden default config", slr::GoldenConfig},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    slr::Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] "
              << checks[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
