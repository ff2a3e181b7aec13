#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "slr/model/agent.h"
#include "slr/model/history.h"
#include "slr/model/losses.h"
#include "support/fixtures.h"
#include "support/gradcheck.h"

namespace slr {
namespace {

using testing::CentralDifferences;
using testing::MaxRelativeError;
using testing::Random;
using testing::SmallDims;
using testing::SmallNets;

void ZeroWeights(ParamSet<float>& p, float bias_value) {
  for (int l = 0; l < p.num_layers(); ++l) {
    p.weight(l).setZero();
    p.bias(l).setConstant(bias_value);
  }
}

// --- history ---

TEST(History, FlattenedLengthAndOldestFirstOrder) {
  HistoryBuffer h(2, 3, 2);
  EXPECT_EQ(h.flat().cols(), 6);
  const std::vector<float> a{1, 2}, b{3, 4}, c{5, 6}, d{7, 8};
  h.Push(0, a);
  h.Push(0, b);
  h.Push(0, c);
  h.Push(0, d);
  const MatF row = h.flat().row(0);
  EXPECT_EQ(row, (MatF(1, 6) << 3, 4, 5, 6, 7, 8).finished());
  EXPECT_TRUE(h.flat().row(1).isZero(0.0));
}

TEST(History, YoungEpisodesHaveExactlyZeroLeadingSlots) {
  const int H = 10, D = 11;
  HistoryBuffer h(1, H, D);
  std::mt19937_64 rng(1);
  for (int t = 0; t < H - 1; ++t) {
    MatF frame = Random<float>(1, D, rng).array() + 5.0f;  // never zero
    h.Push(0, std::span<const float>(frame.data(), D));
    const int filled = t + 1;
    for (int k = 0; k < (H - filled) * D; ++k) ASSERT_EQ(h.flat()(0, k), 0.0f);
    for (int k = (H - filled) * D; k < H * D; ++k) ASSERT_NE(h.flat()(0, k), 0.0f);
  }
  h.Clear(0);
  EXPECT_TRUE(h.flat().isZero(0.0));
}

TEST(History, RejectsWrongFrameWidth) {
  HistoryBuffer h(1, 2, 3);
  const std::vector<float> bad{1, 2};
  EXPECT_THROW(h.Push(0, bad), DimensionError);
}

// --- networks and wiring ---

TEST(Agent, PaperShapesForSlr) {
  std::mt19937_64 rng(2);
  const AgentDims d;
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, NetworkConfig{}, rng);
  ASSERT_TRUE(a.encoder && a.transition);
  EXPECT_EQ(a.encoder->layer_sizes(), (std::vector<int>{110, 256, 128, 20}));
  EXPECT_EQ(a.actor.layer_sizes(), (std::vector<int>{31, 512, 256, 128, 2}));
  EXPECT_EQ(a.critic.layer_sizes(), (std::vector<int>{31, 512, 256, 128, 1}));
  EXPECT_EQ(a.transition->layer_sizes(), (std::vector<int>{22, 256, 128, 20}));
  EXPECT_FALSE(a.teacher);
  EXPECT_EQ(a.log_std, MatF::Zero(1, 2));
}

TEST(Agent, ZeroEncoderOutputsItsBias) {
  std::mt19937_64 rng(3);
  const AgentDims d = SmallDims();
  Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  ZeroWeights(*a.encoder, 0.0f);
  a.encoder->bias(a.encoder->num_layers() - 1) = Random<float>(1, d.latent_dim, rng);
  const MatF hist = Random<float>(4, d.history_dim(), rng);
  const auto out = Evaluate(a, Random<float>(4, d.obs_dim, rng), hist,
                            MatF(4, d.privileged_dim));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out.encoded.row(i), a.encoder->bias(a.encoder->num_layers() - 1));
  }
}

TEST(Agent, EncoderOutputHasLatentWidthAndIsDeterministic) {
  std::mt19937_64 rng(4);
  const AgentDims d;
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  const MatF hist = Random<float>(3, d.history_dim(), rng);
  const MatF obs = Random<float>(3, d.obs_dim, rng);
  const auto first = Evaluate(a, obs, hist, MatF(3, 10));
  const auto second = Evaluate(a, obs, hist, MatF(3, 10));
  EXPECT_EQ(first.encoded.cols(), 20);
  EXPECT_EQ(first.encoded, second.encoded);
  EXPECT_EQ(first.mean, second.mean);
}

TEST(Agent, EncoderRejectsWrongHistoryWidth) {
  std::mt19937_64 rng(5);
  const AgentDims d = SmallDims();
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  EXPECT_THROW(Evaluate(a, MatF(1, d.obs_dim), MatF(1, d.history_dim() + 1),
                        MatF(1, d.privileged_dim)),
               DimensionError);
}

TEST(Agent, ZeroActorMeanIsBiasWhateverTheLatent) {
  std::mt19937_64 rng(6);
  const AgentDims d = SmallDims();
  Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  ZeroWeights(a.actor, 0.0f);
  a.actor.bias(a.actor.num_layers() - 1) << 0.25f, -0.5f;
  for (int trial = 0; trial < 5; ++trial) {
    const auto out = Evaluate(a, Random<float>(2, d.obs_dim, rng),
                              Random<float>(2, d.history_dim(), rng),
                              MatF(2, d.privileged_dim));
    EXPECT_EQ(out.mean.row(0), a.actor.bias(a.actor.num_layers() - 1));
    EXPECT_EQ(out.mean.row(1), a.actor.bias(a.actor.num_layers() - 1));
  }
}

TEST(Agent, ZeroCriticAndTransitionOutputTheirBias) {
  std::mt19937_64 rng(7);
  const AgentDims d = SmallDims();
  Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  ZeroWeights(a.critic, 0.75f);
  ZeroWeights(*a.transition, -0.125f);
  const auto out = Evaluate(a, Random<float>(3, d.obs_dim, rng),
                            Random<float>(3, d.history_dim(), rng),
                            MatF(3, d.privileged_dim));
  EXPECT_TRUE((out.value.array() == 0.75f).all());

  Tape<float> tape;
  const BoundAgent<float> b = BindAgent(tape, a);
  Var z = tape.Constant(Random<float>(3, d.latent_dim, rng));
  Var act = tape.Constant(Random<float>(3, d.action_dim, rng));
  const MatF& pred = tape.Value(PredictNextLatent(tape, b, z, act));
  EXPECT_EQ(pred.cols(), d.latent_dim);
  EXPECT_TRUE((pred.array() == -0.125f).all());
}

TEST(Agent, ActorLossGivesEncoderExactlyZeroGradient) {
  std::mt19937_64 rng(8);
  const AgentDims d = SmallDims();
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  Tape<float> tape;
  const BoundAgent<float> b = BindAgent(tape, a);
  Var obs = tape.Constant(Random<float>(6, d.obs_dim, rng));
  Var hist = tape.Constant(Random<float>(6, d.history_dim(), rng));
  Var z = Encode(tape, b, hist);
  Var mean = PolicyMean(tape, b, obs, z, Var{});
  Var act = tape.Constant(Random<float>(6, d.action_dim, rng));
  tape.Backward(tape.Mean(GaussianLogProb(tape, mean, b.log_std, act)));
  const Gradients<float> g = CollectGradients(tape, *b.encoder);
  for (const MatF* t : g.Tensors()) EXPECT_TRUE(t->isZero(0.0));
  const Gradients<float> ga = CollectGradients(tape, b.actor);
  EXPECT_GT(ga.weight(0).norm(), 0.0f);
}

TEST(Agent, ValueLossReachesEncoder) {
  std::mt19937_64 rng(9);
  const AgentDims d = SmallDims();
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  Tape<float> tape;
  const BoundAgent<float> b = BindAgent(tape, a);
  Var obs = tape.Constant(Random<float>(6, d.obs_dim, rng));
  Var z = Encode(tape, b, tape.Constant(Random<float>(6, d.history_dim(), rng)));
  Var v = ValueForward(tape, b, obs, z, Var{});
  tape.Backward(tape.Mean(tape.Square(v)));
  const Gradients<float> g = CollectGradients(tape, *b.encoder);
  EXPECT_GT(g.weight(0).norm(), 0.0f);
}

TEST(Agent, TransitionLossReachesEncoder) {
  std::mt19937_64 rng(10);
  const AgentDims d = SmallDims();
  const Agent<float> a = BuildVariant(VariantKind::kSlr, d, SmallNets(), rng);
  Tape<float> tape;
  const BoundAgent<float> b = BindAgent(tape, a);
  Var z = Encode(tape, b, tape.Constant(Random<float>(6, d.history_dim(), rng)));
  Var pred = PredictNextLatent(tape, b, z,
                               tape.Constant(Random<float>(6, d.action_dim, rng)));
  tape.Backward(tape.Sum(tape.Square(pred)));
  EXPECT_GT(CollectGradients(tape, *b.encoder).weight(0).norm(), 0.0f);
}

TEST(Agent, LogProbAtTheMeanMatchesDensityOracle) {
  std::mt19937_64 rng(11);
  const MatD mean = Random<double>(4, 3, rng);
  const MatD log_std = Random<double>(1, 3, rng) * 0.3;
  const MatD lp = GaussianLogProb(mean, log_std, mean);
  const double oracle = -log_std.sum() - 1.5 * std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(lp(i, 0), oracle, 1e-12);

  Tape<double> tape;
  Var m = tape.Constant(mean);
  Var act = tape.Constant(mean);
  Var ls = tape.Constant(log_std);
  const MatD& taped = tape.Value(GaussianLogProb(tape, m, ls, act));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(taped(i, 0), oracle, 1e-12);
}

TEST(Agent, LogProbAwayFromMeanMatchesProductOfDensities) {
  std::mt19937_64 rng(12);
  const MatD mean = Random<double>(5, 2, rng);
  const MatD log_std = Random<double>(1, 2, rng) * 0.3;
  const MatD act = Random<double>(5, 2, rng);
  const MatD lp = GaussianLogProb(mean, log_std, act);
  for (int i = 0; i < 5; ++i) {
    double density = 1.0;
    for (int j = 0; j < 2; ++j) {
      const double s = std::exp(log_std(0, j));
      const double z = (act(i, j) - mean(i, j)) / s;
      density *= std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    }
    EXPECT_NEAR(lp(i, 0), std::log(density), 1e-10);
  }
}

TEST(Agent, KlOfIdenticalPoliciesIsZeroAndPositiveOtherwise) {
  std::mt19937_64 rng(13);
  const MatD mean = Random<double>(5, 2, rng);
  const MatD log_std = Random<double>(1, 2, rng);
  EXPECT_EQ(MeanGaussianKl(mean, log_std, mean, log_std), 0.0);
  const MatD shifted = mean.array() + 0.1;
  // equal stds: KL = dm^2 / (2 s^2) per dim
  double oracle = 0.0;
  for (int j = 0; j < 2; ++j) oracle += 0.01 / (2.0 * std::exp(2.0 * log_std(0, j)));
  EXPECT_NEAR(MeanGaussianKl(mean, log_std, shifted, log_std), oracle, 1e-12);
}

TEST(Agent, ValueLossGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  const AgentDims d = SmallDims();  // obs_dim 3
  const Agent<double> a = CastAgent<double>(
      BuildVariant(VariantKind::kSlr, d, SmallNets(), rng));
  const MatD obs = Random<double>(4, d.obs_dim, rng);
  const MatD hist = Random<double>(4, d.history_dim(), rng);
  const MatD target = Random<double>(4, 1, rng);

  Tape<double> tape;
  const BoundAgent<double> b = BindAgent(tape, a);
  Var z = Encode(tape, b, tape.Constant(hist));
  Var v = ValueForward(tape, b, tape.Constant(obs), z, Var{});
  tape.Backward(tape.Mean(tape.Square(tape.Sub(v, tape.Constant(target)))));
  const Gradients<double> g_enc = CollectGradients(tape, *b.encoder);
  const Gradients<double> g_critic = CollectGradients(tape, b.critic);

  Agent<double> probe = a;
  auto loss = [&]() {
    const auto out = Evaluate(probe, obs, hist, MatD(4, d.privileged_dim));
    return (out.value - target).squaredNorm() / 4.0;
  };
  auto enc_tensors = probe.encoder->Tensors();
  auto enc_grads = g_enc.Tensors();
  for (std::size_t i = 0; i < enc_tensors.size(); ++i) {
    const MatD fd = CentralDifferences(*enc_tensors[i], loss, 1e-5);
    EXPECT_LT(MaxRelativeError(*enc_grads[i], fd), 1e-4) << "encoder " << i;
  }
  auto critic_tensors = probe.critic.Tensors();
  auto critic_grads = g_critic.Tensors();
  for (std::size_t i = 0; i < critic_tensors.size(); ++i) {
    const MatD fd = CentralDifferences(*critic_tensors[i], loss, 1e-5);
    EXPECT_LT(MaxRelativeError(*critic_grads[i], fd), 1e-4) << "critic " << i;
  }
}

TEST(Agent, CheckpointRoundTripKeepsEveryNetwork) {
  std::mt19937_64 rng(15);
  const AgentDims d = SmallDims();
  for (VariantKind kind : AllVariants()) {
    const Agent<float> a = BuildVariant(kind, d, SmallNets(), rng);
    const Agent<float> back = AgentFromCheckpoint(AgentToCheckpoint(a));
    EXPECT_EQ(back.wiring, a.wiring);
    EXPECT_EQ(back.Networks().size(), a.Networks().size());
    EXPECT_EQ(back.actor, a.actor);
    EXPECT_EQ(back.critic, a.critic);
    EXPECT_EQ(back.encoder.has_value(), a.encoder.has_value());
    if (a.encoder) EXPECT_EQ(*back.encoder, *a.encoder);
    EXPECT_EQ(back.log_std, a.log_std);
  }
}

TEST(Agent, CheckpointMissingNetworkIsReported) {
  std::mt19937_64 rng(16);
  const Agent<float> a = BuildVariant(VariantKind::kSlr, SmallDims(), SmallNets(), rng);
  Checkpoint c = AgentToCheckpoint(a);
  c.networks.erase(c.networks.begin());  // encoder
  try {
    AgentFromCheckpoint(c);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("encoder"), std::string::npos);
  }
}

// --- triplet loss ---

TEST(TripletLoss, DirectEvaluations) {
  const std::vector<double> origin{0, 0};
  EXPECT_NEAR(TripletLoss(origin, origin, std::vector<double>{2, 0}, 1.0), 0.0, 1e-9);
  EXPECT_NEAR(TripletLoss(origin, std::vector<double>{1, 0},
                          std::vector<double>{1, 0}, 1.0),
              1.0, 1e-9);
  EXPECT_NEAR(TripletLoss(origin, std::vector<double>{1, 1},
                          std::vector<double>{1, 0}, 1.0),
              2.0, 1e-9);
}

TEST(TripletLoss, LengthMismatchIsAnError) {
  EXPECT_THROW(TripletLoss(std::vector<double>{0, 0}, std::vector<double>{0},
                           std::vector<double>{0, 0}, 1.0),
               DimensionError);
}

TEST(TripletLoss, BatchedMatchesScalarAndMaskDropsRows) {
  std::mt19937_64 rng(17);
  const MatD a = Random<double>(6, 4, rng);
  const MatD p = Random<double>(6, 4, rng);
  const MatD n = Random<double>(6, 4, rng);
  MatD mask(6, 1);
  mask << 1, 0, 1, 1, 0, 1;
  double sum = 0.0, masked = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto row = [](const MatD& m, int r) {
      return std::vector<double>(m.row(r).data(), m.row(r).data() + 4);
    };
    const double l = TripletLoss(row(a, i), row(p, i), row(n, i), 1.0);
    sum += l;
    masked += mask(i, 0) * l;
  }
  Tape<double> tape;
  Var va = tape.Constant(a), vp = tape.Constant(p), vn = tape.Constant(n);
  EXPECT_NEAR(tape.Value(TripletLoss(tape, va, vp, vn, 1.0))(0, 0), sum / 6, 1e-12);
  EXPECT_NEAR(tape.Value(TripletLoss(tape, va, vp, vn, 1.0, tape.Constant(mask)))(0, 0),
              masked / 4, 1e-12);
}

TEST(TripletLoss, ActiveHingeGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    MatD a = Random<double>(1, 5, rng);
    MatD p = a + 0.5 * Random<double>(1, 5, rng);
    MatD n = a + 0.5 * Random<double>(1, 5, rng);
    Tape<double> tape;
    Var va = tape.Leaf(a), vp = tape.Leaf(p), vn = tape.Leaf(n);
    Var loss = TripletLoss(tape, va, vp, vn, 1.0);
    if (tape.Value(loss)(0, 0) < 0.05) continue;  // stay off the kink
    tape.Backward(loss);
    auto f = [&]() {
      return TripletLoss(std::vector<double>(a.data(), a.data() + 5),
                         std::vector<double>(p.data(), p.data() + 5),
                         std::vector<double>(n.data(), n.data() + 5), 1.0);
    };
    EXPECT_LT(MaxRelativeError(tape.Grad(va), CentralDifferences(a, f, 1e-6)), 1e-5);
    EXPECT_LT(MaxRelativeError(tape.Grad(vp), CentralDifferences(p, f, 1e-6)), 1e-5);
    EXPECT_LT(MaxRelativeError(tape.Grad(vn), CentralDifferences(n, f, 1e-6)), 1e-5);
  }
}

TEST(TripletLoss, InactiveHingeHasZeroGradient) {
  Tape<double> tape;
  Var a = tape.Leaf(MatD::Zero(1, 2));
  Var p = tape.Leaf(MatD::Zero(1, 2));
  Var n = tape.Leaf((MatD(1, 2) << 3, 0).finished());
  tape.Backward(TripletLoss(tape, a, p, n, 1.0));
  EXPECT_TRUE(tape.Grad(a).isZero(0.0));
  EXPECT_TRUE(tape.Grad(n).isZero(0.0));
}

TEST(TripletLossProperty, NonNegativeZeroWhenNegativeFarAndRotationInvariant) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 500; ++trial) {
    const MatD a = Random<double>(1, 2, rng);
    const MatD p = Random<double>(1, 2, rng);
    const MatD n = Random<double>(1, 2, rng);
    auto vec = [](const MatD& m) { return std::vector<double>{m(0, 0), m(0, 1)}; };
    const double l = TripletLoss(vec(a), vec(p), vec(n), 1.0);
    EXPECT_GE(l, 0.0);
    if ((a - n).squaredNorm() >= (a - p).squaredNorm() + 1.0) EXPECT_EQ(l, 0.0);
    const double t = angle(rng);
    MatD rot(2, 2);
    rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const double lr = TripletLoss(vec(a * rot), vec(p * rot), vec(n * rot), 1.0);
    EXPECT_NEAR(lr, l, 1e-9);
  }
}

// --- negative sampling ---

TEST(NegativeSampling, TwoEntryBufferForcesTheOther) {
  std::mt19937_64 rng(20);
  const std::vector<std::size_t> slots{6, 10};  // t+1 and t+5 for t = 5
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleNegative(slots, 6, rng), 10u);
}

TEST(NegativeSampling, ExcludedSlotNeverDrawn) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10000; ++i) EXPECT_NE(SampleNegativeSlot(24, 7, rng), 7u);
}

TEST(NegativeSampling, EligibleSlotsAreUniform) {
  std::mt19937_64 rng(22);
  const std::size_t slots = 24, excluded = 11;
  const int draws = 23000;
  std::vector<int> counts(slots, 0);
  for (int i = 0; i < draws; ++i) ++counts[SampleNegativeSlot(slots, excluded, rng)];
  EXPECT_EQ(counts[excluded], 0);
  const double expected = static_cast<double>(draws) / (slots - 1);
  double chi2 = 0.0;
  for (std::size_t k = 0; k < slots; ++k) {
    if (k == excluded) continue;
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(slots - 2));
  const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
  EXPECT_GT(p_value, 0.01) << "chi2 = " << chi2;
}

TEST(NegativeSampling, TooSmallBufferIsAnError) {
  std::mt19937_64 rng(23);
  EXPECT_THROW(SampleNegativeSlot(1, std::nullopt, rng), std::invalid_argument);
  EXPECT_THROW(SampleNegativeSlot(1, 0, rng), std::invalid_argument);
  const std::vector<std::size_t> one{4};
  EXPECT_THROW(SampleNegative(one, 4, rng), std::invalid_argument);
}

}  // namespace
}  // namespace slr
