#include "slr/model/losses.h"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace slr {

namespace {

void SameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

double TripletLoss(std::span<const double> anchor,
                   std::span<const double> positive,
                   std::span<const double> negative, double margin) {
  SameLength(anchor.size(), positive.size(), "triplet loss");
  SameLength(anchor.size(), negative.size(), "triplet loss");
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    pos += (anchor[i] - positive[i]) * (anchor[i] - positive[i]);
    neg += (anchor[i] - negative[i]) * (anchor[i] - negative[i]);
  }
  return std::max(pos - neg + margin, 0.0);
}

template <typename S>
Var TripletLoss(Tape<S>& tape, Var anchor, Var positive, Var negative,
                S margin, Var mask) {
  const auto& a = tape.Value(anchor);
  const auto& p = tape.Value(positive);
  const auto& n = tape.Value(negative);
  if (a.rows() != p.rows() || a.cols() != p.cols() || a.rows() != n.rows() ||
      a.cols() != n.cols()) {
    throw DimensionError("triplet loss: anchor " +
                         ShapeString(a.rows(), a.cols()) + ", positive " +
                         ShapeString(p.rows(), p.cols()) + ", negative " +
                         ShapeString(n.rows(), n.cols()));
  }
  // a, p, n point into the tape's node storage, which the ops below can grow
  const Eigen::Index rows = a.rows();
  Var d_pos = tape.RowSum(tape.Square(tape.Sub(anchor, positive)));
  Var d_neg = tape.RowSum(tape.Square(tape.Sub(anchor, negative)));
  Var hinge = tape.Relu(tape.AddScalar(tape.Sub(d_pos, d_neg), margin));
  double count = static_cast<double>(rows);
  if (mask.valid()) {
    const auto& m = tape.Value(mask);
    if (m.rows() != rows || m.cols() != 1) {
      throw DimensionError("triplet loss: mask must be " + ShapeString(rows, 1));
    }
    hinge = tape.Mul(hinge, mask);
    count = static_cast<double>(m.sum());
  }
  return tape.Scale(tape.Sum(hinge), S(1.0 / std::max(count, 1.0)));
}

double ExplicitEstimatorLoss(std::span<const double> estimate,
                             std::span<const double> target) {
  SameLength(estimate.size(), target.size(), "estimator loss");
  if (estimate.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    s += (estimate[i] - target[i]) * (estimate[i] - target[i]);
  }
  return s / static_cast<double>(estimate.size());
}

template <typename S>
Var ExplicitEstimatorLoss(Tape<S>& tape, Var estimate, Var target) {
  const auto& e = tape.Value(estimate);
  const auto& t = tape.Value(target);
  if (e.rows() != t.rows() || e.cols() != t.cols()) {
    throw DimensionError("estimator loss: estimate " +
                         ShapeString(e.rows(), e.cols()) + " vs target " +
                         ShapeString(t.rows(), t.cols()));
  }
  return tape.Mean(tape.Square(tape.Sub(estimate, target)));
}

std::size_t SampleNegativeSlot(std::size_t num_slots,
                               std::optional<std::size_t> excluded,
                               std::mt19937_64& rng) {
  const bool skip = excluded && *excluded < num_slots;
  const std::size_t eligible = skip ? num_slots - 1 : num_slots;
  if (num_slots < 2 || eligible < 1) {
    throw std::invalid_argument("negative sampling: need at least 2 slots, got " +
                                std::to_string(num_slots));
  }
  std::size_t k =
      std::uniform_int_distribution<std::size_t>(0, eligible - 1)(rng);
  if (skip && k >= *excluded) ++k;
  return k;
}

std::size_t SampleNegative(std::span<const std::size_t> candidates,
                           std::size_t excluded, std::mt19937_64& rng) {
  const auto it = std::find(candidates.begin(), candidates.end(), excluded);
  std::optional<std::size_t> skip;
  if (it != candidates.end()) {
    skip = static_cast<std::size_t>(it - candidates.begin());
  }
  return candidates[SampleNegativeSlot(candidates.size(), skip, rng)];
}

template Var TripletLoss(Tape<float>&, Var, Var, Var, float, Var);
template Var TripletLoss(Tape<double>&, Var, Var, Var, double, Var);
template Var ExplicitEstimatorLoss(Tape<float>&, Var, Var);
template Var ExplicitEstimatorLoss(Tape<double>&, Var, Var);

}  // namespace slr
