#ifndef SLR_MODEL_LOSSES_H_
#define SLR_MODEL_LOSSES_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "slr/tensor/tape.h"

namespace slr {

// max(|a - p|^2 - |a - n|^2 + margin, 0) for one triple. Throws
// DimensionError on length mismatch.
double TripletLoss(std::span<const double> anchor,
                   std::span<const double> positive,
                   std::span<const double> negative, double margin);

// Batched hinge, one triple per row, averaged over the rows whose `mask`
// entry is 1 (all rows when mask is invalid). The subgradient at the kink is
// 0. A batch with no active row gives 0.
template <typename S>
Var TripletLoss(Tape<S>& tape, Var anchor, Var positive, Var negative,
                S margin, Var mask = {});

// mean squared error between an estimate and its target
double ExplicitEstimatorLoss(std::span<const double> estimate,
                             std::span<const double> target);

template <typename S>
Var ExplicitEstimatorLoss(Tape<S>& tape, Var estimate, Var target);

// Uniform draw from {0, ..., num_slots - 1} without `excluded`. Throws
// std::invalid_argument when fewer than two slots (or, with nothing
// excluded, none) are available.
std::size_t SampleNegativeSlot(std::size_t num_slots,
                               std::optional<std::size_t> excluded,
                               std::mt19937_64& rng);

// Uniform draw from `candidates` without the entry equal to `excluded`.
std::size_t SampleNegative(std::span<const std::size_t> candidates,
                           std::size_t excluded, std::mt19937_64& rng);

}  // namespace slr

#endif  // SLR_MODEL_LOSSES_H_
