#ifndef SLR_TENSOR_ADAM_H_
#define SLR_TENSOR_ADAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slr/tensor/matrix.h"
#include "slr/tensor/mlp.h"

namespace slr {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moments shaped like the tensors they track.
template <typename S>
struct AdamState {
  std::vector<Mat<S>> m;
  std::vector<Mat<S>> v;
  std::int64_t step_count = 0;
  AdamConfig config;

  AdamState() = default;
  explicit AdamState(const ParamSet<S>& params, AdamConfig config = {});
  // single free tensor such as a policy log-std row
  explicit AdamState(const Mat<S>& tensor, AdamConfig config = {});
};

// Bias-corrected Adam step over parallel lists of tensors. Throws NumericError
// naming `label` and the tensor if a gradient is not finite; nothing is
// modified in that case.
template <typename S>
void AdamStep(std::span<Mat<S>* const> params,
              std::span<const Mat<S>* const> grads,
              std::span<const std::string> names, AdamState<S>& state,
              double lr, const std::string& label);

template <typename S>
void AdamStep(ParamSet<S>& params, const Gradients<S>& grads,
              AdamState<S>& state, double lr, const std::string& label = "");

template <typename S>
void AdamStep(Mat<S>& tensor, const Mat<S>& grad, AdamState<S>& state,
              double lr, const std::string& label = "");

// Global L2 norm over every listed tensor.
template <typename S>
double GlobalNorm(std::span<const Mat<S>* const> grads);

// Rescale so the global norm is at most max_norm. Returns the norm before
// clipping.
template <typename S>
double ClipGlobalNorm(std::span<Mat<S>* const> grads, double max_norm);

}  // namespace slr

#endif  // SLR_TENSOR_ADAM_H_
