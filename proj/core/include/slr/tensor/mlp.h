#ifndef SLR_TENSOR_MLP_H_
#define SLR_TENSOR_MLP_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "slr/tensor/matrix.h"
#include "slr/tensor/tape.h"

namespace slr {

enum class Activation { kElu, kTanh, kIdentity };

std::string_view ActivationName(Activation a);
// throws std::invalid_argument on unknown names
Activation ParseActivation(std::string_view name);

// Weights and biases of a fully connected network. Hidden layers use
// `activation`; the last layer is always linear.
template <typename S>
class ParamSet {
 public:
  using Matrix = Mat<S>;

  ParamSet() = default;
  // zero-initialized; layer_sizes = {in, hidden..., out}
  ParamSet(std::vector<int> layer_sizes, Activation activation);

  // Orthogonal rows/columns scaled by `hidden_gain` for hidden layers and
  // `output_gain` for the last layer. Biases are zero.
  void InitOrthogonal(std::mt19937_64& rng, double hidden_gain,
                      double output_gain);

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation activation() const { return activation_; }

  // [out x in]
  Matrix& weight(int layer) { return weights_[layer]; }
  const Matrix& weight(int layer) const { return weights_[layer]; }
  // [1 x out]
  Matrix& bias(int layer) { return biases_[layer]; }
  const Matrix& bias(int layer) const { return biases_[layer]; }

  // weight0, bias0, weight1, ... in that order
  std::vector<Matrix*> Tensors();
  std::vector<const Matrix*> Tensors() const;
  static std::string TensorName(int index);

  std::size_t NumParams() const;
  bool AllFinite() const;
  // same layout, all zeros; used as the gradient container
  ParamSet ZerosLike() const;

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<int> layer_sizes_;
  Activation activation_ = Activation::kElu;
  std::vector<Matrix> weights_;
  std::vector<Matrix> biases_;
};

template <typename S>
using Gradients = ParamSet<S>;

// ParamSet tensors recorded as tape leaves. Bind once per tape, then use for
// every forward pass through that network on the tape.
template <typename S>
struct BoundParams {
  const ParamSet<S>* params = nullptr;
  std::vector<Var> weights;
  std::vector<Var> biases;
};

template <typename S>
BoundParams<S> Bind(Tape<S>& tape, const ParamSet<S>& params);

// Recorded forward pass: input [batch x in] -> [batch x out].
template <typename S>
Var MlpForward(Tape<S>& tape, const BoundParams<S>& bound, Var input);

// Tape-free forward pass.
template <typename S>
Mat<S> MlpForward(const ParamSet<S>& params, const Mat<S>& input);

// Gradients of the last Backward() for the bound network. Parameters the loss
// never reached come back as exact zeros.
template <typename S>
Gradients<S> CollectGradients(const Tape<S>& tape, const BoundParams<S>& bound);

extern template class ParamSet<float>;
extern template class ParamSet<double>;

// float <-> double copies, used by gradient checks
template <typename To, typename From>
ParamSet<To> CastParams(const ParamSet<From>& from);

}  // namespace slr

#endif  // SLR_TENSOR_MLP_H_
