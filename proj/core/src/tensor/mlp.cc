#include "slr/tensor/mlp.h"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace slr {

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kElu:
      return "elu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

Activation ParseActivation(std::string_view name) {
  if (name == "elu") return Activation::kElu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

template <typename S>
ParamSet<S>::ParamSet(std::vector<int> layer_sizes, Activation activation)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
  if (layer_sizes_.size() < 2) {
    throw DimensionError("ParamSet needs at least input and output sizes");
  }
  for (std::size_t i = 0; i < layer_sizes_.size(); ++i) {
    if (layer_sizes_[i] <= 0) {
      throw DimensionError("ParamSet layer size " + std::to_string(i) +
                           " must be positive");
    }
  }
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    weights_.push_back(Matrix::Zero(layer_sizes_[i + 1], layer_sizes_[i]));
    biases_.push_back(Matrix::Zero(1, layer_sizes_[i + 1]));
  }
}

namespace {

// rows x cols matrix with orthonormal rows (rows <= cols) or columns
Eigen::MatrixXd Orthogonal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  const int n = tall ? rows : cols;
  const int k = tall ? cols : rows;
  Eigen::MatrixXd g(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  // sign fix makes the distribution uniform (Haar)
  Eigen::MatrixXd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (tall) return q;
  return q.transpose();
}

}  // namespace

template <typename S>
void ParamSet<S>::InitOrthogonal(std::mt19937_64& rng, double hidden_gain,
                                 double output_gain) {
  for (int l = 0; l < num_layers(); ++l) {
    const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    Eigen::MatrixXd q = Orthogonal(static_cast<int>(weights_[l].rows()),
                                   static_cast<int>(weights_[l].cols()), rng);
    weights_[l] = (q * gain).template cast<S>();
    biases_[l].setZero();
  }
}

template <typename S>
std::vector<typename ParamSet<S>::Matrix*> ParamSet<S>::Tensors() {
  std::vector<Matrix*> out;
  for (int l = 0; l < num_layers(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

template <typename S>
std::vector<const typename ParamSet<S>::Matrix*> ParamSet<S>::Tensors() const {
  std::vector<const Matrix*> out;
  for (int l = 0; l < num_layers(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

template <typename S>
std::string ParamSet<S>::TensorName(int index) {
  return "layer " + std::to_string(index / 2) +
         (index % 2 == 0 ? " weight" : " bias");
}

template <typename S>
std::size_t ParamSet<S>::NumParams() const {
  std::size_t n = 0;
  for (const Matrix* t : Tensors()) n += static_cast<std::size_t>(t->size());
  return n;
}

template <typename S>
bool ParamSet<S>::AllFinite() const {
  for (const Matrix* t : Tensors()) {
    if (!t->allFinite()) return false;
  }
  return true;
}

template <typename S>
ParamSet<S> ParamSet<S>::ZerosLike() const {
  return ParamSet(layer_sizes_, activation_);
}

template <typename S>
bool ParamSet<S>::operator==(const ParamSet& other) const {
  if (layer_sizes_ != other.layer_sizes_ || activation_ != other.activation_) {
    return false;
  }
  for (int l = 0; l < num_layers(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) {
      return false;
    }
  }
  return true;
}

template <typename S>
BoundParams<S> Bind(Tape<S>& tape, const ParamSet<S>& params) {
  BoundParams<S> bound;
  bound.params = &params;
  for (int l = 0; l < params.num_layers(); ++l) {
    bound.weights.push_back(tape.Leaf(params.weight(l)));
    bound.biases.push_back(tape.Leaf(params.bias(l)));
  }
  return bound;
}

namespace {

template <typename S>
void CheckInput(const ParamSet<S>& params, Eigen::Index cols) {
  if (params.num_layers() == 0) {
    throw DimensionError("mlp: network has no layers");
  }
  if (cols != params.input_dim()) {
    throw DimensionError("mlp: layer 0 expects input width " +
                         std::to_string(params.input_dim()) + ", got " +
                         std::to_string(cols));
  }
}

template <typename S>
Var Activate(Tape<S>& tape, Activation a, Var x) {
  switch (a) {
    case Activation::kElu:
      return tape.Elu(x);
    case Activation::kTanh:
      return tape.Tanh(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

}  // namespace

template <typename S>
Var MlpForward(Tape<S>& tape, const BoundParams<S>& bound, Var input) {
  const ParamSet<S>& params = *bound.params;
  CheckInput(params, tape.Value(input).cols());
  Var h = input;
  for (int l = 0; l < params.num_layers(); ++l) {
    h = tape.Add(tape.MatMulT(h, bound.weights[l]), bound.biases[l]);
    if (l + 1 < params.num_layers()) h = Activate(tape, params.activation(), h);
  }
  return h;
}

template <typename S>
Mat<S> MlpForward(const ParamSet<S>& params, const Mat<S>& input) {
  CheckInput(params, input.cols());
  Mat<S> h = input;
  for (int l = 0; l < params.num_layers(); ++l) {
    Mat<S> next(h.rows(), params.weight(l).rows());
    next.noalias() = h * params.weight(l).transpose();
    next.rowwise() += params.bias(l).row(0);
    if (l + 1 < params.num_layers()) {
      switch (params.activation()) {
        case Activation::kElu:
          next = next.unaryExpr(
              [](S v) { return v > S(0) ? v : std::expm1(v); });
          break;
        case Activation::kTanh:
          next = next.array().tanh().matrix();
          break;
        case Activation::kIdentity:
          break;
      }
    }
    h = std::move(next);
  }
  return h;
}

template <typename S>
Gradients<S> CollectGradients(const Tape<S>& tape, const BoundParams<S>& bound) {
  Gradients<S> grads = bound.params->ZerosLike();
  for (int l = 0; l < grads.num_layers(); ++l) {
    grads.weight(l) = tape.Grad(bound.weights[l]);
    grads.bias(l) = tape.Grad(bound.biases[l]);
  }
  return grads;
}

template <typename To, typename From>
ParamSet<To> CastParams(const ParamSet<From>& from) {
  ParamSet<To> to(from.layer_sizes(), from.activation());
  for (int l = 0; l < from.num_layers(); ++l) {
    to.weight(l) = from.weight(l).template cast<To>();
    to.bias(l) = from.bias(l).template cast<To>();
  }
  return to;
}

template class ParamSet<float>;
template class ParamSet<double>;

template BoundParams<float> Bind(Tape<float>&, const ParamSet<float>&);
template BoundParams<double> Bind(Tape<double>&, const ParamSet<double>&);
template Var MlpForward(Tape<float>&, const BoundParams<float>&, Var);
template Var MlpForward(Tape<double>&, const BoundParams<double>&, Var);
template Mat<float> MlpForward(const ParamSet<float>&, const Mat<float>&);
template Mat<double> MlpForward(const ParamSet<double>&, const Mat<double>&);
template Gradients<float> CollectGradients(const Tape<float>&,
                                           const BoundParams<float>&);
template Gradients<double> CollectGradients(const Tape<double>&,
                                            const BoundParams<double>&);
template ParamSet<double> CastParams(const ParamSet<float>&);
template ParamSet<float> CastParams(const ParamSet<double>&);
template ParamSet<float> CastParams(const ParamSet<float>&);
template ParamSet<double> CastParams(const ParamSet<double>&);

}  // namespace slr
