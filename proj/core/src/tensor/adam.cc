#include "slr/tensor/adam.h"

#include <cmath>

namespace slr {

template <typename S>
AdamState<S>::AdamState(const ParamSet<S>& params, AdamConfig cfg)
    : config(cfg) {
  for (const Mat<S>* t : params.Tensors()) {
    m.push_back(Mat<S>::Zero(t->rows(), t->cols()));
    v.push_back(Mat<S>::Zero(t->rows(), t->cols()));
  }
}

template <typename S>
AdamState<S>::AdamState(const Mat<S>& tensor, AdamConfig cfg) : config(cfg) {
  m.push_back(Mat<S>::Zero(tensor.rows(), tensor.cols()));
  v.push_back(Mat<S>::Zero(tensor.rows(), tensor.cols()));
}

template <typename S>
void AdamStep(std::span<Mat<S>* const> params,
              std::span<const Mat<S>* const> grads,
              std::span<const std::string> names, AdamState<S>& state,
              double lr, const std::string& label) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adam: " + label + " has " +
                         std::to_string(params.size()) + " tensors, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.m.size()) + " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Mat<S>& p = *params[i];
    const Mat<S>& g = *grads[i];
    if (p.rows() != g.rows() || p.cols() != g.cols() ||
        p.rows() != state.m[i].rows() || p.cols() != state.m[i].cols()) {
      throw DimensionError("adam: " + label + " " + names[i] +
                           " shape mismatch");
    }
    if (!g.allFinite()) {
      throw NumericError("adam: non-finite gradient in " + label + " " +
                         names[i]);
    }
  }

  state.step_count += 1;
  const double b1 = state.config.beta1;
  const double b2 = state.config.beta2;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const S eps = static_cast<S>(state.config.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat<S>& p = *params[i];
    const Mat<S>& g = *grads[i];
    Mat<S>& m = state.m[i];
    Mat<S>& v = state.v[i];
    m = static_cast<S>(b1) * m + static_cast<S>(1.0 - b1) * g;
    v = static_cast<S>(b2) * v +
        static_cast<S>(1.0 - b2) * g.cwiseProduct(g);
    const S step = static_cast<S>(lr / c1);
    const S root_c2 = static_cast<S>(std::sqrt(c2));
    // p -= lr * (m / c1) / (sqrt(v / c2) + eps)
    p.array() -= step * m.array() / (v.array().sqrt() / root_c2 + eps);
  }
}

template <typename S>
void AdamStep(ParamSet<S>& params, const Gradients<S>& grads,
              AdamState<S>& state, double lr, const std::string& label) {
  std::vector<Mat<S>*> p = params.Tensors();
  std::vector<const Mat<S>*> g = grads.Tensors();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.size(); ++i) {
    names.push_back(ParamSet<S>::TensorName(static_cast<int>(i)));
  }
  AdamStep<S>(p, g, names, state, lr, label);
}

template <typename S>
void AdamStep(Mat<S>& tensor, const Mat<S>& grad, AdamState<S>& state,
              double lr, const std::string& label) {
  Mat<S>* p[] = {&tensor};
  const Mat<S>* g[] = {&grad};
  const std::string names[] = {"tensor"};
  AdamStep<S>(p, g, names, state, lr, label);
}

template <typename S>
double GlobalNorm(std::span<const Mat<S>* const> grads) {
  double sq = 0.0;
  for (const Mat<S>* g : grads) {
    sq += g->template cast<double>().squaredNorm();
  }
  return std::sqrt(sq);
}

template <typename S>
double ClipGlobalNorm(std::span<Mat<S>* const> grads, double max_norm) {
  std::vector<const Mat<S>*> view(grads.begin(), grads.end());
  const double norm = GlobalNorm<S>(view);
  if (norm > max_norm && norm > 0.0) {
    const S scale = static_cast<S>(max_norm / (norm + 1e-6));
    for (Mat<S>* g : grads) *g *= scale;
  }
  return norm;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void AdamStep(std::span<Mat<float>* const>,
                       std::span<const Mat<float>* const>,
                       std::span<const std::string>, AdamState<float>&, double,
                       const std::string&);
template void AdamStep(std::span<Mat<double>* const>,
                       std::span<const Mat<double>* const>,
                       std::span<const std::string>, AdamState<double>&, double,
                       const std::string&);
template void AdamStep(ParamSet<float>&, const Gradients<float>&,
                       AdamState<float>&, double, const std::string&);
template void AdamStep(ParamSet<double>&, const Gradients<double>&,
                       AdamState<double>&, double, const std::string&);
template void AdamStep(Mat<float>&, const Mat<float>&, AdamState<float>&,
                       double, const std::string&);
template void AdamStep(Mat<double>&, const Mat<double>&, AdamState<double>&,
                       double, const std::string&);
template double GlobalNorm(std::span<const Mat<float>* const>);
template double GlobalNorm(std::span<const Mat<double>* const>);
template double ClipGlobalNorm(std::span<Mat<float>* const>, double);
template double ClipGlobalNorm(std::span<Mat<double>* const>, double);

}  // namespace slr
