#include "slr/tensor/tape.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace slr {

template <typename S>
Var Tape<S>::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename S>
const typename Tape<S>::Node& Tape<S>::At(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::out_of_range("tape: node " + std::to_string(v.id) +
                            " does not exist");
  }
  return nodes_[v.id];
}

template <typename S>
void Tape<S>::CheckBinary(const char* name, Var a, Var b) const {
  const Matrix& x = At(a).value;
  const Matrix& y = At(b).value;
  const bool same = x.rows() == y.rows() && x.cols() == y.cols();
  const bool row = y.rows() == 1 && y.cols() == x.cols();
  const bool scalar = y.rows() == 1 && y.cols() == 1;
  if (!same && !row && !scalar) {
    throw DimensionError(std::string("tape: ") + name + " of " +
                         ShapeString(x.rows(), x.cols()) + " and " +
                         ShapeString(y.rows(), y.cols()));
  }
}

template <typename S>
typename Tape<S>::Matrix Tape<S>::BroadcastRhs(const Matrix& a,
                                               const Matrix& b) const {
  if (b.rows() == a.rows() && b.cols() == a.cols()) return b;
  if (b.rows() == 1 && b.cols() == a.cols()) {
    return b.replicate(a.rows(), 1);
  }
  return Matrix::Constant(a.rows(), a.cols(), b(0, 0));
}

template <typename S>
Var Tape<S>::Leaf(Matrix value) {
  Node n;
  n.op = Op::kLeaf;
  n.requires_grad = true;
  n.value = std::move(value);
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Constant(Matrix value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::StopGradient(Var x) {
  Node n;
  n.op = Op::kStop;
  n.a = x.id;
  n.value = At(x).value;
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::MatMulT(Var x, Var w) {
  const Matrix& xv = At(x).value;
  const Matrix& wv = At(w).value;
  if (xv.cols() != wv.cols()) {
    throw DimensionError("tape: matmul of " + ShapeString(xv.rows(), xv.cols()) +
                         " by transpose of " +
                         ShapeString(wv.rows(), wv.cols()));
  }
  Node n;
  n.op = Op::kMatMulT;
  n.a = x.id;
  n.b = w.id;
  n.requires_grad = At(x).requires_grad || At(w).requires_grad;
  n.value.noalias() = xv * wv.transpose();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Add(Var a, Var b) {
  CheckBinary("add", a, b);
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = At(a).requires_grad || At(b).requires_grad;
  const Matrix& x = At(a).value;
  const Matrix& y = At(b).value;
  if (y.rows() == x.rows() && y.cols() == x.cols()) {
    n.value = x + y;
  } else if (y.rows() == 1 && y.cols() == x.cols()) {
    n.value = x.rowwise() + y.row(0);
  } else {
    n.value = x.array() + y(0, 0);
  }
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Sub(Var a, Var b) {
  CheckBinary("sub", a, b);
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = At(a).requires_grad || At(b).requires_grad;
  const Matrix& x = At(a).value;
  const Matrix& y = At(b).value;
  if (y.rows() == x.rows() && y.cols() == x.cols()) {
    n.value = x - y;
  } else if (y.rows() == 1 && y.cols() == x.cols()) {
    n.value = x.rowwise() - y.row(0);
  } else {
    n.value = x.array() - y(0, 0);
  }
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Mul(Var a, Var b) {
  CheckBinary("mul", a, b);
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = At(a).requires_grad || At(b).requires_grad;
  const Matrix& x = At(a).value;
  n.value = x.cwiseProduct(BroadcastRhs(x, At(b).value));
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Scale(Var a, S factor) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.s0 = factor;
  n.requires_grad = At(a).requires_grad;
  n.value = At(a).value * factor;
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::AddScalar(Var a, S offset) {
  Node n;
  n.op = Op::kAddScalar;
  n.a = a.id;
  n.s0 = offset;
  n.requires_grad = At(a).requires_grad;
  n.value = At(a).value.array() + offset;
  return Push(std::move(n));
}

namespace {

template <typename S, typename F>
Mat<S> Map(const Mat<S>& x, F f) {
  return x.unaryExpr(f);
}

}  // namespace

template <typename S>
Var Tape<S>::Elu(Var x) {
  Node n;
  n.op = Op::kElu;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = Map<S>(At(x).value,
                   [](S v) { return v > S(0) ? v : std::expm1(v); });
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Tanh(Var x) {
  Node n;
  n.op = Op::kTanh;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.array().tanh();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Exp(Var x) {
  Node n;
  n.op = Op::kExp;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.array().exp();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Log(Var x) {
  Node n;
  n.op = Op::kLog;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.array().log();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Square(Var x) {
  Node n;
  n.op = Op::kSquare;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.array().square();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Relu(Var x) {
  Node n;
  n.op = Op::kRelu;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.cwiseMax(S(0));
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Clamp(Var x, S lo, S hi) {
  Node n;
  n.op = Op::kClamp;
  n.a = x.id;
  n.s0 = lo;
  n.s1 = hi;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.cwiseMax(lo).cwiseMin(hi);
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Minimum(Var a, Var b) {
  const Matrix& x = At(a).value;
  const Matrix& y = At(b).value;
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("tape: minimum of " + ShapeString(x.rows(), x.cols()) +
                         " and " + ShapeString(y.rows(), y.cols()));
  }
  Node n;
  n.op = Op::kMinimum;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = At(a).requires_grad || At(b).requires_grad;
  n.value = x.cwiseMin(y);
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("tape: concat of nothing");
  const Eigen::Index rows = At(parts[0]).value.rows();
  Eigen::Index cols = 0;
  Node n;
  n.op = Op::kConcatCols;
  for (Var p : parts) {
    const Matrix& v = At(p).value;
    if (v.rows() != rows) {
      throw DimensionError("tape: concat rows " + std::to_string(v.rows()) +
                           " vs " + std::to_string(rows));
    }
    cols += v.cols();
    n.requires_grad = n.requires_grad || At(p).requires_grad;
    n.parts.push_back(p.id);
  }
  n.value.resize(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    const Matrix& v = At(p).value;
    n.value.middleCols(offset, v.cols()) = v;
    offset += v.cols();
  }
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::SliceCols(Var x, int begin, int count) {
  const Matrix& v = At(x).value;
  if (begin < 0 || count < 0 || begin + count > v.cols()) {
    throw DimensionError("tape: slice [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") of " +
                         std::to_string(v.cols()) + " columns");
  }
  Node n;
  n.op = Op::kSliceCols;
  n.a = x.id;
  n.aux = begin;
  n.requires_grad = At(x).requires_grad;
  n.value = v.middleCols(begin, count);
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::RowSum(Var x) {
  Node n;
  n.op = Op::kRowSum;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = At(x).value.rowwise().sum();
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Sum(Var x) {
  Node n;
  n.op = Op::kSum;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = Matrix::Constant(1, 1, At(x).value.sum());
  return Push(std::move(n));
}

template <typename S>
Var Tape<S>::Mean(Var x) {
  const Matrix& v = At(x).value;
  if (v.size() == 0) throw DimensionError("tape: mean of empty matrix");
  Node n;
  n.op = Op::kMean;
  n.a = x.id;
  n.requires_grad = At(x).requires_grad;
  n.value = Matrix::Constant(1, 1, v.sum() / static_cast<S>(v.size()));
  return Push(std::move(n));
}

template <typename S>
const typename Tape<S>::Matrix& Tape<S>::Value(Var v) const {
  return At(v).value;
}

template <typename S>
typename Tape<S>::Matrix Tape<S>::Grad(Var v) const {
  const Node& n = At(v);
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

template <typename S>
bool Tape<S>::RequiresGrad(Var v) const {
  return At(v).requires_grad;
}

template <typename S>
typename Tape<S>::Op Tape<S>::OpOf(Var v) const {
  return At(v).op;
}

template <typename S>
void Tape<S>::Accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = g;
    n.has_grad = true;
  }
}

// reduce a gradient of the broadcast result back to the rhs operand's shape
template <typename S>
void Tape<S>::AccumulateBroadcast(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.value.rows() == g.rows() && n.value.cols() == g.cols()) {
    Accumulate(id, g);
  } else if (n.value.rows() == 1 && n.value.cols() == g.cols()) {
    Accumulate(id, g.colwise().sum());
  } else {
    Accumulate(id, Matrix::Constant(1, 1, g.sum()));
  }
}

template <typename S>
void Tape<S>::Backward(Var loss) {
  const Node& root = At(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw DimensionError("tape: backward needs a scalar loss, got " +
                         ShapeString(root.value.rows(), root.value.cols()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  if (!root.requires_grad) return;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  nodes_[loss.id].has_grad = true;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad) continue;
    // inputs precede outputs; anything else means the tape is corrupt
    assert(n.a < id && n.b < id);
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
      case Op::kStop:
        break;
      case Op::kMatMulT: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& w = nodes_[n.b].value;
        if (nodes_[n.a].requires_grad) Accumulate(n.a, g * w);
        if (nodes_[n.b].requires_grad) {
          Matrix gw = g.transpose() * x;
          Accumulate(n.b, gw);
        }
        break;
      }
      case Op::kAdd:
        Accumulate(n.a, g);
        AccumulateBroadcast(n.b, g);
        break;
      case Op::kSub:
        Accumulate(n.a, g);
        if (nodes_[n.b].requires_grad) AccumulateBroadcast(n.b, -g);
        break;
      case Op::kMul: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& y = nodes_[n.b].value;
        if (nodes_[n.a].requires_grad) {
          Accumulate(n.a, g.cwiseProduct(BroadcastRhs(x, y)));
        }
        if (nodes_[n.b].requires_grad) {
          AccumulateBroadcast(n.b, g.cwiseProduct(x));
        }
        break;
      }
      case Op::kScale:
        Accumulate(n.a, g * n.s0);
        break;
      case Op::kAddScalar:
        Accumulate(n.a, g);
        break;
      case Op::kElu: {
        const Matrix& x = nodes_[n.a].value;
        Matrix d = x.binaryExpr(n.value, [](S in, S out) {
          return in > S(0) ? S(1) : out + S(1);
        });
        Accumulate(n.a, g.cwiseProduct(d));
        break;
      }
      case Op::kTanh:
        Accumulate(n.a,
                   g.cwiseProduct((S(1) - n.value.array().square()).matrix()));
        break;
      case Op::kExp:
        Accumulate(n.a, g.cwiseProduct(n.value));
        break;
      case Op::kLog:
        Accumulate(n.a, g.cwiseQuotient(nodes_[n.a].value));
        break;
      case Op::kSquare:
        Accumulate(n.a, g.cwiseProduct(nodes_[n.a].value) * S(2));
        break;
      case Op::kRelu: {
        // subgradient 0 at the kink
        const Matrix& x = nodes_[n.a].value;
        Accumulate(n.a, x.binaryExpr(g, [](S in, S gi) {
          return in > S(0) ? gi : S(0);
        }));
        break;
      }
      case Op::kClamp: {
        const S lo = n.s0;
        const S hi = n.s1;
        const Matrix& x = nodes_[n.a].value;
        Accumulate(n.a, x.binaryExpr(g, [lo, hi](S in, S gi) {
          return (in > lo && in < hi) ? gi : S(0);
        }));
        break;
      }
      case Op::kMinimum: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& y = nodes_[n.b].value;
        if (nodes_[n.a].requires_grad) {
          Matrix ga(g.rows(), g.cols());
          for (Eigen::Index i = 0; i < g.size(); ++i) {
            ga.data()[i] = x.data()[i] <= y.data()[i] ? g.data()[i] : S(0);
          }
          Accumulate(n.a, ga);
        }
        if (nodes_[n.b].requires_grad) {
          Matrix gb(g.rows(), g.cols());
          for (Eigen::Index i = 0; i < g.size(); ++i) {
            gb.data()[i] = x.data()[i] <= y.data()[i] ? S(0) : g.data()[i];
          }
          Accumulate(n.b, gb);
        }
        break;
      }
      case Op::kConcatCols: {
        Eigen::Index offset = 0;
        for (int p : n.parts) {
          assert(p < id);
          const Eigen::Index c = nodes_[p].value.cols();
          if (nodes_[p].requires_grad) {
            Accumulate(p, g.middleCols(offset, c));
          }
          offset += c;
        }
        break;
      }
      case Op::kSliceCols: {
        const Matrix& x = nodes_[n.a].value;
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        gx.middleCols(n.aux, g.cols()) = g;
        Accumulate(n.a, gx);
        break;
      }
      case Op::kRowSum: {
        const Matrix& x = nodes_[n.a].value;
        Accumulate(n.a, g.replicate(1, x.cols()));
        break;
      }
      case Op::kSum: {
        const Matrix& x = nodes_[n.a].value;
        Accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::kMean: {
        const Matrix& x = nodes_[n.a].value;
        Accumulate(n.a, Matrix::Constant(x.rows(), x.cols(),
                                         g(0, 0) / static_cast<S>(x.size())));
        break;
      }
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace slr
