#ifndef SLR_TENSOR_TAPE_H_
#define SLR_TENSOR_TAPE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "slr/tensor/matrix.h"

namespace slr {

// Handle to a node recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Dynamic reverse-mode differentiation over whole matrices.
//
// Every operation appends a node holding its forward value. Nodes only ever
// reference earlier nodes, so creation order is a topological order and
// Backward() is a single reverse sweep. A node does not propagate gradient
// unless at least one of its inputs does; StopGradient() produces a node that
// never propagates, which is how sg[.] is realized.
//
// Binary elementwise ops accept a right-hand operand that is either the same
// shape, a single row (broadcast down the batch), or a 1x1 scalar.
template <typename S>
class Tape {
 public:
  using Matrix = Mat<S>;

  enum class Op : std::uint8_t {
    kLeaf,
    kConstant,
    kStop,
    kMatMulT,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddScalar,
    kElu,
    kTanh,
    kExp,
    kLog,
    kSquare,
    kRelu,
    kClamp,
    kMinimum,
    kConcatCols,
    kSliceCols,
    kRowSum,
    kSum,
    kMean,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // differentiable input (parameters, or inputs under a gradient check)
  Var Leaf(Matrix value);
  // input that never receives gradient
  Var Constant(Matrix value);
  // same value, zero gradient to everything upstream
  Var StopGradient(Var x);

  // x * w^T for x: [batch x in], w: [out x in]
  Var MatMulT(Var x, Var w);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var a, S factor);
  Var AddScalar(Var a, S offset);

  Var Elu(Var x);
  Var Tanh(Var x);
  Var Exp(Var x);
  Var Log(Var x);
  Var Square(Var x);
  Var Relu(Var x);
  // gradient passes only where lo < x < hi
  Var Clamp(Var x, S lo, S hi);
  // elementwise min; ties route gradient to `a`
  Var Minimum(Var a, Var b);

  Var ConcatCols(std::span<const Var> parts);
  Var SliceCols(Var x, int begin, int count);

  // [batch x n] -> [batch x 1]
  Var RowSum(Var x);
  // -> 1x1
  Var Sum(Var x);
  Var Mean(Var x);

  // Reverse sweep from a 1x1 node. Gradients of earlier Backward() calls are
  // cleared first.
  void Backward(Var loss);

  const Matrix& Value(Var v) const;
  // zero matrix of the node's shape when nothing reached it
  Matrix Grad(Var v) const;
  bool RequiresGrad(Var v) const;
  Op OpOf(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void Clear() { nodes_.clear(); }

 private:
  struct Node {
    Op op = Op::kConstant;
    bool requires_grad = false;
    bool has_grad = false;
    int a = -1;
    int b = -1;
    int aux = 0;
    S s0 = S(0);
    S s1 = S(0);
    std::vector<int> parts;
    Matrix value;
    Matrix grad;
  };

  Var Push(Node node);
  const Node& At(Var v) const;
  void Accumulate(int id, const Matrix& g);
  void AccumulateBroadcast(int id, const Matrix& g);
  void CheckBinary(const char* name, Var a, Var b) const;
  Matrix BroadcastRhs(const Matrix& a, const Matrix& b) const;

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace slr

#endif  // SLR_TENSOR_TAPE_H_
