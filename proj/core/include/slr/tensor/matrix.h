#ifndef SLR_TENSOR_MATRIX_H_
#define SLR_TENSOR_MATRIX_H_

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace slr {

// row-major dense matrix; rows index the batch, columns index features
template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatF = Mat<float>;
using MatD = Mat<double>;

// shape or length mismatch between operands
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

// a NaN/Inf showed up where training must not continue
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what)
      : std::runtime_error(what) {}
};

inline std::string ShapeString(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace slr

#endif  // SLR_TENSOR_MATRIX_H_
