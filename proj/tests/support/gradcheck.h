#ifndef SLR_TESTS_SUPPORT_GRADCHECK_H_
#define SLR_TESTS_SUPPORT_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>

#include "slr/tensor/matrix.h"

namespace slr::testing {

// |a - n| relative to the larger magnitude, floored so that near-zero
// gradients are compared absolutely
inline double RelativeError(double analytic, double numeric,
                            double floor = 1e-3) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Central differences of a scalar function with respect to every entry of
// `x`, perturbing in place and restoring.
inline MatD CentralDifferences(MatD& x, const std::function<double()>& f,
                               double h = 1e-4) {
  MatD g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f();
    x.data()[i] = keep - h;
    const double down = f();
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double MaxRelativeError(const MatD& analytic, const MatD& numeric,
                               double floor = 1e-3) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, RelativeError(analytic.data()[i],
                                          numeric.data()[i], floor));
  }
  return worst;
}

}  // namespace slr::testing

#endif  // SLR_TESTS_SUPPORT_GRADCHECK_H_
