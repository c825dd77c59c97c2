#ifndef KINKLAB_BESSEL_HPP
#define KINKLAB_BESSEL_HPP

#include <Eigen/Dense>
#include <cmath>

#include "kinklab/common.hpp"

namespace kinklab {

// Bessel functions of the first kind J_0(x) .. J_dmax(x) for integer order
// and x >= 0, computed by Miller's downward recurrence
//   J_{k-1}(x) = (2k/x) J_k(x) - J_{k+1}(x)
// started well above max(dmax, x) and normalized with
//   J_0(x) + 2 J_2(x) + 2 J_4(x) + ... = 1.
// Absolute accuracy is far below 1e-10 over the whole row; orders past the
// turning point decay superexponentially.
inline Eigen::VectorXd bessel_j_row(double x, int dmax) {
  if (dmax < 0) throw ConfigError("bessel_j_row: negative order");
  if (!(x >= 0.0)) throw ConfigError("bessel_j_row: x must be >= 0");
  Eigen::VectorXd row = Eigen::VectorXd::Zero(dmax + 1);
  if (x < 1e-150) {  // delta kernel; keeps 2k/x finite below
    row(0) = 1.0;
    if (dmax >= 1) row(1) = 0.5 * x;
    return row;
  }

  const int start = std::max(dmax, static_cast<int>(std::ceil(x))) + 48 +
                    static_cast<int>(2.0 * std::cbrt(x + 1.0));
  constexpr double rescale_at = 1e250;

  double upper = 0.0;     // J_{k+1}, unnormalized
  double current = 1e-30; // J_k, unnormalized
  double even_sum = 0.0;  // accumulates J_0 + 2*sum_{k>0 even} J_k
  for (int k = start; k >= 1; --k) {
    const double lower = (2.0 * k / x) * current - upper;
    upper = current;
    current = lower;
    if (k - 1 <= dmax) row(k - 1) = current;
    if ((k - 1) % 2 == 0) even_sum += (k - 1 == 0) ? current : 2.0 * current;
    if (std::abs(current) > rescale_at) {
      const double s = 1.0 / rescale_at;
      current *= s;
      upper *= s;
      even_sum *= s;
      for (int d = std::min(k - 1, dmax); d <= dmax; ++d) row(d) *= s;
    }
  }
  row /= even_sum;
  return row;
}

// Single value J_d(x), d >= 0.
inline double bessel_j(int d, double x) {
  return bessel_j_row(x, d)(d);
}

}  // namespace kinklab

#endif
