#ifndef KINKLAB_NUMERICS_HPP
#define KINKLAB_NUMERICS_HPP

#include <Eigen/Dense>
#include <cmath>

#include "kinklab/common.hpp"

namespace kinklab {

inline double l1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size())
    throw ConfigError("l1_distance: length mismatch");
  return (p - q).cwiseAbs().sum();
}

// Unit 2-norm copy; the global phase is left untouched.
inline Eigen::VectorXcd normalize(const Eigen::VectorXcd& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw ConfigError("normalize: zero vector");
  return v / norm;
}

inline Eigen::VectorXd normalize_distribution(const Eigen::VectorXd& p) {
  const double total = p.sum();
  if (!(total > 0.0)) throw ConfigError("normalize_distribution: zero total mass");
  return p / total;
}

inline double distribution_mean(const Eigen::VectorXd& p) {
  double mean = 0.0;
  for (int n = 0; n < p.size(); ++n) mean += n * p(n);
  return mean / p.sum();
}

inline double distribution_variance(const Eigen::VectorXd& p) {
  const double mean = distribution_mean(p);
  double var = 0.0;
  for (int n = 0; n < p.size(); ++n) var += (n - mean) * (n - mean) * p(n);
  return var / p.sum();
}

// Least-squares slope of y against x.
inline double fit_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("fit_slope: need two equal-length samples at least");
  const double xm = x.mean();
  const double ym = y.mean();
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    sxx += (x(i) - xm) * (x(i) - xm);
    sxy += (x(i) - xm) * (y(i) - ym);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope: degenerate abscissa");
  return sxy / sxx;
}

}  // namespace kinklab

#endif
