#ifndef KINKLAB_ANALYSIS_HPP
#define KINKLAB_ANALYSIS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kinklab/common.hpp"
#include "kinklab/numerics.hpp"

namespace kinklab {

// A local extremum of a sampled distribution, refined by fitting a parabola
// through the discrete point and its two neighbours.
struct Extremum {
  double position = 0.0;
  double value = 0.0;
  bool is_maximum = false;
};

// Interior local extrema of p restricted to link indices [lo, hi].
// Plateau points (equal neighbours) are skipped; endpoints never qualify.
inline std::vector<Extremum> find_local_extrema(const Eigen::VectorXd& p, int lo, int hi) {
  lo = std::max(lo, 0);
  hi = std::min<int>(hi, static_cast<int>(p.size()) - 1);
  std::vector<Extremum> out;
  for (int n = lo + 1; n < hi; ++n) {
    const double a = p(n - 1), b = p(n), c = p(n + 1);
    const bool is_max = b > a && b > c;
    const bool is_min = b < a && b < c;
    if (!is_max && !is_min) continue;
    // Vertex of the parabola through (n-1,a), (n,b), (n+1,c).
    const double denom = a - 2.0 * b + c;
    double shift = 0.0;
    if (std::abs(denom) > 1e-300) shift = 0.5 * (a - c) / denom;
    shift = std::clamp(shift, -0.5, 0.5);
    const double value = b - 0.25 * (a - c) * shift;
    out.push_back({n + shift, std::max(value, 0.0), is_max});
  }
  return out;
}

// Persistence pruning: repeatedly drop the adjacent extrema pair with the
// smallest value separation until every remaining pair is separated by at
// least min_persistence. Removes lattice-scale Bessel ripple from released
// numeric patterns while leaving the interference structure intact.
inline std::vector<Extremum> prune_extrema(std::vector<Extremum> extrema,
                                           double min_persistence) {
  if (min_persistence <= 0.0) return extrema;
  while (extrema.size() >= 2) {
    std::size_t weakest = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < extrema.size(); ++i) {
      const double persistence = std::abs(extrema[i].value - extrema[i + 1].value);
      if (persistence < smallest) {
        smallest = persistence;
        weakest = i;
      }
    }
    if (smallest >= min_persistence) break;
    extrema.erase(extrema.begin() + weakest, extrema.begin() + weakest + 2);
  }
  return extrema;
}

// Extrema inside [lo, hi], pruned at prominence_fraction of the extremal
// value range.
inline std::vector<Extremum> significant_extrema(const Eigen::VectorXd& p, int lo, int hi,
                                                 double prominence_fraction) {
  std::vector<Extremum> extrema = find_local_extrema(p, lo, hi);
  if (prominence_fraction > 0.0 && extrema.size() >= 2) {
    double top = extrema.front().value, bottom = extrema.front().value;
    for (const auto& e : extrema) {
      top = std::max(top, e.value);
      bottom = std::min(bottom, e.value);
    }
    extrema = prune_extrema(std::move(extrema), prominence_fraction * (top - bottom));
  }
  return extrema;
}

// Mean gap between adjacent interference minima inside [lo, hi].
// Returns 0 if fewer than two minima are present.
inline double fringe_spacing(const Eigen::VectorXd& p, int lo, int hi,
                             double prominence_fraction = 0.0) {
  const auto extrema = significant_extrema(p, lo, hi, prominence_fraction);
  std::vector<double> minima;
  for (const auto& e : extrema)
    if (!e.is_maximum) minima.push_back(e.position);
  if (minima.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 1; i < minima.size(); ++i) total += minima[i] - minima[i - 1];
  return total / static_cast<double>(minima.size() - 1);
}

// Michelson visibility of the fringes inside [lo, hi]: for every minimum
// flanked by maxima, contrast (mean_flanking_max - min)/(mean_flanking_max
// + min); the visibility is the best such contrast. A pattern without
// interior oscillation (e.g. a smooth Gaussian mixture) has visibility 0.
inline double fringe_visibility(const Eigen::VectorXd& p, int lo, int hi) {
  if (hi - lo < 2) throw ConfigError("fringe_visibility: degenerate window");
  const auto extrema = find_local_extrema(p, lo, hi);
  double best = 0.0;
  for (std::size_t i = 0; i + 2 < extrema.size(); ++i) {
    const auto& left = extrema[i];
    const auto& mid = extrema[i + 1];
    const auto& right = extrema[i + 2];
    if (!left.is_maximum || mid.is_maximum || !right.is_maximum) continue;
    const double peak = 0.5 * (left.value + right.value);
    const double contrast = (peak - mid.value) / (peak + mid.value);
    best = std::max(best, contrast);
  }
  return std::clamp(best, 0.0, 1.0);
}

// Window centered on the distribution's mean with half-width equal to its
// standard deviation; for the released-kink pattern this tracks the central
// envelope of half-width 2*gamma0*g*t.
struct AnalysisWindow {
  int lo = 0;
  int hi = 0;
};

inline AnalysisWindow central_envelope_window(const Eigen::VectorXd& p) {
  const double mean = distribution_mean(p);
  const double sd = std::sqrt(distribution_variance(p));
  AnalysisWindow w;
  w.lo = std::max(0, static_cast<int>(std::floor(mean - sd)));
  w.hi = std::min<int>(static_cast<int>(p.size()) - 1, static_cast<int>(std::ceil(mean + sd)));
  return w;
}

// Heights of the tallest and second-tallest interference peaks (interpolated
// local maxima) inside [lo, hi]. Second is 0 when only one peak exists.
struct PeakPair {
  double first = 0.0;
  double second = 0.0;
};

inline PeakPair peak_heights(const Eigen::VectorXd& p, int lo, int hi,
                             double prominence_fraction = 0.0) {
  const auto extrema = significant_extrema(p, lo, hi, prominence_fraction);
  std::vector<double> maxima;
  for (const auto& e : extrema)
    if (e.is_maximum) maxima.push_back(e.value);
  std::sort(maxima.begin(), maxima.end(), std::greater<>());
  PeakPair out;
  if (!maxima.empty()) out.first = maxima[0];
  if (maxima.size() > 1) out.second = maxima[1];
  return out;
}

// Mean cell-to-cell jump relative to the peak, a measure of the Bessel
// jaggedness of a released-kink distribution.
inline double jaggedness(const Eigen::VectorXd& p) {
  const int m = static_cast<int>(p.size());
  if (m < 2) return 0.0;
  double acc = 0.0;
  for (int n = 0; n + 1 < m; ++n) acc += std::abs(p(n + 1) - p(n));
  return acc / (m - 1) / p.maxCoeff();
}

// Largest |p_n - p_mirror(n)| under reflection about the lattice midpoint.
inline double mirror_symmetry_residual(const Eigen::VectorXd& p) {
  const int m = static_cast<int>(p.size());
  double worst = 0.0;
  for (int n = 0; n < m / 2; ++n) worst = std::max(worst, std::abs(p(n) - p(m - 1 - n)));
  return worst;
}

}  // namespace kinklab

#endif
