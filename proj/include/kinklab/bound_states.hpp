#ifndef KINKLAB_BOUND_STATES_HPP
#define KINKLAB_BOUND_STATES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "kinklab/common.hpp"
#include "kinklab/lattice.hpp"
#include "kinklab/numerics.hpp"

namespace kinklab {

// Inverse decay length gamma0 = asinh(w/g) of a kink trapped by a single
// weak link: the bound profile is psi_n ~ exp(-gamma0 |n - n0|).
inline double inverse_decay_length(double w, double g) {
  if (!(g > 0.0)) throw ConfigError("inverse_decay_length: g must be positive");
  if (w < 0.0) throw ConfigError("inverse_decay_length: w must be >= 0");
  const double x = w / g;
  return std::log(x + std::sqrt(1.0 + x * x));
}

namespace detail {

inline std::pair<int, double> single_well_link(const LatticeSpec& spec) {
  if (spec.wells.size() != 1)
    throw ConfigError("expected exactly one well, got " + std::to_string(spec.wells.size()));
  const auto& [n0, w] = *spec.wells.begin();
  return {n0, w};
}

// Both wells of an equal-depth double-well spec, as (n0, L, w).
inline std::tuple<int, int, double> double_well_links(const LatticeSpec& spec) {
  if (spec.wells.size() != 2)
    throw ConfigError("expected exactly two wells, got " + std::to_string(spec.wells.size()));
  auto it = spec.wells.begin();
  const auto [n_left, w_left] = *it++;
  const auto [n_right, w_right] = *it;
  if (std::abs(w_left - w_right) > 1e-12 * std::max(w_left, w_right))
    throw ConfigError("unequal well depths are unsupported");
  return {n_left, n_right - n_left, w_left};
}

}  // namespace detail

// Lattice sized so that bound-state tails are negligible at the walls:
// half-width max(40/gamma0, L + 40/gamma0) on each side of the well region.
// The two wells (or one, for L = 0) are placed symmetrically.
inline LatticeSpec bound_state_lattice(double w, double g, int L,
                                       Boundary boundary = Boundary::effectively_infinite) {
  if (!(w > 0.0)) throw ConfigError("bound_state_lattice: w must be positive");
  const double gamma0 = inverse_decay_length(w, g);
  const double tail = 40.0 / gamma0;
  const int half = static_cast<int>(std::ceil(std::max({tail, L + tail, 40.0})));
  LatticeSpec spec;
  spec.g = g;
  spec.boundary = boundary;
  spec.n_sites = 2 * half + L + 2;
  const int n0 = half;
  spec.wells[n0] = w;
  if (L > 0) spec.wells[n0 + L] = w;
  spec.validate();
  return spec;
}

struct SingleWellSolution {
  double gamma0 = 0.0;
  double energy = 0.0;           // -2 sqrt(g^2 + w^2)
  Eigen::VectorXd psi;           // unit-norm exp profile on the spec lattice
  int well_link = 0;
};

// Ground state of one weak link: psi_n ~ exp(-gamma0 |n - n0|) with energy
// E0 = -2g cosh(gamma0) = -2 sqrt(g^2 + w^2).
inline SingleWellSolution single_well_bound_state(const LatticeSpec& spec) {
  spec.validate();
  const auto [n0, w] = detail::single_well_link(spec);
  SingleWellSolution out;
  out.gamma0 = inverse_decay_length(w, spec.g);
  out.energy = -2.0 * std::sqrt(spec.g * spec.g + w * w);
  out.well_link = n0;
  out.psi = Eigen::VectorXd(spec.n_links());
  for (int n = 0; n < spec.n_links(); ++n)
    out.psi(n) = std::exp(-out.gamma0 * std::abs(n - n0));
  out.psi /= out.psi.norm();
  return out;
}

struct DoubleWellGammas {
  double gamma_plus = 0.0;                 // symmetric state, > gamma0
  std::optional<double> gamma_minus;       // antisymmetric; absent if unbound
};

namespace detail {

// Bisection on [a, b] with f(a) < 0 < f(b), refined to machine width.
template <typename F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  double fb = f(b);
  if (!(fa < 0.0 && fb > 0.0))
    throw NumericalError("bisect: bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                         "] does not straddle a root (f = " + std::to_string(fa) + ", " +
                         std::to_string(fb) + ")");
  for (int iter = 0; iter < 200 && (b - a) > 1e-16 * std::max(1.0, b); ++iter) {
    const double mid = 0.5 * (a + b);
    if (f(mid) < 0.0)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Decay exponents of the two double-well bound states, from the matching
// condition [1 - g sinh(gamma)/w]^2 = exp(-2 gamma L) split into its two
// branches:
//   symmetric:      1 - (g/w) sinh(gamma) = -exp(-gamma L)
//   antisymmetric:  1 - (g/w) sinh(gamma) = +exp(-gamma L).
// The antisymmetric root exists only when w L > g; its absence is a valid
// outcome (the state unbinds), not an error.
inline DoubleWellGammas double_well_gammas(double w, double g, int L) {
  if (!(w > 0.0)) throw ConfigError("double_well_gammas: w must be positive");
  if (!(g > 0.0)) throw ConfigError("double_well_gammas: g must be positive");
  if (L < 1) throw ConfigError("double_well_gammas: L must be >= 1");

  const double gamma0 = inverse_decay_length(w, g);
  const double gamma_max = inverse_decay_length(2.0 * w, g) + 1.0;

  const auto branch_plus = [&](double gamma) {
    return g * std::sinh(gamma) - w * (1.0 + std::exp(-gamma * L));
  };
  const auto branch_minus = [&](double gamma) {
    return g * std::sinh(gamma) - w * (1.0 - std::exp(-gamma * L));
  };
  const auto residual = [&](double gamma, double sign) {
    return std::abs(1.0 - (g / w) * std::sinh(gamma) - sign * std::exp(-gamma * L));
  };

  DoubleWellGammas out;
  out.gamma_plus = detail::bisect(branch_plus, 0.0, gamma_max);
  if (residual(out.gamma_plus, -1.0) > 1e-12)
    throw NumericalError("double_well_gammas: symmetric root failed verification");

  // f_minus vanishes at 0 and is negative on (0, gamma_minus); shrink the
  // left endpoint until we are inside that dip, or conclude the state is
  // unbound.
  double lo = 0.5 * gamma0;
  bool found = false;
  for (int iter = 0; iter < 60; ++iter) {
    if (branch_minus(lo) < 0.0) {
      found = true;
      break;
    }
    lo *= 0.5;
  }
  if (found) {
    const double root = detail::bisect(branch_minus, lo, gamma0);
    if (residual(root, +1.0) > 1e-12)
      throw NumericalError("double_well_gammas: antisymmetric root failed verification");
    out.gamma_minus = root;
  }
  return out;
}

// Closed-form tunneling splitting between the double-well bound states,
//   2 omega = 4 w^2 exp(-gamma0 L) / sqrt(g^2 + w^2),
// valid for exp(-gamma0 L) << 1. Linearizing the matching condition around
// gamma0 gives gamma+- = gamma0 +- w e^{-gamma0 L}/(g cosh gamma0), hence a
// splitting first order in e^{-gamma0 L}; the exact eigengap of the
// tridiagonal problem confirms this power.
inline double tunneling_gap(double w, double g, int L) {
  const double gamma0 = inverse_decay_length(w, g);
  warn_if(std::exp(-gamma0 * L) > 0.2,
          "tunneling_gap: exp(-gamma0 L) = " + std::to_string(std::exp(-gamma0 * L)) +
              " is not small; the closed form is asymptotic");
  return 4.0 * w * w * std::exp(-gamma0 * L) / std::sqrt(g * g + w * w);
}

struct BoundStateSolution {
  double gamma_plus = 0.0;
  std::optional<double> gamma_minus;
  double energy_plus = 0.0;     // -2g cosh(gamma+)
  double energy_minus = 0.0;    // -2g cosh(gamma-) if bound, else exact eigenvalue
  double gap = 0.0;             // energy_minus - energy_plus
  Eigen::VectorXd psi_plus;     // analytic profiles, unit norm
  Eigen::VectorXd psi_minus;    // empty when the antisymmetric state is unbound
  Eigen::VectorXd exact_plus;   // two lowest eigenvectors of the tridiagonal H
  Eigen::VectorXd exact_minus;
  double exact_energy_plus = 0.0;
  double exact_energy_minus = 0.0;
  double overlap_plus = 0.0;    // |<analytic|exact>|
  double overlap_minus = 0.0;
};

// Both bound states of an equal-depth double well:
//   psi^-/+_n ~ exp(-gamma |n-n0|) -/+ exp(-gamma |n-n0-L|)
// with the branch-specific gamma, renormalized on the lattice, together
// with the two lowest exact eigenpairs for validation.
inline BoundStateSolution double_well_bound_states(const LatticeSpec& spec) {
  spec.validate();
  const auto [n0, L, w] = detail::double_well_links(spec);
  const auto gammas = double_well_gammas(w, spec.g, L);

  BoundStateSolution out;
  out.gamma_plus = gammas.gamma_plus;
  out.gamma_minus = gammas.gamma_minus;
  out.energy_plus = -2.0 * spec.g * std::cosh(gammas.gamma_plus);

  const int m = spec.n_links();
  const auto profile = [&](double gamma, double sign) {
    Eigen::VectorXd psi(m);
    for (int n = 0; n < m; ++n)
      psi(n) = std::exp(-gamma * std::abs(n - n0)) + sign * std::exp(-gamma * std::abs(n - n0 - L));
    return Eigen::VectorXd(psi / psi.norm());
  };
  out.psi_plus = profile(gammas.gamma_plus, +1.0);
  if (gammas.gamma_minus) {
    out.psi_minus = profile(*gammas.gamma_minus, -1.0);
    out.energy_minus = -2.0 * spec.g * std::cosh(*gammas.gamma_minus);
  }

  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));
  out.exact_energy_plus = eig.energies(0);
  out.exact_energy_minus = eig.energies(1);
  out.exact_plus = eig.modes.col(0);
  out.exact_minus = eig.modes.col(1);
  if (out.exact_plus.dot(out.psi_plus) < 0.0) out.exact_plus = -out.exact_plus;
  out.overlap_plus = std::abs(out.exact_plus.dot(out.psi_plus));
  if (gammas.gamma_minus) {
    if (out.exact_minus.dot(out.psi_minus) < 0.0) out.exact_minus = -out.exact_minus;
    out.overlap_minus = std::abs(out.exact_minus.dot(out.psi_minus));
  } else {
    out.energy_minus = out.exact_energy_minus;
  }
  out.gap = out.energy_minus - out.energy_plus;
  return out;
}

}  // namespace kinklab

#endif
