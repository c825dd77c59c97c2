#ifndef KINKLAB_STATE_HPP
#define KINKLAB_STATE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kinklab/common.hpp"
#include "kinklab/lattice.hpp"

namespace kinklab {

// Pure kink state: complex amplitude per link, plus the simulation time.
struct KinkState {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;

  int n_links() const { return static_cast<int>(amplitudes.size()); }

  Eigen::VectorXd probabilities() const { return amplitudes.cwiseAbs2(); }

  double norm_deviation() const { return std::abs(amplitudes.norm() - 1.0); }

  void check_normalized(double tol = 1e-12) const {
    if (norm_deviation() > tol)
      throw NumericalError("KinkState: norm drifted by " + std::to_string(norm_deviation()) +
                           " at t = " + std::to_string(time));
  }
};

// Mixed kink state in the position representation, rho_{m,n} over links.
struct KinkDensityMatrix {
  Eigen::MatrixXcd entries;
  double time = 0.0;

  int n_links() const { return static_cast<int>(entries.rows()); }

  static KinkDensityMatrix from_pure(const KinkState& psi) {
    return {psi.amplitudes * psi.amplitudes.adjoint(), psi.time};
  }

  Eigen::VectorXd diagonal() const { return entries.diagonal().real(); }

  double hermiticity_residual() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  }

  double trace_deviation() const { return std::abs(entries.trace().real() - 1.0); }

  void check_invariants(double herm_tol = 1e-10, double trace_tol = 1e-10,
                        double diag_floor = -1e-10) const {
    if (hermiticity_residual() > herm_tol)
      throw NumericalError("KinkDensityMatrix: Hermiticity residual " +
                           std::to_string(hermiticity_residual()) + " at t = " + std::to_string(time));
    if (trace_deviation() > trace_tol)
      throw NumericalError("KinkDensityMatrix: trace drifted by " +
                           std::to_string(trace_deviation()) + " at t = " + std::to_string(time));
    if (entries.diagonal().real().minCoeff() < diag_floor)
      throw NumericalError("KinkDensityMatrix: negative diagonal " +
                           std::to_string(entries.diagonal().real().minCoeff()) +
                           " at t = " + std::to_string(time));
  }
};

// Run provenance carried along with every trace.
struct RunMetadata {
  LatticeSpec spec;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;

  void set(const std::string& key, const std::string& value) {
    for (auto& kv : params)
      if (kv.first == key) { kv.second = value; return; }
    params.emplace_back(key, value);
  }
};

// Time series of site-resolved kink probability distributions.
struct ProbabilityTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> distributions;
  RunMetadata metadata;

  int n_times() const { return static_cast<int>(times.size()); }

  void append(double t, Eigen::VectorXd p, double sum_tol = 1e-8) {
    if (!times.empty() && t <= times.back())
      throw ConfigError("ProbabilityTrace: times must be strictly increasing");
    if (std::abs(p.sum() - 1.0) > sum_tol)
      throw NumericalError("ProbabilityTrace: distribution at t = " + std::to_string(t) +
                           " sums to " + std::to_string(p.sum()));
    times.push_back(t);
    distributions.push_back(std::move(p));
  }

  const Eigen::VectorXd& final_distribution() const {
    if (distributions.empty()) throw ConfigError("ProbabilityTrace: empty");
    return distributions.back();
  }
};

}  // namespace kinklab

#endif
