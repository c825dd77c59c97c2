#ifndef KINKLAB_SPIN_CHAIN_HPP
#define KINKLAB_SPIN_CHAIN_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "kinklab/bessel.hpp"
#include "kinklab/common.hpp"
#include "kinklab/numerics.hpp"
#include "kinklab/state.hpp"

namespace kinklab {

// Microscopic Ising chain H = -sum_n (g sx_n + J_n sz_n sz_{n+1})
// - h_left sz_0 + h_right sz_{N-1}. The pinning fields force the up.../...down
// orientation so the finite open chain hosts an odd kink sector. Basis states
// are bit masks; bit n set means spin n points down.
struct SpinChainSpec {
  int n_spins = 4;
  double g = 0.1;
  Eigen::VectorXd bond_couplings;  // J_n = 1 - w_n, size n_spins - 1
  double h_left = 2.0;
  double h_right = 2.0;

  int n_bonds() const { return n_spins - 1; }
  std::size_t dim() const { return std::size_t{1} << n_spins; }

  void validate(int max_spins = 14) const {
    if (n_spins < 2 || n_spins > max_spins)
      throw ConfigError("SpinChainSpec: n_spins must be in [2, " + std::to_string(max_spins) + "]");
    if (bond_couplings.size() != n_bonds())
      throw ConfigError("SpinChainSpec: need one coupling per bond");
    if (h_left < 0.0 || h_right < 0.0)
      throw ConfigError("SpinChainSpec: pinning fields must be >= 0");
  }

  static SpinChainSpec make(int n_spins, double g, const std::map<int, double>& weak_bonds,
                            double pinning = 2.0) {
    SpinChainSpec spec;
    spec.n_spins = n_spins;
    spec.g = g;
    spec.h_left = pinning;
    spec.h_right = pinning;
    spec.bond_couplings = Eigen::VectorXd::Ones(n_spins - 1);
    for (const auto& [bond, w] : weak_bonds) {
      if (bond < 0 || bond >= n_spins - 1) throw ConfigError("SpinChainSpec: bond out of range");
      spec.bond_couplings(bond) = 1.0 - w;
    }
    return spec;
  }
};

namespace spin_detail {

inline double z_value(std::uint64_t state, int site) {
  return (state >> site) & 1u ? -1.0 : 1.0;
}

inline double diagonal_energy(const SpinChainSpec& spec, std::uint64_t a) {
  double e = 0.0;
  for (int n = 0; n + 1 < spec.n_spins; ++n)
    e -= spec.bond_couplings(n) * z_value(a, n) * z_value(a, n + 1);
  e -= spec.h_left * z_value(a, 0);
  e += spec.h_right * z_value(a, spec.n_spins - 1);
  return e;
}

inline void apply_hamiltonian(const SpinChainSpec& spec, const Eigen::VectorXcd& in,
                              Eigen::VectorXcd& out) {
  const std::size_t dim = spec.dim();
  for (std::size_t a = 0; a < dim; ++a) out(a) = diagonal_energy(spec, a) * in(a);
  for (int n = 0; n < spec.n_spins; ++n) {
    const std::uint64_t mask = std::uint64_t{1} << n;
    for (std::size_t a = 0; a < dim; ++a) out(a) -= spec.g * in(a ^ mask);
  }
}

// Spectral radius bound from the triangle inequality.
inline double energy_bound(const SpinChainSpec& spec) {
  return spec.bond_couplings.cwiseAbs().sum() + spec.h_left + spec.h_right +
         spec.g * spec.n_spins + 0.5;
}

// Chebyshev expansion of exp(-i H dt) applied matrix-free; exact to the
// superexponential tail of J_k(R dt).
inline Eigen::VectorXcd chebyshev_evolve(const SpinChainSpec& spec, const Eigen::VectorXcd& psi,
                                         double dt) {
  if (dt == 0.0) return psi;
  const double radius = energy_bound(spec);
  const double x = radius * std::abs(dt);
  int kmax = static_cast<int>(std::ceil(x + 10.0 * std::cbrt(x + 1.0) + 40.0));
  const Eigen::VectorXd coeff = bessel_j_row(x, kmax);
  while (kmax > 1 && std::abs(coeff(kmax)) < 1e-18) --kmax;
  const double sign = dt > 0.0 ? 1.0 : -1.0;

  const std::complex<double> minus_i_pow[4] = {1.0, {0.0, -sign}, -1.0, {0.0, sign}};
  Eigen::VectorXcd prev = psi;  // T_0 psi
  Eigen::VectorXcd cur(psi.size());
  apply_hamiltonian(spec, psi, cur);
  cur /= radius;  // T_1 psi
  Eigen::VectorXcd out = coeff(0) * prev + 2.0 * coeff(1) * minus_i_pow[1] * cur;
  Eigen::VectorXcd next(psi.size());
  for (int k = 2; k <= kmax; ++k) {
    apply_hamiltonian(spec, cur, next);
    next = (2.0 / radius) * next - prev;
    prev.swap(cur);
    cur.swap(next);
    out += 2.0 * coeff(k) * minus_i_pow[k % 4] * cur;
  }
  return out;
}

// Kink distribution p_n = (1 - <sz_n sz_{n+1}>)/2 over bonds from a pure
// state, plus the total expected kink number.
inline std::pair<Eigen::VectorXd, double> kink_distribution(const SpinChainSpec& spec,
                                                            const Eigen::VectorXcd& psi) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(spec.n_bonds());
  for (std::size_t a = 0; a < spec.dim(); ++a) {
    const double weight = std::norm(psi(a));
    if (weight == 0.0) continue;
    for (int n = 0; n < spec.n_bonds(); ++n)
      p(n) += weight * 0.5 * (1.0 - z_value(a, n) * z_value(a, n + 1));
  }
  return {p, p.sum()};
}

inline std::pair<Eigen::VectorXd, double> kink_distribution_diag(const SpinChainSpec& spec,
                                                                 const Eigen::VectorXd& rho_diag) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(spec.n_bonds());
  for (std::size_t a = 0; a < spec.dim(); ++a) {
    const double weight = rho_diag(a);
    for (int n = 0; n < spec.n_bonds(); ++n)
      p(n) += weight * 0.5 * (1.0 - z_value(a, n) * z_value(a, n + 1));
  }
  return {p, p.sum()};
}

// Full dense symmetric Hamiltonian and its eigendecomposition.
struct ChainSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd modes;

  explicit ChainSpectrum(const SpinChainSpec& spec) {
    const auto dim = static_cast<Eigen::Index>(spec.dim());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      h(a, a) = diagonal_energy(spec, static_cast<std::uint64_t>(a));
      for (int n = 0; n < spec.n_spins; ++n)
        h(static_cast<Eigen::Index>(a ^ (std::uint64_t{1} << n)), a) -= spec.g;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
      throw NumericalError("ChainSpectrum: eigensolver failed");
    energies = solver.eigenvalues();
    modes = solver.eigenvectors();
  }

  Eigen::MatrixXcd propagator(double dt) const {
    Eigen::VectorXcd phases =
        (std::complex<double>(0.0, -dt) * energies.array().cast<std::complex<double>>()).exp();
    return modes * phases.asDiagonal() * modes.transpose();
  }
};

// Dense density-matrix propagation under sz dephasing: Strang splitting with
// the exact unitary half step and the exact elementwise Hamming-distance
// decay exp(-Gamma d_H(a,b) dt).
class DenseLindblad {
 public:
  DenseLindblad(const SpinChainSpec& spec, double gamma)
      : spec_(spec), gamma_(gamma), spectrum_(spec) {
    spec.validate(7);
  }

  // dt = 0 picks a step obeying dt * max|E| <= 0.05 and dt * Gamma N <= 0.1.
  void run(const Eigen::MatrixXcd& rho0, const std::vector<double>& times, double dt,
           const std::function<void(double, const Eigen::MatrixXcd&)>& observe) const {
    if (dt <= 0.0) {
      dt = 0.05 / std::max(spectrum_.energies.cwiseAbs().maxCoeff(), 1e-12);
      if (gamma_ > 0.0) dt = std::min(dt, 0.1 / (gamma_ * spec_.n_spins));
    }
    Eigen::MatrixXcd rho = rho0;
    double t = 0.0;
    for (double t_out : times) {
      const double span = t_out - t;
      if (span > 0.0) {
        const int n_steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
        const double h = span / n_steps;
        const Eigen::MatrixXcd u_half = spectrum_.propagator(0.5 * h);
        for (int k = 0; k < n_steps; ++k) {
          rho = u_half * rho * u_half.adjoint();
          apply_decay(rho, h);
          rho = u_half * rho * u_half.adjoint();
        }
        t = t_out;
      }
      observe(t_out, rho);
    }
  }

  const SpinChainSpec& spec() const { return spec_; }

 private:
  void apply_decay(Eigen::MatrixXcd& rho, double dt) const {
    const auto dim = static_cast<Eigen::Index>(spec_.dim());
    Eigen::VectorXd factor(spec_.n_spins + 1);
    for (int d = 0; d <= spec_.n_spins; ++d) factor(d) = std::exp(-gamma_ * d * dt);
    for (Eigen::Index b = 0; b < dim; ++b)
      for (Eigen::Index a = 0; a < dim; ++a)
        rho(a, b) *= factor(std::popcount(static_cast<std::uint64_t>(a ^ b)));
  }

  SpinChainSpec spec_;
  double gamma_;
  ChainSpectrum spectrum_;
};

}  // namespace spin_detail

// Product state with spins 0..bond up and the rest down: one kink on `bond`.
inline Eigen::VectorXcd single_kink_configuration(const SpinChainSpec& spec, int bond) {
  if (bond < 0 || bond >= spec.n_bonds())
    throw ConfigError("single_kink_configuration: bond out of range");
  std::uint64_t index = 0;
  for (int n = bond + 1; n < spec.n_spins; ++n) index |= std::uint64_t{1} << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(spec.dim());
  psi(index) = 1.0;
  return psi;
}

struct PureEvolution {
  ProbabilityTrace trace;            // kink distributions, renormalized
  std::vector<double> kink_numbers;  // total expected kinks per output time
  double max_kink_number = 0.0;
  bool subspace_ok = true;           // stayed within 1 + epsilon
  double energy_drift = 0.0;         // relative to the spectral bound
};

// Schroedinger evolution of the full 2^N chain from a single-kink product
// configuration. Kink-number drift above 1 + epsilon flags breakdown of the
// one-kink restriction; it is reported, not fatal.
inline PureEvolution full_evolve_pure(const SpinChainSpec& spec, int initial_bond,
                                      const std::vector<double>& times, double epsilon = 0.05) {
  spec.validate(14);
  Eigen::VectorXcd psi = single_kink_configuration(spec, initial_bond);

  PureEvolution out;
  out.trace.metadata.set("model", "spin-chain-pure");
  Eigen::VectorXcd hpsi(psi.size());
  spin_detail::apply_hamiltonian(spec, psi, hpsi);
  const double e0 = psi.dot(hpsi).real();

  double t = 0.0;
  for (double t_out : times) {
    psi = spin_detail::chebyshev_evolve(spec, psi, t_out - t);
    t = t_out;
    const double norm_dev = std::abs(psi.norm() - 1.0);
    if (norm_dev > 1e-9)
      throw NumericalError("full_evolve_pure: norm drifted by " + std::to_string(norm_dev));
    auto [p, total] = spin_detail::kink_distribution(spec, psi);
    out.kink_numbers.push_back(total);
    out.max_kink_number = std::max(out.max_kink_number, total);
    out.trace.append(t_out, p / total);

    spin_detail::apply_hamiltonian(spec, psi, hpsi);
    out.energy_drift = std::max(out.energy_drift, std::abs(psi.dot(hpsi).real() - e0) /
                                                      spin_detail::energy_bound(spec));
  }
  out.subspace_ok = out.max_kink_number <= 1.0 + epsilon;
  return out;
}

// Dense (exact) dephasing evolution of a single-kink configuration, N <= 7.
inline ProbabilityTrace full_evolve_dephasing_dense(const SpinChainSpec& spec, int initial_bond,
                                                    double gamma,
                                                    const std::vector<double>& times,
                                                    double dt = 0.0) {
  const spin_detail::DenseLindblad engine(spec, gamma);
  const Eigen::VectorXcd psi0 = single_kink_configuration(spec, initial_bond);
  ProbabilityTrace trace;
  trace.metadata.set("model", "spin-chain-dense-dephasing");
  trace.metadata.set("gamma", std::to_string(gamma));
  engine.run(Eigen::MatrixXcd(psi0 * psi0.adjoint()), times, dt,
             [&](double t, const Eigen::MatrixXcd& rho) {
               const double trace_dev = std::abs(rho.trace().real() - 1.0);
               if (trace_dev > 1e-9)
                 throw NumericalError("full_evolve_dephasing_dense: trace drift " +
                                      std::to_string(trace_dev));
               auto [p, total] =
                   spin_detail::kink_distribution_diag(engine.spec(), rho.diagonal().real());
               trace.append(t, p / total);
             });
  return trace;
}

struct TrajectoryEvolution {
  ProbabilityTrace trace;                  // mean kink distributions
  std::vector<Eigen::VectorXd> std_error;  // per output time, per bond
  int n_trajectories = 0;
};

// Stochastic unraveling of the same dephasing channel, N <= 12: first-order
// jump/no-jump with uniform total jump rate N Gamma / 2 and sz kicks at
// uniformly random sites (both sub-steps are unitary, so no renormalization
// is ever needed). Trajectory traj draws from its own counted stream seeded
// seed + traj; averaging runs in fixed chunk-then-trajectory order, so the
// result is bit-reproducible independent of threading.
inline TrajectoryEvolution full_evolve_dephasing_trajectories(
    const SpinChainSpec& spec, int initial_bond, double gamma, const std::vector<double>& times,
    int n_trajectories, std::uint64_t seed, double dt = 0.0) {
  spec.validate(12);
  if (n_trajectories < 1) throw ConfigError("need at least one trajectory");
  if (dt <= 0.0) dt = gamma > 0.0 ? 0.02 / (gamma * spec.n_spins) : 0.05;

  const int n_times = static_cast<int>(times.size());
  const int n_bonds = spec.n_bonds();
  const Eigen::VectorXcd psi0 = single_kink_configuration(spec, initial_bond);

  // Pre-build the per-interval step counts and dense one-step propagators
  // (dense diagonalization is affordable through N = 12 for the propagator
  // itself; the 2^N x 2^N matrix is reused across all trajectories).
  struct Segment {
    int n_steps = 0;
    double h = 0.0;
    double p_jump = 0.0;
    Eigen::MatrixXcd u;
  };
  const spin_detail::ChainSpectrum spectrum(spec);
  std::vector<Segment> segments(n_times);
  {
    double t = 0.0;
    for (int it = 0; it < n_times; ++it) {
      const double span = times[it] - t;
      if (span < 0.0) throw ConfigError("trajectories: times must be increasing");
      Segment& s = segments[it];
      s.n_steps = span > 0.0 ? std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12))) : 0;
      s.h = s.n_steps > 0 ? span / s.n_steps : 0.0;
      s.p_jump = 0.5 * spec.n_spins * gamma * s.h;
      if (s.n_steps > 0) s.u = spectrum.propagator(s.h);
      t = times[it];
    }
  }

  constexpr int n_chunks = 16;
  struct Accumulator {
    std::vector<Eigen::VectorXd> sum, sum_sq;
    std::vector<double> total;
  };
  std::vector<Accumulator> acc(n_chunks);
  for (auto& a : acc) {
    a.sum.assign(n_times, Eigen::VectorXd::Zero(n_bonds));
    a.sum_sq.assign(n_times, Eigen::VectorXd::Zero(n_bonds));
    a.total.assign(n_times, 0.0);
  }

  constexpr double to_unit = 0x1.0p-53;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    const int begin = static_cast<int>(static_cast<long long>(n_trajectories) * chunk / n_chunks);
    const int end = static_cast<int>(static_cast<long long>(n_trajectories) * (chunk + 1) / n_chunks);
    Eigen::VectorXcd psi(psi0.size());
    for (int traj = begin; traj < end; ++traj) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(traj));
      psi = psi0;
      for (int it = 0; it < n_times; ++it) {
        const Segment& s = segments[it];
        for (int k = 0; k < s.n_steps; ++k) {
          const double u_jump = static_cast<double>(rng() >> 11) * to_unit;
          const double u_site = static_cast<double>(rng() >> 11) * to_unit;
          psi = s.u * psi;
          if (u_jump < s.p_jump) {
            const int site = std::min(spec.n_spins - 1, static_cast<int>(u_site * spec.n_spins));
            const std::uint64_t mask = std::uint64_t{1} << site;
            for (Eigen::Index a = 0; a < psi.size(); ++a)
              if (static_cast<std::uint64_t>(a) & mask) psi(a) = -psi(a);
          }
        }
        auto [p, total] = spin_detail::kink_distribution(spec, psi);
        acc[chunk].sum[it] += p;
        acc[chunk].sum_sq[it] += p.cwiseProduct(p);
        acc[chunk].total[it] += total;
      }
    }
  }

  TrajectoryEvolution out;
  out.n_trajectories = n_trajectories;
  out.trace.metadata.set("model", "spin-chain-trajectories");
  out.trace.metadata.seed = seed;
  for (int it = 0; it < n_times; ++it) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_bonds);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n_bonds);
    double total = 0.0;
    for (int chunk = 0; chunk < n_chunks; ++chunk) {
      sum += acc[chunk].sum[it];
      sum_sq += acc[chunk].sum_sq[it];
      total += acc[chunk].total[it];
    }
    const double inv_t = 1.0 / n_trajectories;
    const Eigen::VectorXd mean = sum * inv_t;
    const double mean_total = total * inv_t;
    out.trace.append(times[it], mean / mean_total);
    Eigen::VectorXd se(n_bonds);
    for (int n = 0; n < n_bonds; ++n) {
      const double var = std::max(0.0, sum_sq(n) * inv_t - mean(n) * mean(n));
      se(n) = std::sqrt(var / n_trajectories) / mean_total;
    }
    out.std_error.push_back(std::move(se));
  }
  return out;
}

struct GhzDecay {
  std::vector<double> times;
  std::vector<double> coherence;  // C(t) = 2 |<up...up| rho |down...down>|
  double fitted_rate = 0.0;       // least-squares slope of -ln C
};

// Decoherence of the symmetric vacuum superposition (|up..up>+|down..down>)
// / sqrt(2) at g = 0: every one of the N spins imprints independently, so
// C(t) = exp(-Gamma N t) exactly and the fitted rate is Gamma N.
inline GhzDecay ghz_decoherence_demo(int n_spins, double gamma, const std::vector<double>& times) {
  SpinChainSpec spec = SpinChainSpec::make(n_spins, 0.0, {}, 0.0);
  const spin_detail::DenseLindblad engine(spec, gamma);
  const Eigen::Index top = static_cast<Eigen::Index>(spec.dim()) - 1;
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(spec.dim());
  psi0(0) = 1.0 / std::sqrt(2.0);
  psi0(top) = 1.0 / std::sqrt(2.0);

  GhzDecay out;
  engine.run(Eigen::MatrixXcd(psi0 * psi0.adjoint()), times, 0.0,
             [&](double t, const Eigen::MatrixXcd& rho) {
               out.times.push_back(t);
               out.coherence.push_back(2.0 * std::abs(rho(0, top)));
             });

  // Rate from ln C against t, skipping values that underflowed.
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    if (out.coherence[i] > 1e-280) {
      ts.push_back(out.times[i]);
      logs.push_back(std::log(out.coherence[i]));
    }
  }
  if (ts.size() >= 2) {
    Eigen::Map<Eigen::VectorXd> x(ts.data(), static_cast<Eigen::Index>(ts.size()));
    Eigen::Map<Eigen::VectorXd> y(logs.data(), static_cast<Eigen::Index>(logs.size()));
    out.fitted_rate = -fit_slope(x, y);
  }
  return out;
}

}  // namespace kinklab

#endif
