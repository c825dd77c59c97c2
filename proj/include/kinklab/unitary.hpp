#ifndef KINKLAB_UNITARY_HPP
#define KINKLAB_UNITARY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kinklab/bessel.hpp"
#include "kinklab/bound_states.hpp"
#include "kinklab/common.hpp"
#include "kinklab/lattice.hpp"
#include "kinklab/numerics.hpp"
#include "kinklab/state.hpp"

namespace kinklab {

using namespace std::complex_literals;

// Exact propagation psi(t+dt) = U exp(-i E dt) U^T psi(t) through the cached
// eigenbasis of a time-independent tridiagonal Hamiltonian.
class EigenPropagator {
 public:
  explicit EigenPropagator(const TridiagonalHamiltonian& h)
      : eig_(SpectralDecomposition::compute(h)) {}

  KinkState advance(const KinkState& psi, double dt) const {
    Eigen::VectorXcd coeffs = eig_.modes.transpose() * psi.amplitudes;
    coeffs.array() *= ((-1i * dt) * eig_.energies.array().cast<std::complex<double>>()).exp();
    KinkState out{eig_.modes * coeffs, psi.time + dt};
    out.check_normalized();
    return out;
  }

  const Eigen::VectorXd& energies() const { return eig_.energies; }
  const Eigen::MatrixXd& modes() const { return eig_.modes; }

 private:
  SpectralDecomposition eig_;
};

inline double energy_expectation(const TridiagonalHamiltonian& h, const KinkState& psi) {
  const Eigen::VectorXcd hpsi = h.apply(psi.amplitudes);
  return psi.amplitudes.dot(hpsi).real();
}

// Total probability on the outermost `band` links on either side.
inline double edge_band_mass(const KinkState& psi, int band = 20) {
  const int m = psi.n_links();
  band = std::min(band, m / 2);
  double mass = 0.0;
  for (int n = 0; n < band; ++n)
    mass += std::norm(psi.amplitudes(n)) + std::norm(psi.amplitudes(m - 1 - n));
  return mass;
}

inline void check_edge_clear(const KinkState& psi, double threshold = 1e-10) {
  const double mass = edge_band_mass(psi);
  if (mass > threshold)
    throw NumericalError("edge contact: guard-band mass " + std::to_string(mass) +
                         " at t = " + std::to_string(psi.time) +
                         "; enlarge the lattice for this simulation time");
}

// Free-hopping propagation by the exact lattice kernel
//   psi_n(t+dt) = sum_d K_d psi_{n-d}(t),  K_d = i^d J_d(2 g dt),
// on an effectively infinite lattice with all wells off. The kernel is even
// in d and is truncated only past the superexponential Bessel tail.
inline KinkState bessel_free_propagate(const KinkState& psi, const LatticeSpec& spec, double dt) {
  spec.validate();
  if (!spec.wells.empty())
    throw ConfigError("bessel_free_propagate: wells are active; kernel is free-hopping only");
  if (spec.boundary != Boundary::effectively_infinite)
    throw ConfigError("bessel_free_propagate: requires an effectively infinite lattice");
  if (dt < 0.0) throw ConfigError("bessel_free_propagate: dt must be >= 0");

  const double x = 2.0 * spec.g * dt;
  const int dmax = static_cast<int>(std::ceil(x + 10.0 * std::cbrt(x + 1.0) + 40.0));
  const Eigen::VectorXd j = bessel_j_row(x, dmax);

  const std::complex<double> i_pow[4] = {1.0, 1i, -1.0, -1i};
  Eigen::VectorXcd kernel(dmax + 1);
  for (int d = 0; d <= dmax; ++d) kernel(d) = i_pow[d % 4] * j(d);

  const int m = psi.n_links();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
  for (int n = 0; n < m; ++n) {
    std::complex<double> acc = kernel(0) * psi.amplitudes(n);
    const int reach = std::min(dmax, std::max(n, m - 1 - n));
    for (int d = 1; d <= reach; ++d) {
      std::complex<double> sum = 0.0;
      if (n - d >= 0) sum += psi.amplitudes(n - d);
      if (n + d < m) sum += psi.amplitudes(n + d);
      acc += kernel(d) * sum;
    }
    out(n) = acc;
  }

  KinkState result{std::move(out), psi.time + dt};
  if (result.norm_deviation() > 1e-8)
    throw NumericalError("bessel_free_propagate: unitarity loss " +
                         std::to_string(result.norm_deviation()));
  check_edge_clear(result);
  return result;
}

// Multiplier applied to every well depth while a trap is switched off.
struct RampSchedule {
  enum class Kind { sudden_off, linear, smooth };
  Kind kind = Kind::sudden_off;
  double duration = 0.0;

  double factor(double tau) const {
    if (kind == Kind::sudden_off || tau >= duration) return tau <= 0.0 ? 1.0 : 0.0;
    if (tau <= 0.0) return 1.0;
    const double u = tau / duration;
    if (kind == Kind::linear) return 1.0 - u;
    return 0.5 * (1.0 + std::cos(M_PI * u));
  }
};

// Second-order split-step evolution with time-dependent well depths: exact
// free half-steps through the cached eigenbasis, midpoint-sampled diagonal
// well phases in between. Exactly norm-preserving for any step size.
class SplitStepEvolver {
 public:
  explicit SplitStepEvolver(const LatticeSpec& spec) : spec_(spec) {
    LatticeSpec free_spec = spec;
    free_spec.wells.clear();
    eig_ = SpectralDecomposition::compute(build_hamiltonian(free_spec));
  }

  // Advance to t_to in n_steps equal steps; scale(link, tau) multiplies the
  // configured depth of each well. Every sub-flow is unitary, so the norm is
  // pinned back to 1 each step after checking that the per-step drift stayed
  // at rounding level.
  KinkState evolve(const KinkState& psi, double t_to, int n_steps,
                   const std::function<double(int, double)>& scale) const {
    const double dt = (t_to - psi.time) / n_steps;
    const Eigen::MatrixXcd half = propagator(0.5 * dt);
    Eigen::VectorXcd amp = psi.amplitudes;
    double t = psi.time;
    for (int k = 0; k < n_steps; ++k) {
      amp = half * amp;
      const double mid = t + 0.5 * dt;
      for (const auto& [n, wn] : spec_.wells)
        amp(n) *= std::exp(std::complex<double>(0.0, 2.0 * wn * scale(n, mid) * dt));
      amp = half * amp;
      const double norm = amp.norm();
      if (std::abs(norm - 1.0) > 1e-12)
        throw NumericalError("SplitStepEvolver: step norm drift " + std::to_string(norm - 1.0));
      amp /= norm;
      t += dt;
    }
    KinkState out{std::move(amp), t_to};
    out.check_normalized();
    return out;
  }

 private:
  Eigen::MatrixXcd propagator(double dt) const {
    Eigen::VectorXcd phases = ((-1i * dt) * eig_.energies.array().cast<std::complex<double>>()).exp();
    return eig_.modes * phases.asDiagonal() * eig_.modes.transpose();
  }

  LatticeSpec spec_;
  SpectralDecomposition eig_;
};

// Ground state psi+ of the double well, from direct diagonalization, with
// the lobes made positive.
inline KinkState prepare_psi_plus(const LatticeSpec& spec) {
  const auto [n0, L, w] = detail::double_well_links(spec);
  (void)L;
  (void)w;
  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));
  Eigen::VectorXd ground = eig.modes.col(0);
  if (ground(n0) < 0.0) ground = -ground;
  return {ground.cast<std::complex<double>>(), 0.0};
}

// Exact half-splitting omega: the two lowest levels sit at E0 -/+ omega.
inline double tunneling_omega(const LatticeSpec& spec) {
  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));
  return 0.5 * (eig.energies(1) - eig.energies(0));
}

struct AdiabaticPreparation {
  KinkState state;
  double fidelity = 0.0;  // |<psi_dyn | psi+>|^2
  bool adiabatic = false;
};

// Real-time preparation of psi+: a central well of strength 2w is smoothly
// split into the two wells of strength w over duration T (cosine ramp).
// Counts as adiabatic when the fidelity against the exact ground state
// reaches 0.99, which needs roughly T >= 20 / (2 omega).
inline AdiabaticPreparation prepare_psi_plus_dynamical(const LatticeSpec& spec, double duration,
                                                       double dt = 0.0) {
  const auto [n0, L, w] = detail::double_well_links(spec);
  if (L % 2 != 0)
    throw ConfigError("prepare_psi_plus_dynamical: needs even L so the split is symmetric");
  if (dt <= 0.0) dt = 0.01 / spec.g;
  const int n_center = n0 + L / 2;

  LatticeSpec path = spec;
  path.wells.clear();
  path.wells[n_center] = 2.0 * w;
  path.wells[n0] = w;
  path.wells[n0 + L] = w;

  LatticeSpec unsplit = path;
  unsplit.wells = {{n_center, 2.0 * w}};
  const auto initial = single_well_bound_state(unsplit);

  const int n_steps = std::max(1, static_cast<int>(std::ceil(duration / dt)));
  const SplitStepEvolver evolver(path);
  const auto scale = [&](int link, double tau) {
    const double u = std::clamp(tau / duration, 0.0, 1.0);
    const double s = 0.5 * (1.0 - std::cos(M_PI * u));  // 0 -> 1
    return link == n_center ? 1.0 - s : s;
  };

  AdiabaticPreparation out;
  out.state = evolver.evolve({initial.psi.cast<std::complex<double>>(), 0.0}, duration, n_steps, scale);
  const KinkState target = prepare_psi_plus(spec);
  out.fidelity = std::norm(target.amplitudes.dot(out.state.amplitudes));
  out.adiabatic = out.fidelity >= 0.99;
  return out;
}

// Beat-evolved bi-local state: the left-well ground state expanded in the
// two exact bound states and advanced to time t,
//   psi(t) ~ c+ e^{-i E+ t} psi+ + c- e^{-i E- t} psi-.
// At omega t = pi/4 this is the equal superposition lobe_L + i lobe_R.
inline KinkState prepare_bilocal_tunneling(const LatticeSpec& spec, double t) {
  const auto [n0, L, w] = detail::double_well_links(spec);
  (void)L;
  const double gamma0 = inverse_decay_length(w, spec.g);
  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));

  Eigen::VectorXd left(spec.n_links());
  for (int n = 0; n < spec.n_links(); ++n) left(n) = std::exp(-gamma0 * std::abs(n - n0));
  left /= left.norm();

  const double c_plus = eig.modes.col(0).dot(left);
  const double c_minus = eig.modes.col(1).dot(left);
  Eigen::VectorXcd amp =
      c_plus * std::exp(-1i * eig.energies(0) * t) * eig.modes.col(0).cast<std::complex<double>>() +
      c_minus * std::exp(-1i * eig.energies(1) * t) * eig.modes.col(1).cast<std::complex<double>>();
  amp /= amp.norm();
  return {std::move(amp), t};
}

// Interference pattern of the released psi+ superposition (asymptotic for
// 2 g gamma0^2 t >> 1):
//   p_n ~ [1 + cos((n - n0 - L/2) L / (2gt) - phase)] /
//         [1 + (n - n0 - L/2)^2 / (2 gamma0 g t)^2]^2,
// normalized over the lattice. phase = 0 matches the psi+ release; the
// bi-local phase-i preparation shifts the fringes by pi/2.
inline Eigen::VectorXd analytic_fringes(int n0, int L, double gamma0, double g, double t,
                                        int n_links, double phase = 0.0) {
  warn_if(2.0 * g * gamma0 * gamma0 * t < 5.0,
          "analytic_fringes: 2 g gamma0^2 t = " + std::to_string(2.0 * g * gamma0 * gamma0 * t) +
              " < 5; the asymptotic pattern has not formed yet");
  const double center = n0 + 0.5 * L;
  const double envelope_width = 2.0 * gamma0 * g * t;
  Eigen::VectorXd p(n_links);
  for (int n = 0; n < n_links; ++n) {
    const double x = n - center;
    const double env = 1.0 + (x / envelope_width) * (x / envelope_width);
    p(n) = (1.0 + std::cos(x * L / (2.0 * g * t) - phase)) / (env * env);
  }
  return normalize_distribution(p);
}

enum class Engine { automatic, eigen, bessel };

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::eigen: return "eigen";
    case Engine::bessel: return "bessel";
    default: return "auto";
  }
}

// Lattice for a release run: wells centered, edges beyond the ballistic
// front 2 g t plus the superexponential Bessel tail margin.
inline LatticeSpec release_lattice(double w, double g, int L, double t_max, Boundary boundary) {
  const int margin = static_cast<int>(std::ceil(8.0 * std::cbrt(g * t_max + 1.0) + 24.0));
  const int extent = static_cast<int>(std::ceil(2.0 * g * t_max)) + margin;
  LatticeSpec spec;
  spec.g = g;
  spec.boundary = boundary;
  spec.n_sites = 2 * extent + L + 2;
  if (w > 0.0) {
    spec.wells[extent] = w;
    if (L > 0) spec.wells[extent + L] = w;
  }
  spec.validate();
  return spec;
}

// Release a prepared kink state: switch the trap off according to the ramp
// schedule and record the probability distribution at the requested times.
// Norm drift beyond 1e-8, or edge contact on an effectively infinite
// lattice, aborts the run.
inline ProbabilityTrace run_release(const LatticeSpec& spec, const KinkState& initial,
                                    const RampSchedule& schedule, const std::vector<double>& times,
                                    Engine engine = Engine::automatic, double ramp_dt = 0.0) {
  spec.validate();
  initial.check_normalized(1e-8);
  if (initial.n_links() != spec.n_links())
    throw ConfigError("run_release: state and lattice sizes differ");
  if (engine == Engine::automatic)
    engine = spec.boundary == Boundary::effectively_infinite ? Engine::bessel : Engine::eigen;

  LatticeSpec free_spec = spec;
  free_spec.wells.clear();

  std::unique_ptr<EigenPropagator> eigen_prop;
  if (engine == Engine::eigen) eigen_prop = std::make_unique<EigenPropagator>(build_hamiltonian(free_spec));

  const double ramp_end = schedule.kind == RampSchedule::Kind::sudden_off ? 0.0 : schedule.duration;
  std::unique_ptr<SplitStepEvolver> stepper;
  if (ramp_end > 0.0) {
    if (ramp_dt <= 0.0) ramp_dt = 0.01 / spec.g;
    stepper = std::make_unique<SplitStepEvolver>(spec);
  }

  const auto advance_free = [&](const KinkState& psi, double dt) {
    if (dt <= 0.0) return psi;
    return engine == Engine::bessel ? bessel_free_propagate(psi, free_spec, dt)
                                    : eigen_prop->advance(psi, dt);
  };

  ProbabilityTrace trace;
  trace.metadata.spec = spec;
  trace.metadata.set("engine", to_string(engine));
  trace.metadata.set("ramp_duration", std::to_string(ramp_end));

  KinkState psi = initial;
  psi.time = 0.0;
  for (double t : times) {
    if (t < psi.time)
      throw ConfigError("run_release: output times must be increasing from 0");
    if (psi.time < ramp_end) {
      const double stop = std::min(t, ramp_end);
      if (stop > psi.time) {
        const int n_steps = std::max(1, static_cast<int>(std::ceil((stop - psi.time) / ramp_dt - 1e-12)));
        psi = stepper->evolve(psi, stop, n_steps,
                              [&](int, double tau) { return schedule.factor(tau); });
      }
    }
    if (t > psi.time) psi = advance_free(psi, t - psi.time);
    psi.check_normalized(1e-8);
    if (spec.boundary == Boundary::effectively_infinite) check_edge_clear(psi);
    trace.append(t, psi.probabilities());
  }
  return trace;
}

}  // namespace kinklab

#endif
