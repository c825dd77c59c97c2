#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "kinklab/analysis.hpp"
#include "kinklab/unitary.hpp"

using namespace kinklab;
using Catch::Matchers::WithinAbs;

namespace {

KinkState exponential_packet(const LatticeSpec& spec, int center, double gamma) {
  Eigen::VectorXcd amp(spec.n_links());
  for (int n = 0; n < spec.n_links(); ++n) amp(n) = std::exp(-gamma * std::abs(n - center));
  amp /= amp.norm();
  return {std::move(amp), 0.0};
}

KinkState delta_state(int n_links, int at) {
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n_links);
  amp(at) = 1.0;
  return {std::move(amp), 0.0};
}

}  // namespace

TEST_CASE("eigen propagation: identity at dt = 0, unitary, energy-conserving", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 81;
  spec.wells[30] = 0.2;
  const auto h = build_hamiltonian(spec);
  const EigenPropagator prop(h);

  const KinkState psi0 = exponential_packet(spec, 40, 0.3);
  const KinkState same = prop.advance(psi0, 0.0);
  REQUIRE((same.amplitudes - psi0.amplitudes).cwiseAbs().maxCoeff() <= 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.1, 20.0);
  const double e0 = energy_expectation(h, psi0);
  for (int trial = 0; trial < 10; ++trial) {
    const KinkState evolved = prop.advance(psi0, unif(rng));
    REQUIRE(evolved.norm_deviation() <= 1e-12);
    REQUIRE(std::abs(energy_expectation(h, evolved) - e0) <= 1e-8 * 4.0 * spec.g);
  }
}

TEST_CASE("eigenstate probability distribution is stationary", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 61;
  spec.wells[20] = 0.25;
  spec.wells[40] = 0.25;
  const KinkState plus = prepare_psi_plus(spec);
  const EigenPropagator prop(build_hamiltonian(spec));
  const KinkState later = prop.advance(plus, 17.3);
  REQUIRE(l1_distance(plus.probabilities(), later.probabilities()) <= 1e-12);
}

TEST_CASE("tunneling beat equalizes the two wells at omega t = pi/4", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 81;
  const int n0 = 34, L = 12;
  spec.wells[n0] = 0.3;
  spec.wells[n0 + L] = 0.3;

  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));
  Eigen::VectorXcd amp =
      ((eig.modes.col(0) + eig.modes.col(1)) / std::sqrt(2.0)).cast<std::complex<double>>();
  KinkState psi{std::move(amp), 0.0};

  const double omega = tunneling_omega(spec);
  const EigenPropagator prop(build_hamiltonian(spec));
  const KinkState beat = prop.advance(psi, 0.25 * M_PI / omega);

  const int mid = n0 + L / 2;
  const Eigen::VectorXd p = beat.probabilities();
  double left = 0.0, right = 0.0;
  for (int n = 0; n < mid; ++n) left += p(n);
  for (int n = mid + 1; n < p.size(); ++n) right += p(n);
  left += 0.5 * p(mid);
  right += 0.5 * p(mid);
  REQUIRE_THAT(left, WithinAbs(right, 1e-6));
}

TEST_CASE("Bessel kernel: identity at t = 0 and |J_n|^2 spreading", "[unitary]") {
  const LatticeSpec spec = release_lattice(0.0, 1.0, 0, 10.0, Boundary::effectively_infinite);
  const int c = spec.n_links() / 2;
  const KinkState delta = delta_state(spec.n_links(), c);

  const KinkState still = bessel_free_propagate(delta, spec, 0.0);
  REQUIRE((still.amplitudes - delta.amplitudes).cwiseAbs().maxCoeff() == 0.0);

  const double t = 10.0;
  const KinkState spread = bessel_free_propagate(delta, spec, t);
  const Eigen::VectorXd p = spread.probabilities();
  for (int d = 0; d <= 60; ++d) {
    const double jn = std::cyl_bessel_j(d, 2.0 * t);
    REQUIRE_THAT(p(c + d), WithinAbs(jn * jn, 1e-10));
    REQUIRE_THAT(p(c - d), WithinAbs(jn * jn, 1e-10));
  }
}

TEST_CASE("eigen and Bessel engines agree on a free lattice", "[unitary]") {
  // Sized past t = 15 so the initial exponential tails clear the guard band.
  const LatticeSpec spec = release_lattice(0.0, 1.0, 0, 60.0, Boundary::effectively_infinite);
  const KinkState psi0 = exponential_packet(spec, spec.n_links() / 2, 0.15);
  const KinkState a = EigenPropagator(build_hamiltonian(spec)).advance(psi0, 15.0);
  const KinkState b = bessel_free_propagate(psi0, spec, 15.0);
  REQUIRE(l1_distance(a.probabilities(), b.probabilities()) <= 1e-6);
}

TEST_CASE("Bessel propagator refuses wells and hard walls", "[unitary]") {
  LatticeSpec walls;
  walls.n_sites = 100;
  const KinkState psi = delta_state(walls.n_links(), 50);
  REQUIRE_THROWS_AS(bessel_free_propagate(psi, walls, 1.0), ConfigError);

  LatticeSpec welled = release_lattice(0.2, 1.0, 0, 5.0, Boundary::effectively_infinite);
  const KinkState psi2 = delta_state(welled.n_links(), welled.n_links() / 2);
  REQUIRE_THROWS_AS(bessel_free_propagate(psi2, welled, 1.0), ConfigError);
}

TEST_CASE("edge contact is detected", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 62;  // far too small for t = 40
  spec.boundary = Boundary::effectively_infinite;
  const KinkState psi = delta_state(spec.n_links(), 30);
  REQUIRE_THROWS_AS(bessel_free_propagate(psi, spec, 40.0), NumericalError);
}

TEST_CASE("psi+ preparation: eigenvector, mirror-symmetric, equal lobes", "[unitary]") {
  const LatticeSpec spec = bound_state_lattice(0.15, 1.0, 50);
  const auto h = build_hamiltonian(spec);
  const KinkState plus = prepare_psi_plus(spec);

  const auto eig = SpectralDecomposition::compute(h);
  const Eigen::VectorXcd residual = h.apply(plus.amplitudes) - eig.energies(0) * plus.amplitudes;
  REQUIRE(residual.cwiseAbs().maxCoeff() <= 1e-9);

  const Eigen::VectorXd p = plus.probabilities();
  REQUIRE(mirror_symmetry_residual(p) <= 1e-10);

  const int mid = spec.n_links() / 2;
  double left = 0.0;
  for (int n = 0; n < mid; ++n) left += p(n);
  left += 0.5 * p(mid);
  REQUIRE_THAT(left, WithinAbs(0.5, 1e-6));
}

TEST_CASE("adiabatic split reaches psi+ when slow, flags when rushed", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 96;
  const int n0 = 46, L = 2;
  spec.wells[n0] = 1.0;
  spec.wells[n0 + L] = 1.0;
  const double gap = 2.0 * tunneling_omega(spec);

  const auto slow = prepare_psi_plus_dynamical(spec, 20.0 / gap);
  REQUIRE(slow.adiabatic);
  REQUIRE(slow.fidelity >= 0.99);

  const auto fast = prepare_psi_plus_dynamical(spec, 1.0 / gap);
  REQUIRE_FALSE(fast.adiabatic);
  REQUIRE(fast.fidelity < 0.99);
}

TEST_CASE("bi-local tunneling: left lobe, full transfer, equal split", "[unitary]") {
  const double w = 0.15, g = 1.0;
  const int L = 20;
  const LatticeSpec spec = bound_state_lattice(w, g, L);
  const int n0 = spec.wells.begin()->first;
  const int mid = n0 + L / 2;
  const double gamma0 = inverse_decay_length(w, g);
  const double omega = tunneling_omega(spec);

  // Midpoint link (even L) is shared half-half between the sides.
  const auto right_weight = [&](const KinkState& psi) {
    const Eigen::VectorXd p = psi.probabilities();
    double acc = 0.5 * p(mid);
    for (int n = mid + 1; n < p.size(); ++n) acc += p(n);
    return acc;
  };

  // The ideal left lobe exp(-gamma0 |n - n0|) itself carries right-half
  // weight ~ tanh(gamma0) e^{-gamma0 L}/(1 - e^{-2 gamma0}); use that scale.
  const double lobe_tail = std::exp(-gamma0 * L);
  const KinkState start = prepare_bilocal_tunneling(spec, 0.0);
  REQUIRE(right_weight(start) <= 2.0 * lobe_tail);

  const KinkState swapped = prepare_bilocal_tunneling(spec, 0.5 * M_PI / omega);
  REQUIRE(right_weight(swapped) >= 1.0 - 2.0 * lobe_tail);

  const KinkState split = prepare_bilocal_tunneling(spec, 0.25 * M_PI / omega);
  REQUIRE_THAT(right_weight(split), WithinAbs(0.5, 1e-3));
}

TEST_CASE("analytic fringe pattern: center peak, zeros, spacing, peak ratio", "[unitary]") {
  const double g = 1.0, t = 1000.0;
  const int L = 100;
  const double gamma0 = inverse_decay_length(0.15, g);
  const int n_links = 4201;
  const int n0 = (n_links - L) / 2;
  const double center = n0 + 0.5 * L;

  const Eigen::VectorXd p = analytic_fringes(n0, L, gamma0, g, t, n_links);

  const int ic = static_cast<int>(center);
  REQUIRE(p.maxCoeff() == p(ic));

  // First zero at distance 2 pi g t / L from the center.
  const double first_zero = 2.0 * M_PI * g * t / L;
  const int iz = static_cast<int>(std::round(center + first_zero));
  REQUIRE(p(iz) <= p(ic) * 1e-3);

  const auto window = central_envelope_window(p);
  const double spacing = fringe_spacing(p, window.lo, window.hi);
  REQUIRE_THAT(spacing, WithinAbs(4.0 * M_PI * g * t / L, 0.005 * spacing));

  const PeakPair peaks = peak_heights(p, window.lo, window.hi);
  const double expected_ratio = 1.0 / std::pow(1.0 + 4.0 * M_PI * M_PI / (L * gamma0 * L * gamma0), 2);
  REQUIRE_THAT(peaks.second / peaks.first, WithinAbs(expected_ratio, 0.01 * expected_ratio));

  // Quadrature phase shifts the pattern by half a fringe: center becomes a dip.
  const Eigen::VectorXd shifted = analytic_fringes(n0, L, gamma0, g, t, n_links, M_PI);
  REQUIRE(shifted(ic) < shifted(static_cast<int>(center + 0.5 * spacing)));
}

TEST_CASE("released kink on a hard-wall lattice stays mirror symmetric", "[unitary]") {
  LatticeSpec spec;
  spec.n_sites = 202;  // 201 links, center link 100
  spec.wells[100] = 0.25;

  const auto trap = single_well_bound_state(spec);
  const KinkState psi0{trap.psi.cast<std::complex<double>>(), 0.0};
  const ProbabilityTrace trace =
      run_release(spec, psi0, RampSchedule{}, {25.0, 75.0, 150.0, 300.0}, Engine::eigen);
  for (const auto& p : trace.distributions) REQUIRE(mirror_symmetry_residual(p) <= 1e-8);
}

TEST_CASE("ramped release conserves norm and reaches the free regime", "[unitary]") {
  LatticeSpec spec = release_lattice(0.3, 1.0, 0, 12.0, Boundary::effectively_infinite);
  const auto trap = single_well_bound_state(spec);
  const KinkState psi0{trap.psi.cast<std::complex<double>>(), 0.0};

  RampSchedule ramp;
  ramp.kind = RampSchedule::Kind::smooth;
  ramp.duration = 2.0;
  const ProbabilityTrace trace = run_release(spec, psi0, ramp, {1.0, 2.0, 6.0, 12.0});
  for (const auto& p : trace.distributions) REQUIRE_THAT(p.sum(), WithinAbs(1.0, 1e-8));
  // After release the packet must actually spread.
  REQUIRE(distribution_variance(trace.distributions.back()) >
          4.0 * distribution_variance(trace.distributions.front()));
}

TEST_CASE("packet release smooths Bessel jaggedness", "[unitary]") {
  const double g = 1.0, t = 100.0;
  const LatticeSpec spec = release_lattice(0.0, g, 0, t, Boundary::effectively_infinite);
  const int c = spec.n_links() / 2;

  const KinkState from_delta = bessel_free_propagate(delta_state(spec.n_links(), c), spec, t);
  const KinkState from_packet = bessel_free_propagate(exponential_packet(spec, c, 0.15), spec, t);

  const double rough = jaggedness(from_delta.probabilities());
  const double smooth = jaggedness(from_packet.probabilities());
  REQUIRE(rough >= 3.0 * smooth);
}
