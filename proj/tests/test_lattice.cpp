#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "kinklab/lattice.hpp"
#include "kinklab/numerics.hpp"
#include "kinklab/state.hpp"

using namespace kinklab;
using Catch::Matchers::WithinAbs;

TEST_CASE("free chain Hamiltonian: zero diagonal, -g hopping", "[lattice]") {
  LatticeSpec spec;
  spec.n_sites = 4;
  spec.g = 1.0;
  const auto h = build_hamiltonian(spec);
  REQUIRE(h.size() == 3);
  REQUIRE(h.diagonal.isZero(0.0));
  REQUIRE(h.off_diagonal == -1.0);
}

TEST_CASE("single weak link gives diagonal -2w at its link only", "[lattice]") {
  // 2w = 0.3 g.
  LatticeSpec spec;
  spec.n_sites = 12;
  spec.g = 1.0;
  spec.wells[5] = 0.15;
  const auto h = build_hamiltonian(spec);
  for (int n = 0; n < h.size(); ++n)
    REQUIRE_THAT(h.diagonal(n), WithinAbs(n == 5 ? -0.3 : 0.0, 0.0));
}

TEST_CASE("two weak links give two diagonal entries", "[lattice]") {
  LatticeSpec spec;
  spec.n_sites = 30;
  spec.g = 1.0;
  spec.wells[4] = 0.15;
  spec.wells[14] = 0.15;
  const auto h = build_hamiltonian(spec);
  REQUIRE_THAT(h.diagonal(4), WithinAbs(-0.3, 0.0));
  REQUIRE_THAT(h.diagonal(14), WithinAbs(-0.3, 0.0));
  REQUIRE_THAT(h.diagonal.sum(), WithinAbs(-0.6, 1e-15));
}

TEST_CASE("dense form is symmetric tridiagonal for random specs", "[lattice]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    LatticeSpec spec;
    spec.n_sites = 3 + static_cast<int>(unif(rng) * 20);
    spec.g = 0.1 + unif(rng);
    const int n_wells = static_cast<int>(unif(rng) * 3);
    for (int k = 0; k < n_wells; ++k)
      spec.wells[static_cast<int>(unif(rng) * spec.n_links())] = unif(rng);
    const Eigen::MatrixXd dense = build_hamiltonian(spec).to_dense();
    REQUIRE((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < dense.rows(); ++i)
      for (int j = 0; j < dense.cols(); ++j)
        if (std::abs(i - j) > 1) REQUIRE(dense(i, j) == 0.0);
  }
}

TEST_CASE("free spectrum matches -2g cos(k pi/(M+1))", "[lattice]") {
  LatticeSpec spec;
  spec.n_sites = 41;  // 40 links
  spec.g = 0.7;
  const auto eig = SpectralDecomposition::compute(build_hamiltonian(spec));
  for (int k = 1; k <= 40; ++k)
    REQUIRE_THAT(eig.energies(k - 1), WithinAbs(free_mode_energy(40, k, 0.7), 1e-9));
}

TEST_CASE("lattice spec validation", "[lattice]") {
  LatticeSpec spec;
  spec.n_sites = 4;
  spec.wells[7] = 0.1;  // out of range: links are 0..2
  REQUIRE_THROWS_AS(spec.validate(), ConfigError);
  spec.wells.clear();
  spec.g = 0.0;
  REQUIRE_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("tight-binding flag tracks g^2 << 1 - max w", "[lattice]") {
  LatticeSpec spec;
  spec.n_sites = 10;
  spec.g = 0.1;
  spec.wells[3] = 0.05;
  REQUIRE(spec.tight_binding_valid());
  spec.g = 0.5;
  REQUIRE_FALSE(spec.tight_binding_valid());
}

TEST_CASE("l1 distance basics", "[lattice]") {
  Eigen::VectorXd p(2), q(2);
  p << 1.0, 0.0;
  q << 0.0, 1.0;
  REQUIRE_THAT(l1_distance(p, p), WithinAbs(0.0, 0.0));
  REQUIRE_THAT(l1_distance(p, q), WithinAbs(2.0, 0.0));
  p << 0.5, 0.5;
  q << 0.6, 0.4;
  REQUIRE_THAT(l1_distance(p, q), WithinAbs(0.2, 1e-15));
  REQUIRE_THAT(l1_distance(p, q), WithinAbs(l1_distance(q, p), 0.0));
  Eigen::VectorXd longer(3);
  REQUIRE_THROWS_AS(l1_distance(p, longer), ConfigError);
}

TEST_CASE("normalize: unit norm, phase untouched, idempotent", "[lattice]") {
  using namespace std::complex_literals;
  Eigen::VectorXcd v(2);
  v << 2.0, 0.0;
  REQUIRE_THAT(std::abs(normalize(v)(0) - 1.0), WithinAbs(0.0, 1e-15));

  v << 1.0, 1i;
  const auto u = normalize(v);
  REQUIRE_THAT(std::abs(u(0) - 1.0 / std::sqrt(2.0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(u(1) - 1i / std::sqrt(2.0)), WithinAbs(0.0, 1e-15));

  REQUIRE_THROWS_AS(normalize(Eigen::VectorXcd::Zero(3)), ConfigError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd r(16);
    for (int n = 0; n < 16; ++n) r(n) = std::complex<double>(unif(rng), unif(rng));
    const auto once = normalize(r);
    const auto twice = normalize(once);
    REQUIRE((once - twice).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("exponential profile normalization against coth closed form", "[lattice]") {
  // sum_{n in Z} e^{-2 gamma |n|} = coth(gamma); checked by direct summation,
  // then used as the oracle for the normalized peak amplitude.
  const double gamma = 0.149438132473599;  // asinh(0.15)
  double direct = 1.0;
  for (int n = 1; n < 2000; ++n) direct += 2.0 * std::exp(-2.0 * gamma * n);
  const double closed = 1.0 / std::tanh(gamma);
  REQUIRE_THAT(direct, WithinAbs(closed, 1e-12));

  const int half = 2000;
  Eigen::VectorXcd profile(2 * half + 1);
  for (int n = -half; n <= half; ++n) profile(n + half) = std::exp(-gamma * std::abs(n));
  const auto unit = normalize(profile);
  REQUIRE_THAT(std::norm(unit(half)), WithinAbs(std::tanh(gamma), 1e-12));
}

TEST_CASE("density matrix invariants catch violations", "[lattice]") {
  KinkDensityMatrix rho;
  rho.entries = Eigen::MatrixXcd::Zero(3, 3);
  rho.entries(0, 0) = 1.0;
  REQUIRE_NOTHROW(rho.check_invariants());

  rho.entries(0, 1) = 0.5;  // breaks Hermiticity
  REQUIRE_THROWS_AS(rho.check_invariants(), NumericalError);
  rho.entries(1, 0) = 0.5;
  rho.entries(0, 0) = 1.2;  // breaks trace
  REQUIRE_THROWS_AS(rho.check_invariants(), NumericalError);
}

TEST_CASE("probability trace validates times and sums", "[lattice]") {
  ProbabilityTrace trace;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 0.25);
  trace.append(0.0, p);
  REQUIRE_THROWS_AS(trace.append(0.0, p), ConfigError);   // not increasing
  REQUIRE_THROWS_AS(trace.append(1.0, 2.0 * p), NumericalError);  // sum != 1
  trace.append(1.0, p);
  REQUIRE(trace.n_times() == 2);
}
