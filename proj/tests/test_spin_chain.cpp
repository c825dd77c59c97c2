#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "kinklab/spin_chain.hpp"
#include "kinklab/unitary.hpp"

using namespace kinklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("classical chain: kink frozen at g = 0", "[spin-chain]") {
  const SpinChainSpec spec = SpinChainSpec::make(8, 0.0, {{3, 0.05}});
  const PureEvolution out = full_evolve_pure(spec, 3, {5.0, 10.0});
  for (const auto& p : out.trace.distributions) {
    REQUIRE_THAT(p(3), WithinAbs(1.0, 1e-12));
  }
  REQUIRE(out.subspace_ok);
}

namespace {

// L1 between the full-chain kink distribution and the bare one-kink model
// at the given times.
std::vector<double> effective_model_gap(int n_spins, double g, double w,
                                        const std::vector<double>& times) {
  const int bond = (n_spins - 1) / 2;
  const SpinChainSpec spec = SpinChainSpec::make(n_spins, g, {{bond, w}});
  const PureEvolution full = full_evolve_pure(spec, bond, times);
  REQUIRE(full.subspace_ok);
  REQUIRE(full.energy_drift <= 1e-8);

  LatticeSpec effective;
  effective.n_sites = n_spins;
  effective.g = g;
  effective.wells[bond] = w;
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(effective.n_links());
  amp(bond) = 1.0;
  const EigenPropagator prop(build_hamiltonian(effective));

  std::vector<double> gaps;
  KinkState psi{amp, 0.0};
  for (std::size_t i = 0; i < times.size(); ++i) {
    psi = prop.advance(psi, times[i] - psi.time);
    gaps.push_back(l1_distance(full.trace.distributions[i], psi.probabilities()));
  }
  return gaps;
}

}  // namespace

TEST_CASE("microscopic chain matches the one-kink effective model", "[spin-chain]") {
  // Deep in the validity regime the bare effective model tracks the chain;
  // the residual shrinks with g (virtual-pair dressing and the O(g^2/4J)
  // dispersion correction both scale down).
  const std::vector<double> gaps_small =
      effective_model_gap(8, 0.05, 0.05, {50.0, 100.0, 150.0, 200.0});  // gt up to 10
  for (double gap : gaps_small) REQUIRE(gap <= 0.05);

  const std::vector<double> gaps_large = effective_model_gap(8, 0.1, 0.05, {100.0});
  REQUIRE(gaps_small[1] < gaps_large[0]);
}

TEST_CASE("pinned boundaries keep the kink number in [1, 1.05]", "[spin-chain]") {
  for (double g : {0.1, 0.125}) {
    const SpinChainSpec spec = SpinChainSpec::make(12, g, {{5, 0.05}});
    const PureEvolution out =
        full_evolve_pure(spec, 5, {50.0, 100.0, 150.0, 20.0 / g});  // gt <= 20
    for (double total : out.kink_numbers) {
      REQUIRE(total >= 1.0 - 1e-9);
      REQUIRE(total <= 1.05);
    }
    REQUIRE(out.subspace_ok);
  }
}

TEST_CASE("dense dephasing at Gamma = 0 reproduces the pure evolution", "[spin-chain]") {
  const SpinChainSpec spec = SpinChainSpec::make(6, 0.15, {{2, 0.1}});
  const std::vector<double> times = {4.0, 8.0};
  const PureEvolution pure = full_evolve_pure(spec, 2, times);
  const ProbabilityTrace dense = full_evolve_dephasing_dense(spec, 2, 0.0, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    REQUIRE(l1_distance(pure.trace.distributions[i], dense.distributions[i]) <= 1e-9);
}

TEST_CASE("dephasing commutes with the kink observable at g = 0", "[spin-chain]") {
  const SpinChainSpec spec = SpinChainSpec::make(6, 0.0, {{2, 0.1}});
  const ProbabilityTrace trace = full_evolve_dephasing_dense(spec, 2, 0.8, {2.0, 4.0});
  for (const auto& p : trace.distributions) REQUIRE_THAT(p(2), WithinAbs(1.0, 1e-12));
}

TEST_CASE("trajectory unraveling converges to the dense solution", "[spin-chain]") {
  const SpinChainSpec spec = SpinChainSpec::make(6, 0.3, {{2, 0.1}});
  const double gamma = 0.5;
  const std::vector<double> times = {2.0, 4.0, 6.0};

  const ProbabilityTrace dense = full_evolve_dephasing_dense(spec, 2, gamma, times);
  const TrajectoryEvolution sampled =
      full_evolve_dephasing_trajectories(spec, 2, gamma, times, 2000, 12345);

  for (std::size_t i = 0; i < times.size(); ++i) {
    const double l1 = l1_distance(dense.distributions[i], sampled.trace.distributions[i]);
    const double allowed = 3.0 * sampled.std_error[i].sum() + 1e-6;
    INFO("t = " << times[i] << " L1 = " << l1 << " allowed = " << allowed);
    REQUIRE(l1 <= allowed);
  }
}

TEST_CASE("trajectories are reproducible for a fixed seed", "[spin-chain]") {
  const SpinChainSpec spec = SpinChainSpec::make(5, 0.3, {{2, 0.1}});
  const TrajectoryEvolution a =
      full_evolve_dephasing_trajectories(spec, 2, 0.5, {1.0, 2.0}, 64, 99);
  const TrajectoryEvolution b =
      full_evolve_dephasing_trajectories(spec, 2, 0.5, {1.0, 2.0}, 64, 99);
  for (int i = 0; i < 2; ++i)
    REQUIRE((a.trace.distributions[i] - b.trace.distributions[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("GHZ superposition decoheres at rate Gamma N", "[spin-chain]") {
  const double gamma = 0.3;
  const GhzDecay decay = ghz_decoherence_demo(4, gamma, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
  REQUIRE_THAT(decay.fitted_rate, WithinRel(gamma * 4, 1e-6));
  for (std::size_t i = 0; i < decay.times.size(); ++i)
    REQUIRE_THAT(decay.coherence[i], WithinRel(std::exp(-gamma * 4 * decay.times[i]), 1e-9));
}

TEST_CASE("doubling N halves the GHZ coherence time", "[spin-chain]") {
  const double gamma = 0.3;
  const GhzDecay small = ghz_decoherence_demo(3, gamma, {0.0, 0.5, 1.0, 1.5, 2.0});
  const GhzDecay large = ghz_decoherence_demo(6, gamma, {0.0, 0.5, 1.0, 1.5, 2.0});
  REQUIRE_THAT(large.fitted_rate, WithinRel(2.0 * small.fitted_rate, 1e-9));
}

TEST_CASE("GHZ coherence stays at 1 without dephasing", "[spin-chain]") {
  const GhzDecay decay = ghz_decoherence_demo(4, 0.0, {0.0, 1.0, 2.0});
  for (double c : decay.coherence) REQUIRE_THAT(c, WithinAbs(1.0, 1e-12));
}

TEST_CASE("spec validation bounds the chain size per path", "[spin-chain]") {
  SpinChainSpec spec = SpinChainSpec::make(9, 0.1, {});
  REQUIRE_THROWS_AS(full_evolve_dephasing_dense(spec, 3, 0.1, {1.0}), ConfigError);  // N > 7
  REQUIRE_THROWS_AS(single_kink_configuration(spec, 12), ConfigError);
}
