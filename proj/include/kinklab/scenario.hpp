#ifndef KINKLAB_SCENARIO_HPP
#define KINKLAB_SCENARIO_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kinklab/analysis.hpp"
#include "kinklab/bessel.hpp"
#include "kinklab/bound_states.hpp"
#include "kinklab/common.hpp"
#include "kinklab/csv.hpp"
#include "kinklab/open_system.hpp"
#include "kinklab/spin_chain.hpp"
#include "kinklab/unitary.hpp"

namespace kinklab {

enum class Scenario { double_slit, decoherence, self_interference, ghz_demo, oracle_validation };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::double_slit: return "double-slit";
    case Scenario::decoherence: return "decoherence";
    case Scenario::self_interference: return "self-interference";
    case Scenario::ghz_demo: return "ghz-demo";
    case Scenario::oracle_validation: return "oracle-validation";
  }
  throw ConfigError("unknown scenario");
}

inline Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::double_slit, Scenario::decoherence, Scenario::self_interference,
                     Scenario::ghz_demo, Scenario::oracle_validation})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

// All knobs of a run. Defaults depend on the scenario and reproduce the
// standard-experiment parameters.
struct ScenarioConfig {
  Scenario scenario = Scenario::double_slit;
  // [lattice]
  double g = 1.0;
  int n_sites = 0;  // 0 = sized automatically for the simulated time
  int n_spins = 6;  // spin-chain scenarios only
  Boundary boundary = Boundary::effectively_infinite;
  // [wells]
  std::string layout = "double";  // double | single | none
  double w = 0.15;
  int separation = 100;  // L, links between the two wells
  int n0 = -1;           // first well link; -1 = centered
  std::string initial = "psi-plus";  // psi-plus | bilocal | trap-ground | delta
  // [evolution]
  double t_final = 1000.0;
  int n_outputs = 11;
  std::string engine = "auto";  // auto | eigen | bessel
  std::string ramp = "sudden-off";
  double ramp_duration = 0.0;
  double dt = 0.0;  // split-step override for ramped releases
  // [decoherence]
  double gamma = 0.0;
  double master_dt = 0.0;  // master-equation step override
  // [output]
  std::string directory = "kinksim-out";
  std::uint64_t seed = 1;
};

inline ScenarioConfig default_config(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  switch (s) {
    case Scenario::double_slit:
      break;  // double-slit release: L = 100, 2w = 0.3g, gt = 1000
    case Scenario::decoherence:
      // strong dephasing: Gamma = g/2, L = 50, 2w = 0.3g, gt = 100
      cfg.boundary = Boundary::hard_wall;
      cfg.separation = 50;
      cfg.t_final = 100.0;
      cfg.gamma = 0.5;
      cfg.engine = "eigen";
      break;
    case Scenario::self_interference:
      // 201-site kink lattice, 2w = 0.5g, release from the central trap
      cfg.boundary = Boundary::hard_wall;
      cfg.n_sites = 202;
      cfg.layout = "single";
      cfg.w = 0.25;
      cfg.separation = 0;
      cfg.initial = "trap-ground";
      cfg.t_final = 300.0;
      cfg.n_outputs = 13;
      cfg.engine = "eigen";
      break;
    case Scenario::ghz_demo:
      cfg.layout = "none";
      cfg.n_spins = 6;
      cfg.gamma = 0.25;
      cfg.t_final = 4.0;
      cfg.n_outputs = 41;
      break;
    case Scenario::oracle_validation:
      cfg.layout = "none";
      cfg.t_final = 0.0;
      cfg.n_outputs = 0;
      break;
  }
  return cfg;
}

namespace config_io {

inline std::string dump(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "# kinksim scenario configuration\n";
  out << "# scenario: " << to_string(c.scenario) << "\n";
  out << "[lattice]\n";
  out << "g = " << format_double(c.g) << "\n";
  out << "n_sites = " << c.n_sites << "\n";
  out << "n_spins = " << c.n_spins << "\n";
  out << "boundary = " << to_string(c.boundary) << "\n";
  out << "[wells]\n";
  out << "layout = " << c.layout << "\n";
  out << "w = " << format_double(c.w) << "\n";
  out << "separation = " << c.separation << "\n";
  out << "n0 = " << c.n0 << "\n";
  out << "initial = " << c.initial << "\n";
  out << "[evolution]\n";
  out << "t_final = " << format_double(c.t_final) << "\n";
  out << "n_outputs = " << c.n_outputs << "\n";
  out << "engine = " << c.engine << "\n";
  out << "ramp = " << c.ramp << "\n";
  out << "ramp_duration = " << format_double(c.ramp_duration) << "\n";
  out << "dt = " << format_double(c.dt) << "\n";
  out << "[decoherence]\n";
  out << "gamma = " << format_double(c.gamma) << "\n";
  out << "master_dt = " << format_double(c.master_dt) << "\n";
  out << "[output]\n";
  out << "directory = " << c.directory << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

inline std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number '" + value + "' for key '" + key + "'");
  }
}

inline long parse_integer(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse integer '" + value + "' for key '" + key + "'");
  }
}

// INI-style parser: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys are hard errors.
inline ScenarioConfig parse(const std::string& text, ScenarioConfig cfg) {
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "lattice" && section != "wells" && section != "evolution" &&
          section != "decoherence" && section != "output")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" +
                          section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const std::string qualified = section + "." + key;

    if (qualified == "lattice.g") cfg.g = parse_number(value, key);
    else if (qualified == "lattice.n_sites") cfg.n_sites = static_cast<int>(parse_integer(value, key));
    else if (qualified == "lattice.n_spins") cfg.n_spins = static_cast<int>(parse_integer(value, key));
    else if (qualified == "lattice.boundary") {
      if (value == "hard-wall") cfg.boundary = Boundary::hard_wall;
      else if (value == "effectively-infinite") cfg.boundary = Boundary::effectively_infinite;
      else throw ConfigError("config line " + std::to_string(line_no) + ": unknown boundary '" + value + "'");
    } else if (qualified == "wells.layout") {
      if (value != "double" && value != "single" && value != "none")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown layout '" + value + "'");
      cfg.layout = value;
    } else if (qualified == "wells.w") cfg.w = parse_number(value, key);
    else if (qualified == "wells.separation") cfg.separation = static_cast<int>(parse_integer(value, key));
    else if (qualified == "wells.n0") cfg.n0 = static_cast<int>(parse_integer(value, key));
    else if (qualified == "wells.initial") {
      if (value != "psi-plus" && value != "bilocal" && value != "trap-ground" && value != "delta")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown initial '" + value + "'");
      cfg.initial = value;
    } else if (qualified == "evolution.t_final") cfg.t_final = parse_number(value, key);
    else if (qualified == "evolution.n_outputs") cfg.n_outputs = static_cast<int>(parse_integer(value, key));
    else if (qualified == "evolution.engine") {
      if (value != "auto" && value != "eigen" && value != "bessel")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown engine '" + value + "'");
      cfg.engine = value;
    } else if (qualified == "evolution.ramp") {
      if (value != "sudden-off" && value != "linear" && value != "smooth")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown ramp '" + value + "'");
      cfg.ramp = value;
    } else if (qualified == "evolution.ramp_duration") cfg.ramp_duration = parse_number(value, key);
    else if (qualified == "evolution.dt") cfg.dt = parse_number(value, key);
    else if (qualified == "decoherence.gamma") cfg.gamma = parse_number(value, key);
    else if (qualified == "decoherence.master_dt") cfg.master_dt = parse_number(value, key);
    else if (qualified == "output.directory") cfg.directory = value;
    else if (qualified == "output.seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(value, key));
    else
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                        "' in section [" + section + "]");
  }
  return cfg;
}

inline ScenarioConfig load(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), std::move(base));
}

}  // namespace config_io

// ---------------------------------------------------------------------------
// Generic trace analysis (shared by run_scenario and the analyze command so
// the two produce bit-identical metrics files).

inline std::vector<std::pair<std::string, double>> analyze_trace(
    const ProbabilityTrace& trace, const Eigen::VectorXd* oracle_final) {
  std::vector<std::pair<std::string, double>> rows;
  const int n_times = trace.n_times();
  const Eigen::VectorXd& final = trace.final_distribution();
  rows.emplace_back("n_times", n_times);
  rows.emplace_back("n_links", static_cast<double>(final.size()));
  rows.emplace_back("final_time", trace.times.back());

  double max_sum_dev = 0.0;
  for (const auto& p : trace.distributions)
    max_sum_dev = std::max(max_sum_dev, std::abs(p.sum() - 1.0));
  rows.emplace_back("max_sum_deviation", max_sum_dev);
  rows.emplace_back("symmetry_residual", mirror_symmetry_residual(final));

  double variance_slope = 0.0;
  if (n_times >= 2) {
    Eigen::VectorXd ts(n_times), vars(n_times);
    for (int i = 0; i < n_times; ++i) {
      ts(i) = trace.times[i];
      vars(i) = distribution_variance(trace.distributions[i]);
    }
    variance_slope = fit_slope(ts, vars);
  }
  rows.emplace_back("variance_slope", variance_slope);

  // Spacing and peak statistics are computed on prominence-pruned extrema so
  // lattice-scale Bessel ripple does not masquerade as fringes.
  const AnalysisWindow window = central_envelope_window(final);
  rows.emplace_back("fringe_spacing", fringe_spacing(final, window.lo, window.hi, 0.15));
  rows.emplace_back("visibility", fringe_visibility(final, window.lo, window.hi));
  const PeakPair peaks = peak_heights(final, window.lo, window.hi, 0.15);
  rows.emplace_back("second_peak_ratio", peaks.first > 0.0 ? peaks.second / peaks.first : 0.0);

  if (oracle_final != nullptr && oracle_final->size() == final.size())
    rows.emplace_back("l1_to_oracle", l1_distance(final, *oracle_final));
  return rows;
}

// ---------------------------------------------------------------------------
// Cross-validation battery behind the oracle-validation scenario: quick
// spot checks that the independent routes agree. Each entry emits its value
// and a 0/1 pass flag.

inline std::vector<std::pair<std::string, double>> run_oracle_validation_battery() {
  std::vector<std::pair<std::string, double>> rows;
  const auto check = [&](const std::string& name, double value, double threshold) {
    rows.emplace_back(name, value);
    rows.emplace_back(name + "_threshold", threshold);
    rows.emplace_back(name + "_pass", value <= threshold ? 1.0 : 0.0);
  };

  {  // free spectrum vs -2g cos(k pi/(M+1))
    LatticeSpec spec;
    spec.n_sites = 302;
    const Eigen::VectorXd energies = tridiagonal_eigenvalues(build_hamiltonian(spec));
    double worst = 0.0;
    for (int k = 0; k < energies.size(); ++k)
      worst = std::max(worst, std::abs(energies(k) - free_mode_energy(301, k + 1, 1.0)));
    check("free_spectrum_max_err", worst, 1e-9);
  }

  {  // eigen-basis propagation vs Bessel kernel, gamma0 = 0.15 packet
    LatticeSpec spec = release_lattice(0.0, 1.0, 0, 30.0, Boundary::effectively_infinite);
    const int c = spec.n_links() / 2;
    Eigen::VectorXcd amp(spec.n_links());
    for (int n = 0; n < spec.n_links(); ++n) amp(n) = std::exp(-0.15 * std::abs(n - c));
    amp /= amp.norm();
    const KinkState psi0{amp, 0.0};
    const KinkState via_eigen = EigenPropagator(build_hamiltonian(spec)).advance(psi0, 30.0);
    const KinkState via_bessel = bessel_free_propagate(psi0, spec, 30.0);
    check("eigen_vs_bessel_l1",
          l1_distance(via_eigen.probabilities(), via_bessel.probabilities()), 1e-6);
  }

  {  // single-well energy closed form vs lowest eigenvalue, w/g grid
    double worst = 0.0;
    for (double w : {0.05, 0.15, 0.25, 0.5, 1.0}) {
      const LatticeSpec spec = bound_state_lattice(w, 1.0, 0);
      const Eigen::VectorXd energies = tridiagonal_eigenvalues(build_hamiltonian(spec));
      worst = std::max(worst, std::abs(energies(0) + 2.0 * std::sqrt(1.0 + w * w)));
    }
    check("single_well_energy_max_err", worst, 1e-8);
  }

  {  // closed-form tunneling gap vs exact eigengap at gamma0 L ~ 6.2
    const double w = 0.25;
    const int L = 25;
    const LatticeSpec spec = bound_state_lattice(w, 1.0, L);
    const Eigen::VectorXd energies = tridiagonal_eigenvalues(build_hamiltonian(spec));
    const double exact = energies(1) - energies(0);
    check("gap_ratio_err", std::abs(tunneling_gap(w, 1.0, L) / exact - 1.0), 0.01);
  }

  {  // master equation at Gamma = 0 vs pure eigen propagation
    LatticeSpec spec;
    spec.n_sites = 54;
    spec.wells = {{21, 0.15}, {31, 0.15}};
    const KinkState psi0 = prepare_psi_plus(spec);
    LatticeSpec free_spec = spec;
    free_spec.wells.clear();
    DephasingConfig mcfg;
    mcfg.output_times = {2.5, 5.0};
    const MasterResult master = evolve_master(KinkDensityMatrix::from_pure(psi0),
                                              build_hamiltonian(free_spec), mcfg);
    const ProbabilityTrace pure = run_release(spec, psi0, RampSchedule{}, {2.5, 5.0}, Engine::eigen);
    check("master_gamma0_vs_pure_l1",
          l1_distance(master.trace.final_distribution(), pure.final_distribution()), 1e-8);
  }

  {  // master equation vs strong-decoherence closure at Gamma = 10 g
    LatticeSpec spec;
    spec.n_sites = 48;
    spec.wells = {{23, 0.3}};
    const auto trap = single_well_bound_state(spec);
    const KinkState psi0{trap.psi.cast<std::complex<double>>(), 0.0};
    LatticeSpec free_spec = spec;
    free_spec.wells.clear();
    DephasingConfig mcfg;
    mcfg.gamma = 10.0;
    mcfg.output_times = {5.0};
    const MasterResult master = evolve_master(KinkDensityMatrix::from_pure(psi0),
                                              build_hamiltonian(free_spec), mcfg);
    const ProbabilityTrace reduced =
        strong_decoherence_reduced(psi0.probabilities(), 1.0, 10.0, {5.0});
    check("master_vs_strong_closure_l1",
          l1_distance(master.trace.final_distribution(), reduced.final_distribution()), 0.02);
  }

  {  // GHZ dephasing rate = Gamma N
    const GhzDecay decay = ghz_decoherence_demo(4, 0.3, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    check("ghz_rate_rel_err", std::abs(decay.fitted_rate / (0.3 * 4) - 1.0), 1e-6);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Scenario execution.

struct ScenarioReport {
  std::filesystem::path trace_csv;
  std::filesystem::path oracle_csv;
  std::filesystem::path metrics_csv;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> expectations;  // printed, not persisted
};

namespace scenario_detail {

inline std::vector<double> uniform_times(double t_final, int n_outputs) {
  if (n_outputs < 2 || !(t_final > 0.0))
    throw ConfigError("need n_outputs >= 2 and t_final > 0");
  std::vector<double> times(n_outputs);
  for (int i = 0; i < n_outputs; ++i) times[i] = t_final * i / (n_outputs - 1);
  return times;
}

// Smallest m >= m0 with m+1 7-smooth, so the DST length factors nicely.
inline int round_up_fft_friendly(int m0) {
  for (int m = m0;; ++m) {
    int n = m + 1;
    for (int p : {2, 3, 5, 7})
      while (n % p == 0) n /= p;
    if (n == 1) return m;
  }
}

template <typename Vec>
Vec align_to(const Vec& src, int src_anchor, int dst_size, int dst_anchor) {
  Vec out = Vec::Zero(dst_size);
  const int offset = dst_anchor - src_anchor;
  for (int i = 0; i < src.size(); ++i) {
    const int j = i + offset;
    if (j >= 0 && j < dst_size) out(j) = src(i);
  }
  return out;
}

// Lattice and well placement for the kink scenarios.
inline LatticeSpec build_lattice(const ScenarioConfig& cfg) {
  const int L = cfg.layout == "double" ? cfg.separation : 0;
  LatticeSpec spec;
  if (cfg.n_sites > 0) {
    spec.n_sites = cfg.n_sites;
    spec.g = cfg.g;
    spec.boundary = cfg.boundary;
    const int links = spec.n_links();
    const int first = cfg.n0 >= 0 ? cfg.n0 : (links - 1 - L) / 2;
    if (cfg.layout != "none") {
      spec.wells[first] = cfg.w;
      if (cfg.layout == "double") spec.wells[first + L] = cfg.w;
    }
  } else if (cfg.gamma > 0.0) {
    // Ballistic bound 2*(2g)*t plus the well region plus a 20-link guard,
    // rounded up so the DST length factors well.
    const int m = round_up_fft_friendly(
        static_cast<int>(std::ceil(4.0 * cfg.g * cfg.t_final)) + L + 20);
    spec.n_sites = m + 1;
    spec.g = cfg.g;
    spec.boundary = cfg.boundary;
    const int first = (m - 1 - L) / 2;
    if (cfg.layout != "none") {
      spec.wells[first] = cfg.w;
      if (cfg.layout == "double") spec.wells[first + L] = cfg.w;
    }
  } else {
    spec = release_lattice(cfg.layout == "none" ? 0.0 : cfg.w, cfg.g, L, cfg.t_final, cfg.boundary);
  }
  spec.validate();
  return spec;
}

inline int first_well(const LatticeSpec& spec) {
  if (spec.wells.empty()) throw ConfigError("scenario: no wells configured");
  return spec.wells.begin()->first;
}

// Initial state on the scenario lattice. psi+ and the bi-local state are
// computed by diagonalization on the (smaller) bound-state lattice and then
// embedded, aligned on the first well.
inline KinkState initial_state(const LatticeSpec& spec, const ScenarioConfig& cfg) {
  const int links = spec.n_links();
  if (cfg.initial == "delta") {
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(links);
    amp(spec.wells.empty() ? links / 2 : first_well(spec)) = 1.0;
    return {std::move(amp), 0.0};
  }
  if (cfg.initial == "trap-ground") {
    if (spec.wells.size() != 1)
      throw ConfigError("initial = trap-ground needs layout = single");
    const auto sol = single_well_bound_state(spec);
    return {sol.psi.cast<std::complex<double>>(), 0.0};
  }
  if (spec.wells.size() != 2)
    throw ConfigError("initial = " + cfg.initial + " needs layout = double");
  const int L = cfg.separation;
  const int anchor = first_well(spec);

  const LatticeSpec small = bound_state_lattice(cfg.w, cfg.g, L);
  if (small.n_links() >= links) {
    // The run lattice is already compact: diagonalize it directly.
    if (cfg.initial == "bilocal") {
      const double omega = tunneling_omega(spec);
      return prepare_bilocal_tunneling(spec, 0.25 * M_PI / omega);
    }
    return prepare_psi_plus(spec);
  }
  const int small_anchor = first_well(small);
  KinkState on_small = cfg.initial == "bilocal"
                           ? prepare_bilocal_tunneling(small, 0.25 * M_PI / tunneling_omega(small))
                           : prepare_psi_plus(small);
  Eigen::VectorXcd amp = align_to(on_small.amplitudes, small_anchor, links, anchor);
  amp /= amp.norm();
  return {std::move(amp), 0.0};
}

inline Engine parse_engine(const std::string& name) {
  if (name == "eigen") return Engine::eigen;
  if (name == "bessel") return Engine::bessel;
  return Engine::automatic;
}

inline RampSchedule parse_ramp(const ScenarioConfig& cfg) {
  RampSchedule ramp;
  ramp.duration = cfg.ramp_duration;
  if (cfg.ramp == "linear") ramp.kind = RampSchedule::Kind::linear;
  else if (cfg.ramp == "smooth") ramp.kind = RampSchedule::Kind::smooth;
  else ramp.kind = RampSchedule::Kind::sudden_off;
  return ramp;
}

}  // namespace scenario_detail

// Run one scenario and write trace.csv, oracle.csv (when an analytic curve
// applies) and metrics.csv into cfg.directory. The metrics file is produced
// by re-reading the emitted CSVs through the same analyzer the `analyze`
// command uses, so the two are bit-identical by construction.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  ScenarioReport report;
  fs::create_directories(cfg.directory);
  const fs::path dir = cfg.directory;

  // --- spin-chain scenarios -------------------------------------------------
  if (cfg.scenario == Scenario::ghz_demo) {
    const auto times = scenario_detail::uniform_times(cfg.t_final, cfg.n_outputs);
    const GhzDecay decay = ghz_decoherence_demo(cfg.n_spins, cfg.gamma, times);
    std::string curve = "t,c\n";
    for (std::size_t i = 0; i < decay.times.size(); ++i)
      curve += format_double(decay.times[i]) + "," + format_double(decay.coherence[i]) + "\n";
    report.trace_csv = dir / "ghz_coherence.csv";
    write_file_atomic(report.trace_csv, curve);

    const double expected = cfg.gamma * cfg.n_spins;
    report.metrics = {{"fitted_rate", decay.fitted_rate},
                      {"expected_rate", expected},
                      {"rate_rel_err", expected > 0.0
                                           ? std::abs(decay.fitted_rate - expected) / expected
                                           : std::abs(decay.fitted_rate)}};
    report.metrics_csv = dir / "metrics.csv";
    write_metrics_csv(report.metrics_csv, report.metrics);
    return report;
  }
  if (cfg.scenario == Scenario::oracle_validation) {
    report.metrics = run_oracle_validation_battery();
    report.metrics_csv = dir / "metrics.csv";
    write_metrics_csv(report.metrics_csv, report.metrics);
    for (const auto& [key, value] : report.metrics) {
      if (key.size() > 5 && key.substr(key.size() - 5) == "_pass" && value == 0.0)
        throw NumericalError("oracle-validation: check failed: " + key);
    }
    return report;
  }

  // --- kink scenarios -------------------------------------------------------
  const LatticeSpec spec = scenario_detail::build_lattice(cfg);
  const KinkState initial = scenario_detail::initial_state(spec, cfg);
  const auto times = scenario_detail::uniform_times(cfg.t_final, cfg.n_outputs);
  const int anchor = spec.wells.empty() ? spec.n_links() / 2 : scenario_detail::first_well(spec);
  const int L = cfg.layout == "double" ? cfg.separation : 0;
  const double gamma0 = inverse_decay_length(cfg.w, cfg.g);

  ProbabilityTrace trace;
  if (cfg.gamma > 0.0) {
    if (cfg.ramp != "sudden-off")
      throw ConfigError("decoherent runs support only ramp = sudden-off");
    LatticeSpec free_spec = spec;
    free_spec.wells.clear();
    DephasingConfig mcfg;
    mcfg.gamma = cfg.gamma;
    mcfg.dt = cfg.master_dt;
    mcfg.output_times = times;
    trace = evolve_master(KinkDensityMatrix::from_pure(initial), build_hamiltonian(free_spec), mcfg)
                .trace;
  } else {
    trace = run_release(spec, initial, scenario_detail::parse_ramp(cfg), times,
                        scenario_detail::parse_engine(cfg.engine), cfg.dt);
  }
  trace.metadata.spec = spec;
  trace.metadata.seed = cfg.seed;

  // Applicable analytic curve.
  ProbabilityTrace oracle;
  if (cfg.scenario == Scenario::self_interference) {
    // Delta-release reference |J_{n - n0}(2gt)|^2.
    for (double t : times) {
      const double x = 2.0 * cfg.g * t;
      const Eigen::VectorXd j = bessel_j_row(x, spec.n_links());
      Eigen::VectorXd p(spec.n_links());
      for (int n = 0; n < spec.n_links(); ++n) {
        const int d = std::abs(n - anchor);
        p(n) = d < j.size() ? j(d) * j(d) : 0.0;
      }
      oracle.append(t, normalize_distribution(p));
    }
  } else if (cfg.gamma == 0.0) {
    for (double t : times)
      if (t > 0.0)
        oracle.append(t, analytic_fringes(anchor, L, gamma0, cfg.g, t, spec.n_links()));
  } else if (cfg.gamma >= 0.2 * cfg.g) {
    // Strong decoherence: the trapped distribution diffuses with D = 2g^2/Gamma.
    const double D = 2.0 * cfg.g * cfg.g / cfg.gamma;
    const Eigen::VectorXd p0 = initial.probabilities();
    for (double t : times)
      if (t > 0.0) oracle.append(t, diffusion_oracle(p0, D, t));
  } else {
    // Weak decoherence: Lorentzian blur of the decoherence-free release,
    // computed numerically on a ballistically sized twin lattice.
    LatticeSpec pure_spec = release_lattice(cfg.w, cfg.g, L, cfg.t_final, Boundary::effectively_infinite);
    const int pure_anchor = scenario_detail::first_well(pure_spec);
    Eigen::VectorXcd amp =
        scenario_detail::align_to(initial.amplitudes, anchor, pure_spec.n_links(), pure_anchor);
    amp /= amp.norm();
    const ProbabilityTrace pure = run_release(pure_spec, {std::move(amp), 0.0}, RampSchedule{},
                                              times, Engine::bessel);
    for (int i = 0; i < pure.n_times(); ++i) {
      const Eigen::VectorXd cropped = scenario_detail::align_to(
          pure.distributions[i], pure_anchor, spec.n_links(), anchor);
      oracle.append(pure.times[i],
                    lorentzian_oracle(normalize_distribution(cropped), cfg.g, cfg.gamma,
                                      pure.times[i]));
    }
  }

  report.trace_csv = dir / "trace.csv";
  write_trace_csv(report.trace_csv, trace);
  if (oracle.n_times() > 0) {
    report.oracle_csv = dir / "oracle.csv";
    write_trace_csv(report.oracle_csv, oracle);
  }

  // Metrics from the emitted bytes, exactly as `analyze` would produce them.
  const ProbabilityTrace reread = read_trace_csv(report.trace_csv);
  std::optional<ProbabilityTrace> oracle_reread;
  if (oracle.n_times() > 0) oracle_reread = read_trace_csv(report.oracle_csv);
  const Eigen::VectorXd* oracle_final =
      oracle_reread ? &oracle_reread->final_distribution() : nullptr;
  report.metrics = analyze_trace(reread, oracle_final);
  report.metrics_csv = dir / "metrics.csv";
  write_metrics_csv(report.metrics_csv, report.metrics);

  // Closed-form reference values for the summary printout.
  if (cfg.scenario == Scenario::double_slit) {
    report.expectations.emplace_back("expected_fringe_spacing",
                                     4.0 * M_PI * cfg.g * cfg.t_final / std::max(L, 1));
    const double lg = L * gamma0;
    report.expectations.emplace_back("expected_second_peak_ratio",
                                     1.0 / std::pow(1.0 + 4.0 * M_PI * M_PI / (lg * lg), 2));
  }
  if (cfg.scenario == Scenario::decoherence && cfg.gamma > 0.0 && L > 0)
    report.expectations.emplace_back("t_dec", decoherence_time(cfg.gamma, L));
  return report;
}

// `analyze` command: recompute the metrics of a trace CSV; picks up a
// sibling oracle.csv when present so l1_to_oracle is reproduced too.
inline std::vector<std::pair<std::string, double>> analyze_file(
    const std::filesystem::path& trace_path, const std::filesystem::path& metrics_path) {
  const ProbabilityTrace trace = read_trace_csv(trace_path);
  std::optional<ProbabilityTrace> oracle;
  const std::filesystem::path sibling = trace_path.parent_path() / "oracle.csv";
  if (std::filesystem::exists(sibling)) oracle = read_trace_csv(sibling);
  const Eigen::VectorXd* oracle_final = oracle ? &oracle->final_distribution() : nullptr;
  const auto metrics = analyze_trace(trace, oracle_final);
  write_metrics_csv(metrics_path, metrics);
  return metrics;
}

}  // namespace kinklab

#endif
