#ifndef KINKLAB_OPEN_SYSTEM_HPP
#define KINKLAB_OPEN_SYSTEM_HPP

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "kinklab/common.hpp"
#include "kinklab/lattice.hpp"
#include "kinklab/numerics.hpp"
#include "kinklab/state.hpp"

namespace kinklab {

using namespace std::complex_literals;

// Integrator settings for the dephasing master equation
//   d rho_{m,n}/dt = ig (rho_{m+1,n} + rho_{m-1,n} - rho_{m,n+1} - rho_{m,n-1})
//                    - Gamma |m-n| rho_{m,n}.
struct DephasingConfig {
  double gamma = 0.0;                // per-spin dephasing rate, units of g
  double dt = 0.0;                   // 0 -> largest step the invariants allow
  std::vector<double> output_times;

  double max_dt(double g, int n_links) const {
    double limit = std::numeric_limits<double>::infinity();
    if (g > 0.0) limit = 0.1 / (4.0 * g);
    if (gamma > 0.0 && n_links > 1) limit = std::min(limit, 0.5 / (gamma * (n_links - 1)));
    return limit;
  }

  void validate(double g, int n_links) const {
    if (gamma < 0.0) throw ConfigError("DephasingConfig: gamma must be >= 0");
    if (output_times.empty()) throw ConfigError("DephasingConfig: no output times");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
      if (output_times[i] < 0.0 || (i > 0 && output_times[i] <= output_times[i - 1]))
        throw ConfigError("DephasingConfig: output times must be increasing and >= 0");
    }
    if (dt > 0.0 && dt > max_dt(g, n_links) * (1.0 + 1e-12))
      throw ConfigError("DephasingConfig: dt violates dt*4g <= 0.1 or dt*gamma*(M-1) <= 0.5");
  }
};

struct MasterResult {
  ProbabilityTrace trace;
  KinkDensityMatrix final_state;
};

namespace detail {

// Strang-split master-equation marcher. Both sub-flows are exact: the
// unitary half-steps are elementwise phases in the eigenbasis of H, the
// dephasing step an elementwise decay in the position basis. The density
// matrix is stored as separate real and imaginary parts; a free Hamiltonian
// (zero diagonal) uses the analytic sine eigenbasis through FFTW's DST-I,
// anything else a dense eigendecomposition.
class MasterEvolver {
 public:
  MasterEvolver(const KinkDensityMatrix& rho0, const TridiagonalHamiltonian& h,
                const DephasingConfig& cfg)
      : m_(h.size()), cfg_(cfg), g_(-h.off_diagonal) {
    if (rho0.entries.rows() != m_ || rho0.entries.cols() != m_)
      throw ConfigError("evolve_master: state and Hamiltonian sizes differ");
    rho0.check_invariants(1e-10, 1e-10, -1e-8);
    cfg_.validate(std::abs(g_), m_);

    re_ = rho0.entries.real();
    im_ = rho0.entries.imag();
    time_ = rho0.time;

    use_dst_ = h.diagonal.isZero(0.0);
    if (use_dst_) {
      energies_ = Eigen::VectorXd(m_);
      for (int k = 0; k < m_; ++k) energies_(k) = free_mode_energy(m_, k + 1, g_);
      const auto make_plans = [&](double* data) {
        fftw_plan cols = fftw_plan_many_r2r(1, &m_, m_, data, nullptr, 1, m_, data, nullptr, 1,
                                            m_, &kind_, FFTW_ESTIMATE);
        fftw_plan rows = fftw_plan_many_r2r(1, &m_, m_, data, nullptr, m_, 1, data, nullptr, m_,
                                            1, &kind_, FFTW_ESTIMATE);
        return std::pair{cols, rows};
      };
      std::tie(cols_re_, rows_re_) = make_plans(re_.data());
      std::tie(cols_im_, rows_im_) = make_plans(im_.data());
    } else {
      eig_ = SpectralDecomposition::compute(h);
      energies_ = eig_.energies;
    }
  }

  ~MasterEvolver() {
    if (use_dst_) {
      fftw_destroy_plan(cols_re_);
      fftw_destroy_plan(rows_re_);
      fftw_destroy_plan(cols_im_);
      fftw_destroy_plan(rows_im_);
    }
  }

  MasterEvolver(const MasterEvolver&) = delete;
  MasterEvolver& operator=(const MasterEvolver&) = delete;

  MasterResult run() {
    ProbabilityTrace trace;
    trace.metadata.set("integrator", use_dst_ ? "strang-dst" : "strang-dense");
    trace.metadata.set("gamma", std::to_string(cfg_.gamma));

    const double dt_limit = cfg_.dt > 0.0 ? cfg_.dt : cfg_.max_dt(std::abs(g_), m_);

    basis_change();  // to eigen basis
    for (double t_out : cfg_.output_times) {
      const double span = t_out - time_;
      if (span > 0.0) {
        int n_steps = 1;
        if (std::isfinite(dt_limit) && dt_limit > 0.0)
          n_steps = std::max(1, static_cast<int>(std::ceil(span / dt_limit - 1e-12)));
        const double dt = span / n_steps;
        for (int k = 0; k < n_steps; ++k) {
          apply_phases(0.5 * dt);
          basis_change();  // to position
          apply_decay(dt);
          basis_change();  // back to eigen
          apply_phases(0.5 * dt);
        }
        time_ = t_out;
      }
      emit(trace, t_out);
    }

    basis_change();  // final state in position basis
    return {std::move(trace), current_state()};
  }

 private:
  void basis_change() {
    if (use_dst_) {
#ifdef _OPENMP
#pragma omp parallel sections num_threads(2)
      {
#pragma omp section
        {
          fftw_execute(cols_re_);
          fftw_execute(rows_re_);
        }
#pragma omp section
        {
          fftw_execute(cols_im_);
          fftw_execute(rows_im_);
        }
      }
#else
      fftw_execute(cols_re_);
      fftw_execute(rows_re_);
      fftw_execute(cols_im_);
      fftw_execute(rows_im_);
#endif
      const double scale = 1.0 / (2.0 * (m_ + 1));
      re_ *= scale;
      im_ *= scale;
    } else {
      if (in_position_) {
        re_ = eig_.modes.transpose() * re_ * eig_.modes;
        im_ = eig_.modes.transpose() * im_ * eig_.modes;
      } else {
        re_ = eig_.modes * re_ * eig_.modes.transpose();
        im_ = eig_.modes * im_ * eig_.modes.transpose();
      }
    }
    in_position_ = !in_position_;
  }

  // rho~ <- diag(e^{-iEt}) rho~ diag(e^{+iEt}), elementwise rotation by
  // theta_ab = (E_a - E_b) dt built from per-mode sines/cosines.
  void apply_phases(double dt) {
    Eigen::VectorXd c(m_), s(m_);
    for (int k = 0; k < m_; ++k) {
      c(k) = std::cos(energies_(k) * dt);
      s(k) = std::sin(energies_(k) * dt);
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int b = 0; b < m_; ++b) {
      const double cb = c(b), sb = s(b);
      double* re_col = re_.col(b).data();
      double* im_col = im_.col(b).data();
      for (int a = 0; a < m_; ++a) {
        const double ct = c(a) * cb + s(a) * sb;
        const double st = s(a) * cb - c(a) * sb;
        const double r = re_col[a], i = im_col[a];
        re_col[a] = r * ct + i * st;
        im_col[a] = i * ct - r * st;
      }
    }
  }

  void apply_decay(double dt) {
    Eigen::VectorXd factor(m_);
    for (int d = 0; d < m_; ++d) factor(d) = std::exp(-cfg_.gamma * d * dt);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int n = 0; n < m_; ++n) {
      double* re_col = re_.col(n).data();
      double* im_col = im_.col(n).data();
      for (int msel = 0; msel < m_; ++msel) {
        const double f = factor(std::abs(msel - n));
        re_col[msel] *= f;
        im_col[msel] *= f;
      }
    }
  }

  KinkDensityMatrix current_state() const {
    KinkDensityMatrix rho;
    rho.time = time_;
    rho.entries = re_.cast<std::complex<double>>() + 1i * im_.cast<std::complex<double>>();
    return rho;
  }

  // Transform a copy to the position basis, record the diagonal, validate.
  void emit(ProbabilityTrace& trace, double t) {
    basis_change();  // to position
    const double trace_dev = std::abs(re_.trace() - 1.0);
    if (trace_dev > 1e-10)
      throw NumericalError("evolve_master: trace drifted by " + std::to_string(trace_dev) +
                           " at t = " + std::to_string(t));
    const double herm = (re_ - re_.transpose()).cwiseAbs().maxCoeff() +
                        (im_ + im_.transpose()).cwiseAbs().maxCoeff();
    if (herm > 1e-10)
      throw NumericalError("evolve_master: Hermiticity residual " + std::to_string(herm) +
                           " at t = " + std::to_string(t));
    const double diag_min = re_.diagonal().minCoeff();
    if (diag_min < -1e-8)
      throw NumericalError("evolve_master: negative diagonal " + std::to_string(diag_min) +
                           " at t = " + std::to_string(t));
    trace.append(t, re_.diagonal());
    basis_change();  // back to eigen
  }

  int m_;
  DephasingConfig cfg_;
  double g_ = 0.0;
  double time_ = 0.0;
  bool use_dst_ = false;
  bool in_position_ = true;
  fftw_r2r_kind kind_ = FFTW_RODFT00;
  Eigen::MatrixXd re_, im_;
  Eigen::VectorXd energies_;
  SpectralDecomposition eig_;
  fftw_plan cols_re_ = nullptr, rows_re_ = nullptr, cols_im_ = nullptr, rows_im_ = nullptr;
};

}  // namespace detail

// Evolve a kink density matrix under hopping plus local dephasing. Trace is
// preserved to 1e-10 and Hermiticity exactly by the symmetric updates; a
// diagonal entry below -1e-8 aborts with diagnostics.
inline MasterResult evolve_master(const KinkDensityMatrix& rho0, const TridiagonalHamiltonian& h,
                                  const DephasingConfig& cfg) {
  detail::MasterEvolver evolver(rho0, h, cfg);
  return evolver.run();
}

// Strong-decoherence closure: only the diagonal p_n and the imaginary part
// s_n of the first off-diagonal survive,
//   dp_n/dt = g (s_{n-1} - s_n),  ds_n/dt = -Gamma s_n - 2g (p_{n+1} - p_n),
// integrated with classic RK4. Total probability is conserved exactly by
// the telescoping flux.
inline ProbabilityTrace strong_decoherence_reduced(const Eigen::VectorXd& p0, double g,
                                                   double gamma,
                                                   const std::vector<double>& output_times,
                                                   double dt = 0.0) {
  if (gamma <= 0.0) throw ConfigError("strong_decoherence_reduced: gamma must be positive");
  warn_if(gamma < 5.0 * g, "strong_decoherence_reduced: Gamma = " + std::to_string(gamma) +
                               " is not >> g; the closure is asymptotic in Gamma/g");
  if (dt <= 0.0) dt = std::min(0.1 / gamma, 0.05 / std::max(g, 1e-12));

  const int m = static_cast<int>(p0.size());
  Eigen::VectorXd p = p0;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(std::max(m - 1, 0));

  const auto deriv = [&](const Eigen::VectorXd& pc, const Eigen::VectorXd& sc,
                         Eigen::VectorXd& dp, Eigen::VectorXd& ds) {
    for (int n = 0; n < m; ++n) {
      const double s_left = n > 0 ? sc(n - 1) : 0.0;
      const double s_right = n < m - 1 ? sc(n) : 0.0;
      dp(n) = g * (s_left - s_right);
    }
    for (int n = 0; n + 1 < m; ++n) ds(n) = -gamma * sc(n) - 2.0 * g * (pc(n + 1) - pc(n));
  };

  Eigen::VectorXd k1p(m), k2p(m), k3p(m), k4p(m);
  Eigen::VectorXd k1s(s.size()), k2s(s.size()), k3s(s.size()), k4s(s.size());

  ProbabilityTrace trace;
  trace.metadata.set("integrator", "rk4-strong-closure");
  trace.metadata.set("gamma", std::to_string(gamma));
  double t = 0.0;
  for (double t_out : output_times) {
    const double span = t_out - t;
    if (span > 0.0) {
      const int n_steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
      const double h = span / n_steps;
      for (int k = 0; k < n_steps; ++k) {
        deriv(p, s, k1p, k1s);
        deriv(p + 0.5 * h * k1p, s + 0.5 * h * k1s, k2p, k2s);
        deriv(p + 0.5 * h * k2p, s + 0.5 * h * k2s, k3p, k3s);
        deriv(p + h * k3p, s + h * k3s, k4p, k4s);
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        s += (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
      }
      t = t_out;
    }
    if (std::abs(p.sum() - 1.0) > 1e-10)
      throw NumericalError("strong_decoherence_reduced: probability drifted to " +
                           std::to_string(p.sum()));
    trace.append(t_out, p);
  }
  return trace;
}

// Lattice diffusion solution: p0 convolved with the Gaussian kernel of
// variance 2Dt (D = 2g^2/Gamma deep in the strong-decoherence regime),
// renormalized over the lattice.
inline Eigen::VectorXd diffusion_oracle(const Eigen::VectorXd& p0, double D, double t) {
  if (!(D > 0.0) || !(t > 0.0)) throw ConfigError("diffusion_oracle: need D > 0 and t > 0");
  warn_if(2.0 * D * t < 5.0, "diffusion_oracle: 2Dt = " + std::to_string(2.0 * D * t) +
                                 " < 5; the continuum Gaussian is asymptotic");
  const int m = static_cast<int>(p0.size());
  const double var = 2.0 * D * t;
  const int cut = std::min(m, static_cast<int>(std::ceil(7.0 * std::sqrt(var) + 2.0)));
  Eigen::VectorXd kernel(2 * cut + 1);
  for (int d = -cut; d <= cut; ++d) kernel(d + cut) = std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int n = 0; n < m; ++n) {
    double acc = 0.0;
    const int lo = std::max(0, n - cut), hi = std::min(m - 1, n + cut);
    for (int src = lo; src <= hi; ++src) acc += p0(src) * kernel(n - src + cut);
    out(n) = acc;
  }
  return normalize_distribution(out);
}

// Weak-decoherence closure: the decoherence-free distribution blurred by a
// Lorentzian of half-width l(t) = g Gamma t^2, the kernel normalized by its
// lattice sum. Gamma = 0 passes the input through unchanged.
inline Eigen::VectorXd lorentzian_oracle(const Eigen::VectorXd& p_pure, double g, double gamma,
                                         double t) {
  if (gamma < 0.0) throw ConfigError("lorentzian_oracle: gamma must be >= 0");
  if (gamma == 0.0) return p_pure;
  warn_if(gamma > 0.1 * g, "lorentzian_oracle: Gamma = " + std::to_string(gamma) +
                               " is not << g; the closure is asymptotic in Gamma/g");
  const double l = g * gamma * t * t;
  const int m = static_cast<int>(p_pure.size());
  Eigen::VectorXd kernel(2 * m - 1);
  for (int d = -(m - 1); d <= m - 1; ++d) kernel(d + m - 1) = l / (l * l + double(d) * d);
  kernel /= kernel.sum();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int n = 0; n < m; ++n) {
    double acc = 0.0;
    for (int src = 0; src < m; ++src) acc += p_pure(src) * kernel(src - n + m - 1);
    out(n) = acc;
  }
  return normalize_distribution(out);
}

// Time at which the Lorentzian blur overtakes the fringe spacing for an
// L-sized superposition: t_dec = 4 pi / (Gamma L).
inline double decoherence_time(double gamma, int L) {
  if (!(gamma > 0.0)) throw ConfigError("decoherence_time: gamma must be positive");
  if (L < 1) throw ConfigError("decoherence_time: L must be >= 1");
  return 4.0 * M_PI / (gamma * L);
}

}  // namespace kinklab

#endif
