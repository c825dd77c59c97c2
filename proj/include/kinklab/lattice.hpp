#ifndef KINKLAB_LATTICE_HPP
#define KINKLAB_LATTICE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <string>

#include "kinklab/common.hpp"

namespace kinklab {

enum class Boundary { hard_wall, effectively_infinite };

inline std::string to_string(Boundary b) {
  return b == Boundary::hard_wall ? "hard-wall" : "effectively-infinite";
}

// Geometry and couplings of the one-kink sector. A chain of n_sites spins
// hosts the kink on its n_sites-1 links; link n sits between spins n and
// n+1 (0-based). A well of strength w at link n means the Ising bond there
// has coupling 1-w, which traps the kink with potential depth 2w. The
// hopping strength g sets the energy unit (hbar = 1).
struct LatticeSpec {
  int n_sites = 2;
  double g = 1.0;
  std::map<int, double> wells;  // link index -> w >= 0
  Boundary boundary = Boundary::hard_wall;

  int n_links() const { return n_sites - 1; }

  double max_well() const {
    double w = 0.0;
    for (const auto& [n, wn] : wells) w = std::max(w, wn);
    return w;
  }

  // The one-kink restriction requires the transverse field to be too weak
  // to mix in 3,5,... kink states: g^2 << 1 - w.
  bool tight_binding_valid(double threshold = 0.1) const {
    return g * g < threshold * (1.0 - max_well());
  }

  void validate() const {
    if (n_sites < 2) throw ConfigError("LatticeSpec: need at least 2 sites");
    if (!(g > 0.0)) throw ConfigError("LatticeSpec: g must be positive");
    for (const auto& [n, wn] : wells) {
      if (n < 0 || n >= n_links())
        throw ConfigError("LatticeSpec: well link index " + std::to_string(n) +
                          " out of range [0, " + std::to_string(n_links() - 1) + "]");
      if (wn < 0.0) throw ConfigError("LatticeSpec: well strength must be >= 0");
    }
  }
};

// Symmetric tridiagonal Hamiltonian over the kink links: every off-diagonal
// entry is -g, the diagonal entry at link n is -2*w_n (zero off the wells).
// Hard walls are a plain truncation of the tridiagonal.
struct TridiagonalHamiltonian {
  Eigen::VectorXd diagonal;
  double off_diagonal = 0.0;

  int size() const { return static_cast<int>(diagonal.size()); }

  Eigen::MatrixXd to_dense() const {
    const int m = size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      h(i, i) = diagonal(i);
      if (i + 1 < m) {
        h(i, i + 1) = off_diagonal;
        h(i + 1, i) = off_diagonal;
      }
    }
    return h;
  }

  template <typename Vec>
  Vec apply(const Vec& psi) const {
    const int m = size();
    Vec out = diagonal.asDiagonal() * psi;
    for (int i = 0; i + 1 < m; ++i) {
      out(i) += off_diagonal * psi(i + 1);
      out(i + 1) += off_diagonal * psi(i);
    }
    return out;
  }
};

inline TridiagonalHamiltonian build_hamiltonian(const LatticeSpec& spec) {
  spec.validate();
  TridiagonalHamiltonian h;
  h.diagonal = Eigen::VectorXd::Zero(spec.n_links());
  for (const auto& [n, wn] : spec.wells) h.diagonal(n) = -2.0 * wn;
  h.off_diagonal = -spec.g;
  return h;
}

// Cached eigendecomposition H = U diag(E) U^T of a tridiagonal Hamiltonian.
struct SpectralDecomposition {
  Eigen::VectorXd energies;
  Eigen::MatrixXd modes;  // columns are eigenvectors, ascending energy

  static SpectralDecomposition compute(const TridiagonalHamiltonian& h) {
    const int m = h.size();
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max(m - 1, 0), h.off_diagonal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(h.diagonal, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
      throw NumericalError("SpectralDecomposition: tridiagonal eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
  }
};

// Eigenvalues only, for large lattices where the vectors are not needed.
inline Eigen::VectorXd tridiagonal_eigenvalues(const TridiagonalHamiltonian& h) {
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max(h.size() - 1, 0), h.off_diagonal);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.diagonal, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("tridiagonal_eigenvalues: eigensolver failed");
  return solver.eigenvalues();
}

// Free-hopping eigenvalues on a hard-wall lattice of m links:
// E_k = -2g cos(k pi / (m+1)), k = 1..m.
inline double free_mode_energy(int m, int k, double g) {
  return -2.0 * g * std::cos(k * M_PI / (m + 1));
}

}  // namespace kinklab

#endif
