#pragma once

// Paired-ladder Hamiltonian of a resonantly driven two-level atom in a
// harmonic trap, written in the {|g,n>_g, |e,n>_p} basis where |n>_p are
// the recoil-displaced wave packets. H0 collects the decoupled 2x2 Rabi
// blocks; H1 is the nearest-neighbor ladder coupling inside the excited
// manifold. Joint vectors interleave the two manifolds as
//
//   index(g, n) = 2n,   index(e, n) = 2n + 1,
//
// which is the in-memory and on-disk ordering everywhere in this library.

#include <stdexcept>
#include <string>

#include "trapsim/fock.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

/// Run parameters in trap units: omega is the unit of all rates (hbar = 1),
/// rabi and detuning are multiples of omega, eta_ld = k_L * a_x is the
/// Lamb-Dicke parameter, n_max the motional truncation (inclusive).
/// The detuning convention already absorbs the photon recoil shift.
template <typename Scalar>
struct TrapConfig {
  Scalar omega = Scalar(1);
  Scalar eta_ld = Scalar(0);
  Scalar rabi = Scalar(0);
  Scalar detuning = Scalar(0);
  int n_max = 0;

  int levels() const { return n_max + 1; }
  int dim() const { return 2 * (n_max + 1); }

  void validate() const {
    if (!(omega > Scalar(0))) {
      throw std::invalid_argument("TrapConfig: omega must be > 0");
    }
    if (!(rabi >= Scalar(0))) {
      throw std::invalid_argument("TrapConfig: rabi must be >= 0");
    }
    if (!(eta_ld >= Scalar(0))) {
      throw std::invalid_argument("TrapConfig: eta_ld must be >= 0");
    }
    if (n_max < 0) {
      throw std::invalid_argument("TrapConfig: n_max must be >= 0");
    }
  }
};

/// Joint electronic+motional state: g_amps holds the ground-manifold
/// coefficients in the trap number basis, e_amps the excited-manifold
/// coefficients in the wave-packet basis. Both bases are orthonormal, so
/// |g_amps|^2 + |e_amps|^2 is the total norm.
template <typename Scalar>
struct TotalState {
  VectorXc<Scalar> g_amps;
  VectorXc<Scalar> e_amps;

  int n_max() const { return static_cast<int>(g_amps.size()) - 1; }
  int levels() const { return static_cast<int>(g_amps.size()); }
  Scalar squared_norm() const {
    return g_amps.squaredNorm() + e_amps.squaredNorm();
  }
};

template <typename Scalar>
void require_matching_levels(const TotalState<Scalar>& state, int levels,
                             const char* where) {
  if (state.g_amps.size() != levels || state.e_amps.size() != levels) {
    throw std::invalid_argument(std::string(where) +
                                ": state/config truncation mismatch");
  }
}

/// Interleave (g_amps, e_amps) into one joint vector and back.
template <typename Scalar>
VectorXc<Scalar> to_joint_vector(const TotalState<Scalar>& state) {
  const int levels = state.levels();
  if (state.e_amps.size() != levels) {
    throw std::invalid_argument("to_joint_vector: manifold size mismatch");
  }
  VectorXc<Scalar> joint(2 * levels);
  for (int n = 0; n < levels; ++n) {
    joint(2 * n) = state.g_amps(n);
    joint(2 * n + 1) = state.e_amps(n);
  }
  return joint;
}

template <typename Scalar>
TotalState<Scalar> from_joint_vector(const VectorXc<Scalar>& joint) {
  if (joint.size() % 2 != 0 || joint.size() == 0) {
    throw std::invalid_argument("from_joint_vector: odd or empty dimension");
  }
  const int levels = static_cast<int>(joint.size()) / 2;
  TotalState<Scalar> state;
  state.g_amps.resize(levels);
  state.e_amps.resize(levels);
  for (int n = 0; n < levels; ++n) {
    state.g_amps(n) = joint(2 * n);
    state.e_amps(n) = joint(2 * n + 1);
  }
  return state;
}

/// Block-diagonal part: block n is [[n w, W/2], [W/2, n w - D]] over
/// (|g,n>, |e,n>_p). Every pair Rabi-oscillates with the same frequency.
template <typename Scalar>
MatrixXc<Scalar> build_h0(const TrapConfig<Scalar>& cfg) {
  cfg.validate();
  MatrixXc<Scalar> h = MatrixXc<Scalar>::Zero(cfg.dim(), cfg.dim());
  const Scalar half_rabi = cfg.rabi / Scalar(2);
  for (int n = 0; n <= cfg.n_max; ++n) {
    const Scalar motional = Scalar(n) * cfg.omega;
    h(2 * n, 2 * n) = motional;
    h(2 * n + 1, 2 * n + 1) = motional - cfg.detuning;
    h(2 * n, 2 * n + 1) = half_rabi;
    h(2 * n + 1, 2 * n) = half_rabi;
  }
  return h;
}

/// Nearest-neighbor ladder inside the excited manifold:
/// <e,n+1| H1 |e,n> = i eta_ld w sqrt(n+1). The topmost coupling at the
/// truncation edge is kept; adequacy is the convergence check's job.
template <typename Scalar>
MatrixXc<Scalar> build_h1(const TrapConfig<Scalar>& cfg) {
  cfg.validate();
  MatrixXc<Scalar> h = MatrixXc<Scalar>::Zero(cfg.dim(), cfg.dim());
  for (int n = 0; n + 1 <= cfg.n_max; ++n) {
    const Complex<Scalar> up(Scalar(0),
                             cfg.eta_ld * cfg.omega * std::sqrt(Scalar(n + 1)));
    h(2 * (n + 1) + 1, 2 * n + 1) = up;
    h(2 * n + 1, 2 * (n + 1) + 1) = std::conj(up);
  }
  return h;
}

/// Wave-packet-basis amplitudes re-expressed in the trap number basis:
/// d_{n'} = sum_n c_n conj(eta_{n n'}), i.e. d = E^dag c. Unitary up to
/// the truncation defect of E.
template <typename Scalar>
VectorXc<Scalar> p_to_g(const VectorXc<Scalar>& e_amps,
                        const FranckCondonMatrix<Scalar>& fc) {
  if (e_amps.size() != fc.dim()) {
    throw std::invalid_argument("p_to_g: amplitude/matrix dimension mismatch");
  }
  return fc.entries.adjoint() * e_amps;
}

/// Inverse of p_to_g (adjoint map): number-basis amplitudes re-expressed
/// in the wave-packet basis, d = E c.
template <typename Scalar>
VectorXc<Scalar> g_to_p(const VectorXc<Scalar>& g_amps,
                        const FranckCondonMatrix<Scalar>& fc) {
  if (g_amps.size() != fc.dim()) {
    throw std::invalid_argument("g_to_p: amplitude/matrix dimension mismatch");
  }
  return fc.entries * g_amps;
}

}  // namespace trapsim
