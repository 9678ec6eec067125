#pragma once

// Time propagation under the paired-ladder Hamiltonian. The interaction-
// picture Hamiltonian is time independent and small, so exp(-i H tau) is
// computed exactly by spectral decomposition; the decomposition is held in
// SpectralPropagator so parameter sweeps pay for it once and reuse it
// read-only across points.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "trapsim/hamiltonian.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

inline constexpr double kHermitianTol = 1e-10;

/// Pulse area theta = rabi * tau / 2 for a constant resonant drive, and
/// the duration tau that realizes it.
template <typename Scalar>
struct PulseSpec {
  Scalar theta = Scalar(0);
  Scalar tau = Scalar(0);

  static PulseSpec for_constant_drive(Scalar theta, Scalar rabi) {
    if (!(theta >= Scalar(0))) {
      throw std::invalid_argument("PulseSpec: theta must be >= 0");
    }
    if (theta == Scalar(0)) return {Scalar(0), Scalar(0)};
    if (!(rabi > Scalar(0))) {
      throw std::invalid_argument(
          "PulseSpec: rabi must be > 0 for a nonzero pulse area");
    }
    return {theta, Scalar(2) * theta / rabi};
  }
};

/// Eigendecomposition of a Hermitian matrix, applied as the exact unitary
/// exp(-i H tau). Construction rejects inputs whose Hermiticity defect
/// exceeds `tol`.
template <typename Scalar>
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const MatrixXc<Scalar>& h,
                              Scalar tol = Scalar(kHermitianTol)) {
    if (h.rows() != h.cols() || h.rows() == 0) {
      throw std::invalid_argument("SpectralPropagator: matrix must be square");
    }
    const Scalar defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (!(defect <= tol)) {
      throw IntegrityError("SpectralPropagator: Hermiticity defect " +
                           detail::format_sci(defect) + " exceeds tolerance");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> solver(h);
    if (solver.info() != Eigen::Success) {
      throw IntegrityError("SpectralPropagator: eigendecomposition failed");
    }
    evecs_ = solver.eigenvectors();
    evals_ = solver.eigenvalues();
  }

  Eigen::Index dim() const { return evals_.size(); }
  const MatrixXc<Scalar>& eigenvectors() const { return evecs_; }
  const VectorX<Scalar>& eigenvalues() const { return evals_; }

  /// Phase factors exp(-i lambda tau) in the eigenbasis.
  VectorXc<Scalar> phases(Scalar tau) const {
    VectorXc<Scalar> ph(evals_.size());
    for (Eigen::Index k = 0; k < evals_.size(); ++k) {
      const Scalar arg = -evals_(k) * tau;
      ph(k) = Complex<Scalar>(std::cos(arg), std::sin(arg));
    }
    return ph;
  }

  VectorXc<Scalar> apply(const VectorXc<Scalar>& psi, Scalar tau) const {
    if (psi.size() != dim()) {
      throw std::invalid_argument("SpectralPropagator: state dimension mismatch");
    }
    return evecs_ * phases(tau).cwiseProduct(evecs_.adjoint() * psi);
  }

  TotalState<Scalar> apply(const TotalState<Scalar>& state, Scalar tau) const {
    return from_joint_vector<Scalar>(apply(to_joint_vector(state), tau));
  }

 private:
  MatrixXc<Scalar> evecs_;
  VectorX<Scalar> evals_;
};

/// One-shot exact propagation exp(-i H tau) |state>. For repeated
/// applications at many tau, build a SpectralPropagator once instead.
template <typename Scalar>
TotalState<Scalar> propagate(const MatrixXc<Scalar>& h,
                             const TotalState<Scalar>& state, Scalar tau) {
  return SpectralPropagator<Scalar>(h).apply(state, tau);
}

/// Closed-form evolution of one resonant pair (|g,n>, |e,n>_p):
///
///   cg(tau) = e^{-i n w tau} [cg(0) cos(theta) - i ce(0) sin(theta)]
///   ce(tau) = e^{-i n w tau} [ce(0) cos(theta) - i cg(0) sin(theta)]
///
/// with omega_tau = n-independent phase advance w*tau. Resonant drive only.
template <typename Scalar>
std::pair<Complex<Scalar>, Complex<Scalar>> analytic_h0_evolution(
    Complex<Scalar> cg0, Complex<Scalar> ce0, int n, Scalar theta,
    Scalar omega_tau) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  const Scalar arg = -Scalar(n) * omega_tau;
  const Complex<Scalar> phase(std::cos(arg), std::sin(arg));
  const Complex<Scalar> mi(Scalar(0), Scalar(-1));
  return {phase * (cg0 * c + mi * ce0 * s), phase * (ce0 * c + mi * cg0 * s)};
}

/// Single-bit rotation by pulse area theta: exact propagation under H0
/// (include_h1 = false) or H0 + H1 (true). theta = 0 returns the input
/// unchanged without touching any matrix.
template <typename Scalar>
TotalState<Scalar> evolve_rotation(const TrapConfig<Scalar>& cfg,
                                   const TotalState<Scalar>& state,
                                   const PulseSpec<Scalar>& pulse,
                                   bool include_h1) {
  cfg.validate();
  require_matching_levels(state, cfg.levels(), "evolve_rotation");
  if (pulse.theta == Scalar(0)) return state;
  if (std::abs(pulse.tau * cfg.rabi / Scalar(2) - pulse.theta) >
      Scalar(1e-12) * std::max(Scalar(1), pulse.theta)) {
    throw std::invalid_argument(
        "evolve_rotation: pulse duration inconsistent with rabi frequency");
  }
  MatrixXc<Scalar> h = build_h0(cfg);
  if (include_h1) h += build_h1(cfg);
  return propagate(h, state, pulse.tau);
}

/// Drive-free wait for one trap period 2 pi / w. Both manifolds rephase to
/// their initial state up to a per-manifold global phase, exactly for the
/// ground ladder and up to truncation error for the displaced excited
/// ladder. Requires rabi = 0.
template <typename Scalar>
TotalState<Scalar> free_evolution_rephase(const TrapConfig<Scalar>& cfg,
                                          const TotalState<Scalar>& state) {
  cfg.validate();
  if (cfg.rabi != Scalar(0)) {
    throw std::invalid_argument(
        "free_evolution_rephase: drive must be off (rabi == 0)");
  }
  require_matching_levels(state, cfg.levels(), "free_evolution_rephase");
  const Scalar period = Scalar(2) * std::numbers::pi_v<Scalar> / cfg.omega;
  const MatrixXc<Scalar> h = build_h0(cfg) + build_h1(cfg);
  return propagate(h, state, period);
}

}  // namespace trapsim
