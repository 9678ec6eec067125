#pragma once

// Electronic-qubit bookkeeping: the target post-rotation density matrix,
// the partial trace over motion, state fidelity, and the closed-form
// reduced density matrices of the H0-only model. The decoherence of a
// rotation is carried entirely by quadratic forms of the displacement
// matrix in the motional amplitudes.

#include <cmath>
#include <stdexcept>
#include <string>

#include "trapsim/evolve.hpp"
#include "trapsim/fock.hpp"
#include "trapsim/hamiltonian.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

/// Electronic amplitudes alpha|g> + beta|e>, normalized to 1e-12.
template <typename Scalar>
struct QubitAmps {
  Complex<Scalar> alpha{Scalar(1), Scalar(0)};
  Complex<Scalar> beta{Scalar(0), Scalar(0)};

  void validate() const {
    const Scalar norm2 = std::norm(alpha) + std::norm(beta);
    if (std::abs(norm2 - Scalar(1)) > Scalar(1e-12)) {
      throw std::invalid_argument("QubitAmps: |alpha|^2 + |beta|^2 must be 1");
    }
  }
};

/// 2x2 electronic density matrix with Hermiticity and unit trace built
/// into the representation: only rho_gg and rho_ge are stored, so
/// rho_ee = 1 - rho_gg and rho_eg = conj(rho_ge) hold structurally.
template <typename Scalar>
struct ReducedDensity {
  Scalar rho_gg = Scalar(1);
  Complex<Scalar> rho_ge{Scalar(0), Scalar(0)};

  Scalar rho_ee() const { return Scalar(1) - rho_gg; }

  /// Eigenvalues 1/2 +- sqrt((rho_gg - 1/2)^2 + |rho_ge|^2); a physical
  /// state keeps both inside [-1e-12, 1 + 1e-12].
  Scalar min_eigenvalue() const {
    const Scalar half_gap = std::hypot(rho_gg - Scalar(0.5), std::abs(rho_ge));
    return Scalar(0.5) - half_gap;
  }

  void validate() const {
    // For a unit-trace 2x2 matrix the two eigenvalue bounds coincide:
    // min >= -tol iff max <= 1 + tol.
    if (!(min_eigenvalue() >= Scalar(-1e-12))) {
      throw IntegrityError("ReducedDensity: eigenvalues outside [0, 1]");
    }
  }
};

/// Density matrix of the ideally rotated qubit: the outer product of
/// (alpha cos(theta) - i beta sin(theta)) |g> +
/// (beta cos(theta) - i alpha sin(theta)) |e>, written directly in terms
/// of the populations/coherence it produces.
template <typename Scalar>
ReducedDensity<Scalar> target_density(const QubitAmps<Scalar>& q, Scalar theta) {
  q.validate();
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  const Complex<Scalar> ab = q.alpha * std::conj(q.beta);
  ReducedDensity<Scalar> rho;
  rho.rho_gg = std::norm(q.alpha) * c * c + std::norm(q.beta) * s * s -
               Scalar(2) * s * c * ab.imag();
  rho.rho_ge = ab * (c * c) + std::conj(ab) * (s * s) +
               Complex<Scalar>(Scalar(0), Scalar(1)) *
                   (std::norm(q.alpha) - std::norm(q.beta)) * s * c;
  return rho;
}

/// Product state (alpha|g> + beta|e>) (x) sum_n c_n |n>_g embedded in the
/// paired-ladder representation: the excited manifold carries the same
/// motional state re-expressed in the wave-packet basis. A truncation
/// that clips the displaced state shows up here as a norm defect and is
/// rejected beyond 1e-10.
template <typename Scalar>
TotalState<Scalar> make_product_state(const QubitAmps<Scalar>& q,
                                      const VectorXc<Scalar>& c,
                                      const FranckCondonMatrix<Scalar>& fc) {
  q.validate();
  if (c.size() != fc.dim()) {
    throw std::invalid_argument("make_product_state: amplitude/matrix size mismatch");
  }
  if (std::abs(c.squaredNorm() - Scalar(1)) > Scalar(1e-10)) {
    throw std::invalid_argument("make_product_state: motional state not normalized");
  }
  TotalState<Scalar> state;
  state.g_amps = q.alpha * c;
  state.e_amps = q.beta * g_to_p(c, fc);
  const Scalar defect = std::abs(state.squared_norm() - Scalar(1));
  if (defect > Scalar(1e-10)) {
    throw IntegrityError(
        "make_product_state: truncation clips the displaced state (norm defect " +
        detail::format_sci(defect) + "); enlarge n_max");
  }
  return state;
}

/// Partial trace over motion. The populations need no basis change; the
/// coherence converts the excited amplitudes to the number basis first and
/// contracts against the ground amplitudes.
template <typename Scalar>
ReducedDensity<Scalar> reduce(const TotalState<Scalar>& state,
                              const FranckCondonMatrix<Scalar>& fc) {
  if (state.levels() != fc.dim()) {
    throw std::invalid_argument("reduce: state/matrix dimension mismatch");
  }
  ReducedDensity<Scalar> rho;
  rho.rho_gg = state.g_amps.squaredNorm();
  const VectorXc<Scalar> e_in_g = p_to_g(state.e_amps, fc);
  rho.rho_ge = e_in_g.dot(state.g_amps);  // sum_n g_n conj(d_n)
  return rho;
}

/// State fidelity F = Tr(rho_t rho). Rearranged so that the maximally
/// mixed state gives exactly 1/2:
///   F = 1/2 + 2 (p - 1/2)(q - 1/2) + 2 Re(rho_t_ge conj(rho_ge)).
/// Hermiticity is structural in ReducedDensity, so the trace is real by
/// construction; positivity violations beyond 1e-8 are upstream errors,
/// smaller ones are clamped.
template <typename Scalar>
Scalar fidelity(const ReducedDensity<Scalar>& rho_t,
                const ReducedDensity<Scalar>& rho) {
  rho_t.validate();
  rho.validate();
  const Scalar f = Scalar(0.5) +
                   Scalar(2) * (rho_t.rho_gg - Scalar(0.5)) * (rho.rho_gg - Scalar(0.5)) +
                   Scalar(2) * (rho_t.rho_ge * std::conj(rho.rho_ge)).real();
  if (f < Scalar(0) || f > Scalar(1)) {
    const Scalar excess = std::max(-f, f - Scalar(1));
    if (excess > Scalar(1e-8)) {
      throw IntegrityError("fidelity: trace outside [0,1] by " +
                           detail::format_sci(excess));
    }
    return std::min(std::max(f, Scalar(0)), Scalar(1));
  }
  return f;
}

/// Decoherence parameter eta(k_L): the quadratic form c^dag E c of the
/// displacement matrix in the motional amplitudes. Identically 1 only
/// when the rotation is motion-insensitive.
template <typename Scalar>
Complex<Scalar> eta_parameter(const VectorXc<Scalar>& c,
                              const FranckCondonMatrix<Scalar>& fc) {
  if (c.size() != fc.dim()) {
    throw std::invalid_argument("eta_parameter: amplitude/matrix size mismatch");
  }
  if (std::abs(c.squaredNorm() - Scalar(1)) > Scalar(1e-10)) {
    throw std::invalid_argument("eta_parameter: motional state not normalized");
  }
  return c.dot(fc.entries * c);
}

/// Closed-form reduced density after an H0-only rotation of pulse area
/// theta with phase advance omega_tau = w tau, starting from the product
/// state with motional amplitudes c. With E the displacement matrix,
/// u = E c, and the phase-twisted vectors ct_n = e^{-i n w tau} c_n,
/// ut_n = e^{-i n w tau} u_n:
///
///   rho_gg = |a|^2 cos^2 + |b|^2 sin^2 - 2 sin cos Im(a b* eta*)
///   rho_ge = i sin cos (|a|^2 ct^dag E ct - |b|^2 ut^dag E ut)
///            + a b* cos^2 (ut^dag E ct) + a* b sin^2 (ct^dag E ut)
///
/// All four contractions collapse to eta(k_L), 1 and eta(2 k_L) when
/// sin(w tau) = 0, which recovers fast_pulse_coherence. This is bit-for-
/// bit the same contraction pattern the numeric evolve-and-trace path
/// performs, so the two agree to rounding at any truncation.
template <typename Scalar>
ReducedDensity<Scalar> analytic_reduced_density(
    const QubitAmps<Scalar>& q, Scalar theta, Scalar omega_tau,
    const VectorXc<Scalar>& c, const FranckCondonMatrix<Scalar>& fc) {
  q.validate();
  if (c.size() != fc.dim()) {
    throw std::invalid_argument(
        "analytic_reduced_density: amplitude/matrix size mismatch");
  }
  const Scalar cth = std::cos(theta);
  const Scalar sth = std::sin(theta);
  const auto& e = fc.entries;
  const VectorXc<Scalar> u = e * c;

  VectorXc<Scalar> ct(c.size()), ut(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    const Scalar arg = -Scalar(n) * omega_tau;
    const Complex<Scalar> phase(std::cos(arg), std::sin(arg));
    ct(n) = phase * c(n);
    ut(n) = phase * u(n);
  }

  const Complex<Scalar> eta_p = c.dot(e * c);
  const Complex<Scalar> ab = q.alpha * std::conj(q.beta);
  const Scalar pa = std::norm(q.alpha);
  const Scalar pb = std::norm(q.beta);

  ReducedDensity<Scalar> rho;
  rho.rho_gg = pa * cth * cth + pb * sth * sth -
               Scalar(2) * sth * cth * (ab * std::conj(eta_p)).imag();
  rho.rho_ge = Complex<Scalar>(Scalar(0), Scalar(1)) * sth * cth *
                   (pa * ct.dot(e * ct) - pb * ut.dot(e * ut)) +
               ab * (cth * cth) * ut.dot(e * ct) +
               std::conj(ab) * (sth * sth) * ct.dot(e * ut);
  return rho;
}

/// Coherence of the reduced density in the fast-pulse regime
/// (w tau << 1, or exactly at w tau = 2 pi):
///
///   I_ge = i (|a|^2 - |b|^2) sin cos eta(k_L)
///          + a b* cos^2 + a* b sin^2 eta(2 k_L),
///
/// with eta evaluated at the given Lamb-Dicke parameter and at twice it.
template <typename Scalar>
Complex<Scalar> fast_pulse_coherence(const QubitAmps<Scalar>& q, Scalar theta,
                                     const VectorXc<Scalar>& c, Scalar eta_ld) {
  q.validate();
  const int n_max = static_cast<int>(c.size()) - 1;
  if (n_max < 0) {
    throw std::invalid_argument("fast_pulse_coherence: empty amplitude vector");
  }
  const Complex<Scalar> eta1 = eta_parameter(c, fc_matrix<Scalar>(n_max, eta_ld));
  const Complex<Scalar> eta2 =
      eta_parameter(c, fc_matrix<Scalar>(n_max, Scalar(2) * eta_ld));
  const Scalar cth = std::cos(theta);
  const Scalar sth = std::sin(theta);
  const Complex<Scalar> ab = q.alpha * std::conj(q.beta);
  return Complex<Scalar>(Scalar(0), Scalar(1)) *
             (std::norm(q.alpha) - std::norm(q.beta)) * sth * cth * eta1 +
         ab * (cth * cth) + std::conj(ab) * (sth * sth) * eta2;
}

/// Precomputed machinery for one trap configuration: the displacement
/// matrix and the spectral decomposition of the drive Hamiltonian. Sweep
/// workers share one instance read-only; each fidelity evaluation is then
/// two dense mat-vecs.
template <typename Scalar>
class RotationEngine {
 public:
  RotationEngine(const TrapConfig<Scalar>& cfg, bool include_h1)
      : cfg_(cfg),
        include_h1_(include_h1),
        fc_(fc_matrix<Scalar>(cfg.n_max, cfg.eta_ld)),
        propagator_(include_h1 ? MatrixXc<Scalar>(build_h0(cfg) + build_h1(cfg))
                               : build_h0(cfg)) {}

  const TrapConfig<Scalar>& config() const { return cfg_; }
  const FranckCondonMatrix<Scalar>& fc() const { return fc_; }
  const SpectralPropagator<Scalar>& propagator() const { return propagator_; }
  bool includes_h1() const { return include_h1_; }

  TotalState<Scalar> evolved(const QubitAmps<Scalar>& q,
                             const VectorXc<Scalar>& c, Scalar theta) const {
    const TotalState<Scalar> initial = make_product_state(q, c, fc_);
    if (theta == Scalar(0)) return initial;
    const auto pulse = PulseSpec<Scalar>::for_constant_drive(theta, cfg_.rabi);
    return propagator_.apply(initial, pulse.tau);
  }

  Scalar fidelity_after_rotation(const QubitAmps<Scalar>& q,
                                 const VectorXc<Scalar>& c,
                                 Scalar theta) const {
    return fidelity(target_density(q, theta), reduce(evolved(q, c, theta), fc_));
  }

 private:
  TrapConfig<Scalar> cfg_;
  bool include_h1_;
  FranckCondonMatrix<Scalar> fc_;
  SpectralPropagator<Scalar> propagator_;
};

}  // namespace trapsim
