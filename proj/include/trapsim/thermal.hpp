#pragma once

// Thermal motional ensembles: truncated Boltzmann weights over number
// states, the closed-form and numeric ensemble averages of the
// decoherence parameter, reproducible random-phase pure-state samples,
// and the mixture-averaged rotation fidelity.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "trapsim/fock.hpp"
#include "trapsim/qubit.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

namespace detail {

/// splitmix64 finalizer; full-period integer mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) keyed by (seed, counter): counter-based, so
/// samples are identical regardless of evaluation order.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = mix64(mix64(seed) ^ (counter + 1));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Boltzmann occupation of the trap ladder at temperature ratio
/// t_ratio = k_B T / (hbar w), truncated at n_max and renormalized.
/// renorm_defect records the discarded geometric tail mass
/// exp(-(n_max+1)/t_ratio) before renormalization; production runs keep
/// it below 1e-10 by choosing n_max accordingly. t_ratio = 0 marks the
/// ground-state (T -> 0) ensemble from ground_state_ensemble.
template <typename Scalar>
struct ThermalEnsemble {
  Scalar t_ratio = Scalar(0);
  int n_max = 0;
  VectorX<Scalar> weights;
  Scalar renorm_defect = Scalar(0);
};

template <typename Scalar>
ThermalEnsemble<Scalar> ground_state_ensemble(int n_max) {
  if (n_max < 0) {
    throw std::invalid_argument("ground_state_ensemble: n_max must be >= 0");
  }
  ThermalEnsemble<Scalar> ens;
  ens.t_ratio = Scalar(0);
  ens.n_max = n_max;
  ens.weights = VectorX<Scalar>::Zero(n_max + 1);
  ens.weights(0) = Scalar(1);
  ens.renorm_defect = Scalar(0);
  return ens;
}

template <typename Scalar>
ThermalEnsemble<Scalar> thermal_weights(Scalar t_ratio, int n_max) {
  if (!(t_ratio > Scalar(0))) {
    throw std::invalid_argument(
        "thermal_weights: t_ratio must be > 0 (use ground_state_ensemble for T -> 0)");
  }
  if (n_max < 0) {
    throw std::invalid_argument("thermal_weights: n_max must be >= 0");
  }
  ThermalEnsemble<Scalar> ens;
  ens.t_ratio = t_ratio;
  ens.n_max = n_max;
  ens.weights.resize(n_max + 1);
  const Scalar ratio = std::exp(-Scalar(1) / t_ratio);
  const Scalar head = Scalar(1) - ratio;
  Scalar w = head;
  Scalar sum = Scalar(0);
  for (int n = 0; n <= n_max; ++n) {
    ens.weights(n) = w;
    sum += w;
    w *= ratio;
  }
  ens.renorm_defect = std::exp(-Scalar(n_max + 1) / t_ratio);
  ens.weights /= sum;
  return ens;
}

/// Ensemble average of the decoherence parameter in closed form:
/// <eta(k_L)> = exp(-1/2 eta_ld^2 coth(1/(2 t_ratio))).
template <typename Scalar>
Scalar mean_eta_closed_form(Scalar t_ratio, Scalar eta_ld) {
  if (!(t_ratio > Scalar(0))) {
    throw std::invalid_argument("mean_eta_closed_form: t_ratio must be > 0");
  }
  const Scalar half_beta = Scalar(1) / (Scalar(2) * t_ratio);
  const Scalar coth = Scalar(1) / std::tanh(half_beta);
  return std::exp(-Scalar(0.5) * eta_ld * eta_ld * coth);
}

/// Same average evaluated term by term: the weighted sum of the diagonal
/// displacement elements, which are real for a momentum-kick displacement.
template <typename Scalar>
Scalar mean_eta_numeric(const ThermalEnsemble<Scalar>& ens,
                        const FranckCondonMatrix<Scalar>& fc) {
  if (ens.weights.size() != fc.dim()) {
    throw std::invalid_argument("mean_eta_numeric: ensemble/matrix size mismatch");
  }
  Scalar acc = Scalar(0);
  for (int n = 0; n <= ens.n_max; ++n) {
    acc += ens.weights(n) * fc.entries(n, n).real();
  }
  return acc;
}

/// Pure-state sample c_n = sqrt(w_n) e^{-i phi_n} with phases phi_n
/// uniform in [0, 2 pi), keyed by (seed, n). Deterministic for a fixed
/// seed and independent of evaluation order.
template <typename Scalar>
VectorXc<Scalar> sample_random_phase_state(const ThermalEnsemble<Scalar>& ens,
                                           std::uint64_t seed) {
  VectorXc<Scalar> c(ens.weights.size());
  for (int n = 0; n <= ens.n_max; ++n) {
    const Scalar phi =
        Scalar(2) * std::numbers::pi_v<Scalar> *
        Scalar(detail::keyed_uniform(seed, static_cast<std::uint64_t>(n)));
    c(n) = std::sqrt(ens.weights(n)) *
           Complex<Scalar>(std::cos(phi), -std::sin(phi));
  }
  c /= std::sqrt(c.squaredNorm());
  return c;
}

/// Rotation fidelity from a thermal motional mixture, evaluated with the
/// shared engine: F = sum_n w_n F_n with F_n the fidelity starting from
/// the pure number state |n>_g. Exact for a diagonal mixture by linearity
/// of evolution and trace, and equal in expectation to the random-phase
/// ensemble average. Summation order is fixed (ascending n) so results
/// are bit-stable.
template <typename Scalar>
Scalar thermal_fidelity(const RotationEngine<Scalar>& engine,
                        const ThermalEnsemble<Scalar>& ens,
                        const QubitAmps<Scalar>& q, Scalar theta) {
  const int levels = engine.config().levels();
  if (ens.n_max + 1 > levels) {
    throw std::invalid_argument(
        "thermal_fidelity: ensemble support exceeds the motional truncation");
  }
  Scalar acc = Scalar(0);
  VectorXc<Scalar> c = VectorXc<Scalar>::Zero(levels);
  for (int n = 0; n <= ens.n_max; ++n) {
    c(n) = Complex<Scalar>(1);
    acc += ens.weights(n) * engine.fidelity_after_rotation(q, c, theta);
    c(n) = Complex<Scalar>(0);
  }
  return acc;
}

/// Convenience overload building the full-model engine (H0 + H1).
template <typename Scalar>
Scalar thermal_fidelity(const TrapConfig<Scalar>& cfg,
                        const ThermalEnsemble<Scalar>& ens,
                        const QubitAmps<Scalar>& q, Scalar theta) {
  return thermal_fidelity(RotationEngine<Scalar>(cfg, /*include_h1=*/true), ens,
                          q, theta);
}

}  // namespace trapsim
