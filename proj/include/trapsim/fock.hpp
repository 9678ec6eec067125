#pragma once

// Displacement-operator matrix elements (Franck-Condon factors) over a
// truncated harmonic-oscillator number basis, plus the Gram diagnostics
// used to certify that a truncation is adequate.

#include <cmath>
#include <stdexcept>
#include <string>

#include "trapsim/types.hpp"

namespace trapsim {

/// Generalized Laguerre polynomial L_n^{(k)}(x) by the three-term
/// recurrence (n+1) L_{n+1} = (2n+k+1-x) L_n - (n+k) L_{n-1}.
/// Stable for the degrees and arguments that occur in sideband matrix
/// elements; the explicit series is kept as a test oracle only.
template <typename Scalar>
Scalar laguerre_assoc(int n, int k, Scalar x) {
  if (n < 0 || k < 0) {
    throw std::invalid_argument("laguerre_assoc: indices must be nonnegative");
  }
  if (!std::isfinite(x)) {
    throw std::invalid_argument("laguerre_assoc: argument must be finite");
  }
  if (n == 0) return Scalar(1);
  Scalar prev = Scalar(1);              // L_0
  Scalar cur = Scalar(1 + k) - x;       // L_1
  for (int j = 2; j <= n; ++j) {
    const Scalar next =
        ((Scalar(2 * j - 1 + k) - x) * cur - Scalar(j - 1 + k) * prev) /
        Scalar(j);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Number-basis matrix element of a momentum-kick displacement,
///
///   eta_{nm} = <n| exp(-i eta_ld (b + b^dag)) |m> = <n| D(-i eta_ld) |m>,
///
/// evaluated with the closed Laguerre form (see e.g. Wineland & Itano,
/// PRA 20, 1521): for p = min(n,m), q = max(n,m), dn = q - p,
///
///   eta_{nm} = (-i)^dn sqrt(p!/q!) eta^dn e^{-eta^2/2} L_p^{(dn)}(eta^2).
///
/// The factorial ratio is taken in log space so large indices do not
/// overflow. The phase (-i)^dn is the same for n>m and n<m because the
/// displacement amplitude is purely imaginary.
template <typename Scalar>
Complex<Scalar> fc_factor(int n, int m, Scalar eta_ld) {
  if (n < 0 || m < 0) {
    throw std::invalid_argument("fc_factor: indices must be nonnegative");
  }
  if (!(eta_ld >= Scalar(0))) {
    throw std::invalid_argument("fc_factor: eta_ld must be >= 0");
  }
  if (eta_ld == Scalar(0)) {
    return n == m ? Complex<Scalar>(1) : Complex<Scalar>(0);
  }
  const int p = std::min(n, m);
  const int q = std::max(n, m);
  const int dn = q - p;
  const Scalar x = eta_ld * eta_ld;
  const Scalar log_mag =
      Scalar(0.5) * (std::lgamma(Scalar(p + 1)) - std::lgamma(Scalar(q + 1))) +
      Scalar(dn) * std::log(eta_ld) - Scalar(0.5) * x;
  const Scalar mag = std::exp(log_mag) * laguerre_assoc<Scalar>(p, dn, x);
  switch (dn & 3) {
    case 0: return Complex<Scalar>(mag, 0);
    case 1: return Complex<Scalar>(0, -mag);
    case 2: return Complex<Scalar>(-mag, 0);
    default: return Complex<Scalar>(0, mag);
  }
}

/// Dense displacement matrix over the retained number basis.
/// entries(n, m) = eta_{nm}; exactly the identity at eta_ld = 0. The
/// matrix is unitary only in the untruncated limit -- callers certify a
/// given truncation with unitarity_defect below.
template <typename Scalar>
struct FranckCondonMatrix {
  Scalar eta_ld = Scalar(0);
  int n_max = 0;
  MatrixXc<Scalar> entries;

  int dim() const { return n_max + 1; }
};

template <typename Scalar>
FranckCondonMatrix<Scalar> fc_matrix(int n_max, Scalar eta_ld) {
  if (n_max < 0) {
    throw std::invalid_argument("fc_matrix: n_max must be >= 0");
  }
  FranckCondonMatrix<Scalar> fc;
  fc.eta_ld = eta_ld;
  fc.n_max = n_max;
  fc.entries.resize(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= n_max; ++m) {
      fc.entries(n, m) = fc_factor<Scalar>(n, m, eta_ld);
    }
  }
  return fc;
}

/// Max-norm deviation from the identity of the leading sub x sub block of
/// both Gram products E^dag E and E E^dag, with the contraction index
/// running over the full retained basis. Zero for an exactly unitary
/// matrix; grows toward the truncation edge, which is what makes it a
/// usable adequacy certificate for the low block actually carrying state.
template <typename Scalar>
Scalar unitarity_defect(const FranckCondonMatrix<Scalar>& fc, int sub) {
  if (sub <= 0 || sub > fc.dim()) {
    throw std::invalid_argument("unitarity_defect: sub must be in [1, n_max+1], got " +
                                std::to_string(sub));
  }
  const auto& e = fc.entries;
  const MatrixXc<Scalar> eye = MatrixXc<Scalar>::Identity(sub, sub);
  const MatrixXc<Scalar> gram_cols =
      e.leftCols(sub).adjoint() * e.leftCols(sub) - eye;
  const MatrixXc<Scalar> gram_rows =
      e.topRows(sub) * e.topRows(sub).adjoint() - eye;
  return std::max(gram_cols.cwiseAbs().maxCoeff(),
                  gram_rows.cwiseAbs().maxCoeff());
}

}  // namespace trapsim
