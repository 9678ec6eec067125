#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "trapsim/fock.hpp"

using namespace trapsim;

namespace {
const double kEtaGrid[] = {0.1, 0.3, 1.0};
}

TEST_SUITE_BEGIN("fock");

TEST_CASE("laguerre_assoc degree zero is 1") {
  for (int k : {0, 1, 5, 10}) {
    for (double x : {0.0, 0.5, 3.0, 10.0}) {
      CHECK(laguerre_assoc(0, k, x) == 1.0);
    }
  }
}

TEST_CASE("laguerre_assoc matches explicit low-degree values") {
  CHECK(laguerre_assoc(1, 1, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
  // x^2/2 - 2x + 1 at x = 2
  CHECK(laguerre_assoc(2, 0, 2.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("laguerre_assoc agrees with the series oracle") {
  for (int n = 0; n <= 30; ++n) {
    for (int k = 0; k <= 10; k += 2) {
      for (double x : {0.1, 0.5, 1.0, 2.5, 5.0, 7.5, 10.0}) {
        const double got = laguerre_assoc(n, k, x);
        const double want = oracles::laguerre_series(n, k, x);
        CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("laguerre_assoc rejects bad input") {
  CHECK_THROWS_AS(laguerre_assoc(-1, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(laguerre_assoc(0, -2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(laguerre_assoc(2, 0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(laguerre_assoc(2, 0, double(INFINITY)), std::invalid_argument);
}

TEST_CASE("fc_factor at zero displacement is the identity") {
  for (int n = 0; n < 6; ++n) {
    for (int m = 0; m < 6; ++m) {
      CHECK(fc_factor<double>(n, m, 0.0) ==
            std::complex<double>(n == m ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("fc_factor pinned low elements") {
  const auto e00 = fc_factor<double>(0, 0, 0.3);
  CHECK(e00.real() == doctest::Approx(std::exp(-0.045)).epsilon(1e-14));
  CHECK(e00.imag() == 0.0);

  const auto e10 = fc_factor<double>(1, 0, 0.3);
  CHECK(e10.real() == 0.0);
  CHECK(e10.imag() == doctest::Approx(-0.3 * std::exp(-0.045)).epsilon(1e-14));
}

TEST_CASE("fc_factor rejects negative indices and negative eta") {
  CHECK_THROWS_AS(fc_factor<double>(-1, 0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(fc_factor<double>(0, -3, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(fc_factor<double>(0, 0, -0.1), std::invalid_argument);
}

TEST_CASE("fc_factor agrees with the spectral displacement oracle") {
  const oracles::DisplacementOracle oracle(60);
  for (double eta : kEtaGrid) {
    for (int n = 0; n <= 20; ++n) {
      for (int m = 0; m <= 20; ++m) {
        const auto got = fc_factor<double>(n, m, eta);
        const auto want = oracle.element(n, m, eta);
        CHECK(std::abs(got - want) <= 1e-9);
      }
    }
  }
}

TEST_CASE("fc_factor transpose conjugation picks up (-1)^(n-m)") {
  for (double eta : kEtaGrid) {
    for (int n = 0; n <= 20; ++n) {
      for (int m = 0; m <= 20; ++m) {
        const auto a = fc_factor<double>(n, m, eta);
        const auto b = fc_factor<double>(m, n, eta);
        const double sign = ((n - m) % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::abs(b - sign * std::conj(a)) <= 1e-14);
      }
    }
  }
}

TEST_CASE("fc_matrix at eta 0 is the identity") {
  const auto fc = fc_matrix<double>(5, 0.0);
  CHECK(fc.dim() == 6);
  CHECK((fc.entries - MatrixXc<double>::Identity(6, 6)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("fc_matrix entries are fc_factor values with adjoint pairing") {
  const auto fc = fc_matrix<double>(1, 0.3);
  CHECK(fc.entries(0, 0) == fc_factor<double>(0, 0, 0.3));
  CHECK(fc.entries(1, 0) == fc_factor<double>(1, 0, 0.3));
  // (0,1) is the conjugate-transpose partner of (1,0) up to the parity sign
  CHECK(std::abs(fc.entries(0, 1) + std::conj(fc.entries(1, 0))) <= 1e-15);
  CHECK(fc.entries(0, 1).imag() ==
        doctest::Approx(-0.3 * std::exp(-0.045)).epsilon(1e-14));
}

TEST_CASE("unitarity_defect of the identity is zero") {
  const auto fc = fc_matrix<double>(8, 0.0);
  for (int sub : {1, 4, 9}) CHECK(unitarity_defect(fc, sub) == 0.0);
}

TEST_CASE("generous truncation passes the Gram certificate") {
  const auto fc = fc_matrix<double>(60, 1.0);
  CHECK(unitarity_defect(fc, 30) < 1e-8);
}

TEST_CASE("tight truncation is visibly non-unitary (regression)") {
  const auto fc = fc_matrix<double>(5, 1.0);
  const double defect = unitarity_defect(fc, 5);
  CHECK(defect > 0.1);  // truncation too small on purpose
  CHECK(defect == doctest::Approx(0.462742732789206).epsilon(1e-12));
}

TEST_CASE("unitarity_defect rejects out-of-range blocks") {
  const auto fc = fc_matrix<double>(5, 0.3);
  CHECK_THROWS_AS(unitarity_defect(fc, 0), std::invalid_argument);
  CHECK_THROWS_AS(unitarity_defect(fc, 7), std::invalid_argument);
}

TEST_CASE("orthonormality sums collapse on the retained block") {
  // sum_q conj(eta_{q q'}) eta_{q n} = delta_{q' n} within the defect bound
  const auto fc = fc_matrix<double>(60, 0.3);
  const int sub = 20;
  const double defect = unitarity_defect(fc, sub);
  for (int qp = 0; qp < sub; ++qp) {
    for (int n = 0; n < sub; ++n) {
      std::complex<double> acc = 0.0;
      for (int q = 0; q <= 60; ++q) {
        acc += std::conj(fc.entries(q, qp)) * fc.entries(q, n);
      }
      const double want = (qp == n) ? 1.0 : 0.0;
      CHECK(std::abs(acc - want) <= defect + 1e-15);
    }
  }
}

TEST_SUITE_END();
