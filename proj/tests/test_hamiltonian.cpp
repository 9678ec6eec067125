#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "trapsim/hamiltonian.hpp"

using namespace trapsim;
using C = std::complex<double>;

TEST_SUITE_BEGIN("hamiltonian");

TEST_CASE("TrapConfig validation") {
  TrapConfig<double> cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.omega = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.omega = 1.0;
  cfg.rabi = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rabi = 0.0;
  cfg.eta_ld = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.eta_ld = 0.0;
  cfg.n_max = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("build_h0 single block matches the 2x2 form") {
  TrapConfig<double> cfg;
  cfg.n_max = 0;
  cfg.rabi = 7.0;
  cfg.detuning = 2.5;
  const auto h = build_h0(cfg);
  REQUIRE(h.rows() == 2);
  CHECK(h(0, 0) == C(0.0));
  CHECK(h(0, 1) == C(3.5));
  CHECK(h(1, 0) == C(3.5));
  CHECK(h(1, 1) == C(-2.5));
}

TEST_CASE("build_h0 without drive is the bare ladder") {
  TrapConfig<double> cfg;
  cfg.n_max = 4;
  const auto h = build_h0(cfg);
  for (int i = 0; i < h.rows(); ++i) {
    for (int j = 0; j < h.cols(); ++j) {
      if (i == j) {
        CHECK(h(i, i) == C(static_cast<double>(i / 2)));
      } else {
        CHECK(h(i, j) == C(0.0));
      }
    }
  }
}

TEST_CASE("build_h0 block n=3 with strong drive") {
  TrapConfig<double> cfg;
  cfg.n_max = 5;
  cfg.rabi = 100.0;
  const auto h = build_h0(cfg);
  CHECK(h(6, 6) == C(3.0));
  CHECK(h(7, 7) == C(3.0));
  CHECK(h(6, 7) == C(50.0));
  CHECK(h(7, 6) == C(50.0));
}

TEST_CASE("build_h1 vanishes at eta 0 and fills the excited ladder") {
  TrapConfig<double> cfg;
  cfg.n_max = 9;

  cfg.eta_ld = 0.0;
  CHECK(build_h1(cfg).cwiseAbs().maxCoeff() == 0.0);

  cfg.eta_ld = 0.1;
  const auto h = build_h1(cfg);
  CHECK(h(3, 1) == C(0.0, 0.1));  // |e,1><e,0| coupling
  CHECK(h(1, 3) == C(0.0, -0.1));

  cfg.eta_ld = 0.3;
  const auto h2 = build_h1(cfg);
  CHECK(h2(19, 17).imag() == doctest::Approx(0.9).epsilon(1e-14));  // sqrt(9)
}

TEST_CASE("build_h1 touches only the excited manifold") {
  TrapConfig<double> cfg;
  cfg.n_max = 6;
  cfg.eta_ld = 0.4;
  const auto h = build_h1(cfg);
  for (int i = 0; i < h.rows(); ++i) {
    for (int j = 0; j < h.cols(); ++j) {
      if (i % 2 == 0 || j % 2 == 0) CHECK(h(i, j) == C(0.0));
    }
  }
}

TEST_CASE("H0 and H1 are Hermitian elementwise") {
  TrapConfig<double> cfg;
  cfg.n_max = 12;
  cfg.rabi = 30.0;
  cfg.detuning = 0.7;
  cfg.eta_ld = 0.8;
  const auto h0 = build_h0(cfg);
  const auto h1 = build_h1(cfg);
  CHECK((h0 - h0.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h1 - h1.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("commutator norm grows with eta_ld") {
  TrapConfig<double> cfg;
  cfg.n_max = 20;
  cfg.rabi = 10.0;
  double last = 0.0;
  for (double eta : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    cfg.eta_ld = eta;
    const auto h0 = build_h0(cfg);
    const auto h1 = build_h1(cfg);
    const double norm = (h0 * h1 - h1 * h0).norm();
    CHECK(norm > last);
    last = norm;
  }
  CHECK(last > 0.0);  // H1 genuinely matters
}

TEST_CASE("excited ladder has the displaced-oscillator spectrum") {
  // The recoil constant eta^2 w is folded into the detuning convention;
  // adding it back must leave integer level spacings.
  TrapConfig<double> cfg;
  cfg.n_max = 60;
  cfg.eta_ld = 0.3;
  const MatrixXc<double> h = build_h0(cfg) + build_h1(cfg);
  const int levels = cfg.levels();
  MatrixXc<double> excited(levels, levels);
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) excited(i, j) = h(2 * i + 1, 2 * j + 1);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc<double>> solver(excited);
  for (int k = 0; k < 30; ++k) {
    const double shifted = solver.eigenvalues()(k) + cfg.eta_ld * cfg.eta_ld;
    CHECK(std::abs(shifted - std::round(shifted)) < 1e-6);
  }
}

TEST_CASE("p_to_g and g_to_p are the identity at eta 0") {
  const auto fc = fc_matrix<double>(15, 0.0);
  const VectorXc<double> c = oracles::random_state(16, 11);
  CHECK((p_to_g(c, fc) - c).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g_to_p(c, fc) - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("p_to_g of the lowest wave packet has the pinned signs") {
  const auto fc = fc_matrix<double>(20, 0.3);
  VectorXc<double> c = VectorXc<double>::Zero(21);
  c(0) = 1.0;
  const auto d = p_to_g(c, fc);
  CHECK(d(0).real() == doctest::Approx(std::exp(-0.045)).epsilon(1e-14));
  CHECK(d(1).imag() == doctest::Approx(+0.3 * std::exp(-0.045)).epsilon(1e-12));
}

TEST_CASE("basis change round trip and norm preservation") {
  const auto fc = fc_matrix<double>(60, 1.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    VectorXc<double> c = VectorXc<double>::Zero(61);
    c.head(20) = oracles::random_state(20, seed);  // keep support low
    const auto back = g_to_p(p_to_g(c, fc), fc);
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(p_to_g(c, fc).squaredNorm() - 1.0) < 1e-9);
    CHECK(std::abs(g_to_p(c, fc).squaredNorm() - 1.0) < 1e-9);
  }
}

TEST_CASE("basis change rejects mismatched sizes") {
  const auto fc = fc_matrix<double>(10, 0.2);
  const VectorXc<double> c = VectorXc<double>::Zero(5);
  CHECK_THROWS_AS(p_to_g(c, fc), std::invalid_argument);
  CHECK_THROWS_AS(g_to_p(c, fc), std::invalid_argument);
}

TEST_CASE("joint vector interleaving round trips") {
  TotalState<double> state;
  state.g_amps = oracles::random_state(7, 21);
  state.e_amps = oracles::random_state(7, 22);
  const auto joint = to_joint_vector(state);
  CHECK(joint.size() == 14);
  CHECK(joint(0) == state.g_amps(0));
  CHECK(joint(1) == state.e_amps(0));
  const auto back = from_joint_vector(joint);
  CHECK((back.g_amps - state.g_amps).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.e_amps - state.e_amps).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
