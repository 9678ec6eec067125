#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "trapsim/thermal.hpp"

using namespace trapsim;
using C = std::complex<double>;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE_BEGIN("thermal");

TEST_CASE("thermal_weights rejects nonpositive temperatures") {
  CHECK_THROWS_AS(thermal_weights<double>(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(thermal_weights<double>(-1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(thermal_weights<double>(2.0, -1), std::invalid_argument);
}

TEST_CASE("ground_state_ensemble is the T -> 0 limit") {
  const auto ens = ground_state_ensemble<double>(12);
  CHECK(ens.weights(0) == 1.0);
  CHECK(ens.weights.tail(12).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ens.renorm_defect == 0.0);

  // a very cold thermal ensemble approaches it
  const auto cold = thermal_weights<double>(1e-2, 12);
  CHECK(cold.weights(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cold.weights(1) < 1e-40);
}

TEST_CASE("weights keep the geometric ratio and normalize") {
  const auto ens = thermal_weights<double>(2.5, 80);
  CHECK(std::abs(ens.weights.sum() - 1.0) < 1e-14);
  CHECK((ens.weights.array() >= 0.0).all());
  const double ratio = std::exp(-1.0 / 2.5);
  for (int n = 0; n + 1 <= 80; n += 13) {
    CHECK(ens.weights(n + 1) / ens.weights(n) ==
          doctest::Approx(ratio).epsilon(1e-13));
  }
}

TEST_CASE("renorm defect is the geometric tail") {
  const auto ens = thermal_weights<double>(3.0, 200);
  CHECK(ens.renorm_defect == doctest::Approx(std::exp(-201.0 / 3.0)).epsilon(1e-12));
  CHECK(ens.renorm_defect < 1e-25);
}

TEST_CASE("closed-form mean eta pinned values") {
  CHECK(mean_eta_closed_form(5.0, 0.0) == 1.0);
  // T -> 0: coth -> 1, recovering the ground-state diagonal element
  CHECK(mean_eta_closed_form(1e-3, 0.3) ==
        doctest::Approx(std::exp(-0.045)).epsilon(1e-12));
  CHECK(mean_eta_closed_form(3.0, 0.1) ==
        doctest::Approx(0.970176500526552).epsilon(1e-12));
}

TEST_CASE("numeric mean eta pinned values") {
  {
    const auto fc = fc_matrix<double>(40, 0.0);
    const auto ens = thermal_weights<double>(2.0, 40);
    CHECK(mean_eta_numeric(ens, fc) == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    const auto fc = fc_matrix<double>(40, 0.3);
    const auto ens = ground_state_ensemble<double>(40);
    CHECK(mean_eta_numeric(ens, fc) ==
          doctest::Approx(std::exp(-0.045)).epsilon(1e-14));
  }
}

TEST_CASE("the two mean-eta routes cross-validate") {
  for (double t : {1.0, 3.0, 10.0}) {
    for (double eta : {0.1, 0.3, 1.0}) {
      const auto ens = thermal_weights<double>(t, 400);
      const auto fc = fc_matrix<double>(400, eta);
      CHECK(std::abs(mean_eta_numeric(ens, fc) -
                     mean_eta_closed_form(t, eta)) < 1e-8);
    }
  }
}

TEST_CASE("mean_eta_numeric rejects mismatched truncations") {
  const auto ens = thermal_weights<double>(2.0, 30);
  const auto fc = fc_matrix<double>(20, 0.3);
  CHECK_THROWS_AS(mean_eta_numeric(ens, fc), std::invalid_argument);
}

TEST_CASE("random-phase samples are normalized and reproducible") {
  const auto ens = thermal_weights<double>(3.0, 120);
  const auto a = sample_random_phase_state(ens, 42);
  const auto b = sample_random_phase_state(ens, 42);
  const auto c = sample_random_phase_state(ens, 43);
  CHECK(std::abs(a.squaredNorm() - 1.0) < 1e-14);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);        // same seed, same draw
  CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);        // different seed differs
  for (int n = 0; n <= 120; ++n) {
    CHECK(std::abs(std::abs(a(n)) - std::sqrt(ens.weights(n))) < 1e-12);
  }
}

TEST_CASE("ground ensemble samples collapse to the ground state") {
  const auto ens = ground_state_ensemble<double>(9);
  for (std::uint64_t seed : {0ull, 5ull, 99ull}) {
    const auto c = sample_random_phase_state(ens, seed);
    CHECK(std::abs(std::abs(c(0)) - 1.0) < 1e-14);
    CHECK(c.tail(9).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("phase averaging kills motional coherences like 1/sqrt(N)") {
  const auto ens = thermal_weights<double>(2.0, 40);
  const int samples = 10000;
  const std::pair<int, int> pairs[] = {{0, 1}, {1, 2}, {0, 3}};
  for (const auto& [n, m] : pairs) {
    C acc = 0.0;
    for (int s = 0; s < samples; ++s) {
      const auto c = sample_random_phase_state(ens, 1000 + s);
      acc += c(n) * std::conj(c(m));
    }
    acc /= static_cast<double>(samples);
    // each term has modulus sqrt(w_n w_m) and a uniform phase, so the mean
    // has standard error sqrt(w_n w_m / N) per quadrature
    const double sigma =
        std::sqrt(ens.weights(n) * ens.weights(m) / samples);
    CHECK(std::abs(acc) < 5.0 * sigma);
  }
}

TEST_CASE("thermal_fidelity trivial limits") {
  TrapConfig<double> cfg;
  cfg.rabi = 100.0;
  cfg.n_max = 60;
  const QubitAmps<double> q{C(std::sqrt(0.5)), C(std::sqrt(0.5))};

  cfg.eta_ld = 0.1;
  const auto ens = thermal_weights<double>(1.0, 30);
  CHECK(thermal_fidelity(cfg, ens, q, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  cfg.eta_ld = 0.0;
  for (double theta : {0.4, kPi / 2, 2.2}) {
    for (double t : {1.0, 3.0}) {
      const auto e2 = thermal_weights<double>(t, 30);
      CHECK(thermal_fidelity(cfg, e2, q, theta) >= 1.0 - 1e-10);
    }
  }
}

TEST_CASE("thermal_fidelity needs the ensemble to fit the basis") {
  TrapConfig<double> cfg;
  cfg.rabi = 50.0;
  cfg.n_max = 10;
  cfg.eta_ld = 0.1;
  const auto ens = thermal_weights<double>(2.0, 20);
  const QubitAmps<double> q{C(1.0), C(0.0)};
  CHECK_THROWS_AS(thermal_fidelity(cfg, ens, q, 0.3), std::invalid_argument);
}

TEST_CASE("diagonal mixture equals the Monte-Carlo phase average") {
  TrapConfig<double> cfg;
  cfg.rabi = 100.0;
  cfg.eta_ld = 0.1;
  cfg.n_max = 64;
  const RotationEngine<double> engine(cfg, true);
  const QubitAmps<double> q{C(std::sqrt(0.5)), C(std::sqrt(0.5))};
  const auto ens = thermal_weights<double>(1.0, 23);
  const double theta = kPi / 2;

  const double exact = thermal_fidelity(engine, ens, q, theta);

  const int samples = 1000;
  double mean = 0.0, m2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    VectorXc<double> c = VectorXc<double>::Zero(cfg.levels());
    const auto draw = sample_random_phase_state(ens, 50000 + s);
    c.head(draw.size()) = draw;
    const double f = engine.fidelity_after_rotation(q, c, theta);
    const double delta = f - mean;
    mean += delta / (s + 1);
    m2 += delta * (f - mean);
  }
  const double stderr_mean = std::sqrt(m2 / (samples - 1) / samples);
  CHECK(std::abs(mean - exact) < 5.0 * stderr_mean);
}

TEST_CASE("thermal mixture beats the zero-phase pure state off the trivial points") {
  TrapConfig<double> cfg;
  cfg.rabi = 100.0;
  cfg.eta_ld = 0.1;
  cfg.n_max = 120;
  const RotationEngine<double> engine(cfg, true);
  const QubitAmps<double> q{C(std::sqrt(0.5)), C(std::sqrt(0.5))};
  for (double t : {1.0, 3.0}) {
    const int support = t < 2.0 ? 40 : 90;  // tail defect well under policy
    const auto ens = thermal_weights<double>(t, support);
    VectorXc<double> pure = VectorXc<double>::Zero(cfg.levels());
    for (int n = 0; n <= ens.n_max; ++n) pure(n) = std::sqrt(ens.weights(n));
    for (double theta : {0.6, kPi / 2, 2.4, 4.0, 5.5}) {
      const double f_mix = thermal_fidelity(engine, ens, q, theta);
      const double f_pure = engine.fidelity_after_rotation(q, pure, theta);
      CHECK(f_mix >= f_pure - 1e-12);
    }
  }
}

TEST_SUITE_END();
