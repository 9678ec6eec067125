#include "trapsim/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "trapsim/trapsim.hpp"

namespace trapsim::runner {

namespace {

using Engine = RotationEngine<double>;
using Ensemble = ThermalEnsemble<double>;
using Matrix = MatrixXc<double>;
using Vector = VectorXc<double>;

constexpr double kTailDefectPolicy = 1e-10;   // thermal truncation policy
constexpr double kConvergeTol = 1e-8;         // level-to-level fidelity drift
constexpr int kConvergeFloor = 16;
constexpr int kConvergeCap = 1024;
constexpr double kEdgeTol = 1e-10;            // per-point truncation health
constexpr double kWeightFloor = 1e-12;        // mixture terms that matter

// ---------------------------------------------------------------------------
// formatting

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt17(double v) { return fmt(v, "%.17g"); }

std::string fmt_complex(std::complex<double> z) {
  return fmt(z.real()) + ":" + fmt(z.imag());
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// strict parsing (malformed numbers get their own exit code)

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& key) {
  const std::string s = trimmed(raw);
  double value = 0.0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size() ||
      s.empty()) {
    throw ConfigError(ExitCode::malformed_number,
                      key + ": '" + raw + "' is not a number");
  }
  return value;
}

int parse_int(const std::string& raw, const std::string& key) {
  const std::string s = trimmed(raw);
  int value = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size() ||
      s.empty()) {
    throw ConfigError(ExitCode::malformed_number,
                      key + ": '" + raw + "' is not an integer");
  }
  return value;
}

std::uint64_t parse_uint64(const std::string& raw, const std::string& key) {
  const std::string s = trimmed(raw);
  std::uint64_t value = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size() ||
      s.empty()) {
    throw ConfigError(ExitCode::malformed_number,
                      key + ": '" + raw + "' is not an unsigned integer");
  }
  return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_double_list(const std::string& raw,
                                      const std::string& key) {
  std::vector<double> values;
  for (const auto& part : split(raw, ',')) {
    values.push_back(parse_double(part, key));
  }
  return values;
}

/// "re" or "re:im".
std::complex<double> parse_complex(const std::string& raw,
                                   const std::string& key) {
  const auto parts = split(raw, ':');
  if (parts.size() == 1) return {parse_double(parts[0], key), 0.0};
  if (parts.size() == 2) {
    return {parse_double(parts[0], key), parse_double(parts[1], key)};
  }
  throw ConfigError(ExitCode::malformed_number,
                    key + ": '" + raw + "' is not re or re:im");
}

// ---------------------------------------------------------------------------
// enums

RunMode parse_mode(const std::string& s) {
  if (s == "sweep") return RunMode::sweep;
  if (s == "fig2") return RunMode::fig2;
  if (s == "fig3") return RunMode::fig3;
  if (s == "converge") return RunMode::converge;
  if (s == "dump") return RunMode::dump;
  throw ConfigError(ExitCode::invalid_config,
                    "mode: '" + s + "' is not one of sweep/fig2/fig3/converge/dump");
}

InitialState parse_initial(const std::string& s) {
  if (s == "ground") return InitialState::ground;
  if (s == "spread") return InitialState::spread;
  if (s == "custom") return InitialState::custom;
  if (s == "thermal") return InitialState::thermal;
  throw ConfigError(ExitCode::invalid_config,
                    "initial: '" + s + "' is not one of ground/spread/custom/thermal");
}

PurePhases parse_phases(const std::string& s) {
  if (s == "zero") return PurePhases::zero;
  if (s == "seeded") return PurePhases::seeded;
  throw ConfigError(ExitCode::invalid_config,
                    "pure-phases: '" + s + "' is not one of zero/seeded");
}

// ---------------------------------------------------------------------------
// truncation policy

bool uses_thermal(const RunConfig& cfg) {
  return cfg.mode == RunMode::fig3 || cfg.initial == InitialState::thermal;
}

/// Smallest n_max keeping the discarded geometric tail below policy.
int thermal_required_n_max(double t_ratio) {
  int n = static_cast<int>(std::floor(t_ratio * std::log(1.0 / kTailDefectPolicy)));
  while (std::exp(-(static_cast<double>(n) + 1.0) / t_ratio) >= kTailDefectPolicy) {
    ++n;
  }
  return n;
}

/// Headroom above the thermal support so displacing an edge number state
/// stays inside the basis.
int displacement_margin(double eta_max, int support_n_max) {
  const int spread = static_cast<int>(
      std::ceil(8.0 * eta_max * std::sqrt(static_cast<double>(support_n_max + 1))));
  return std::max(32, spread);
}

int max_thermal_support(const RunConfig& cfg) {
  int support = 0;
  for (double t : cfg.t_ratio_list) {
    support = std::max(support, thermal_required_n_max(t));
  }
  return support;
}

int thermal_auto_n_max(const RunConfig& cfg) {
  const int support = max_thermal_support(cfg);
  const double eta_max =
      *std::max_element(cfg.eta_ld_list.begin(), cfg.eta_ld_list.end());
  return support + displacement_margin(eta_max, support);
}

// ---------------------------------------------------------------------------
// curves

struct CurveSpec {
  double eta_ld = 0.0;
  std::optional<double> t_ratio;
  std::string label;
  bool is_mixture = false;
  Ensemble ensemble;  // mixture curves only
  Vector pure_amps;   // pure curves only, sized levels
};

Vector ground_vector(int levels) {
  Vector c = Vector::Zero(levels);
  c(0) = 1.0;
  return c;
}

Vector spread_vector(int levels) {
  if (levels < 3) {
    throw ConfigError(ExitCode::invalid_config,
                      "initial=spread needs n-max >= 2");
  }
  Vector c = Vector::Zero(levels);
  const double root7 = std::sqrt(7.0);
  c(0) = 2.0 / root7;
  c(1) = std::sqrt(2.0) / root7;
  c(2) = 1.0 / root7;
  return c;
}

Vector custom_vector(const RunConfig& cfg, int levels) {
  if (static_cast<int>(cfg.custom_amps.size()) > levels) {
    throw ConfigError(ExitCode::invalid_config,
                      "initial=custom: " + std::to_string(cfg.custom_amps.size()) +
                          " amplitudes exceed n-max+1 = " + std::to_string(levels));
  }
  Vector c = Vector::Zero(levels);
  for (std::size_t i = 0; i < cfg.custom_amps.size(); ++i) {
    c(static_cast<int>(i)) = cfg.custom_amps[i];
  }
  const double norm = std::sqrt(c.squaredNorm());
  if (!(norm > 1e-12)) {
    throw ConfigError(ExitCode::invalid_config,
                      "initial=custom: amplitudes have zero norm");
  }
  c /= norm;
  return c;
}

Vector sqrt_rho_vector(const RunConfig& cfg, const Ensemble& ens, int levels) {
  Vector c = Vector::Zero(levels);
  if (cfg.pure_phases == PurePhases::seeded) {
    const Vector sampled = sample_random_phase_state(ens, cfg.seed);
    c.head(sampled.size()) = sampled;
  } else {
    for (int n = 0; n <= ens.n_max; ++n) {
      c(n) = std::sqrt(ens.weights(n));
    }
  }
  return c;
}

std::vector<CurveSpec> build_curves(const RunConfig& cfg, int n_max) {
  const int levels = n_max + 1;
  std::vector<CurveSpec> curves;
  const auto add_pure = [&](double eta, std::optional<double> t,
                            const std::string& label, Vector amps) {
    CurveSpec spec;
    spec.eta_ld = eta;
    spec.t_ratio = t;
    spec.label = label;
    spec.pure_amps = std::move(amps);
    curves.push_back(std::move(spec));
  };
  const auto add_mixture = [&](double eta, double t) {
    CurveSpec spec;
    spec.eta_ld = eta;
    spec.t_ratio = t;
    spec.label = "thermal";
    spec.is_mixture = true;
    spec.ensemble = thermal_weights<double>(t, thermal_required_n_max(t));
    curves.push_back(std::move(spec));
  };

  switch (cfg.mode) {
    case RunMode::fig2:
      for (double eta : cfg.eta_ld_list) {
        add_pure(eta, std::nullopt, "ground", ground_vector(levels));
        add_pure(eta, std::nullopt, "spread", spread_vector(levels));
      }
      break;
    case RunMode::fig3:
      for (double eta : cfg.eta_ld_list) {
        for (double t : cfg.t_ratio_list) {
          add_mixture(eta, t);
          const Ensemble ens = thermal_weights<double>(t, thermal_required_n_max(t));
          add_pure(eta, t, "pure", sqrt_rho_vector(cfg, ens, levels));
        }
      }
      break;
    default:  // sweep and converge share the sweep curve set
      for (double eta : cfg.eta_ld_list) {
        switch (cfg.initial) {
          case InitialState::ground:
            add_pure(eta, std::nullopt, "ground", ground_vector(levels));
            break;
          case InitialState::spread:
            add_pure(eta, std::nullopt, "spread", spread_vector(levels));
            break;
          case InitialState::custom:
            add_pure(eta, std::nullopt, "custom", custom_vector(cfg, levels));
            break;
          case InitialState::thermal:
            for (double t : cfg.t_ratio_list) add_mixture(eta, t);
            break;
        }
      }
      break;
  }
  return curves;
}

// ---------------------------------------------------------------------------
// batched evaluation

struct PointValue {
  double fidelity = 0.0;
  bool converged = true;
};

/// Joint initial columns for the pure number states |0>_g .. |count-1>_g
/// carried by the qubit (alpha, beta): even rows take alpha delta_n, odd
/// rows take beta times the displacement column.
Matrix basis_panel(const Engine& eng, const QubitAmps<double>& q, int count) {
  const int levels = eng.config().levels();
  Matrix psi0 = Matrix::Zero(2 * levels, count);
  for (int n = 0; n < count; ++n) {
    psi0(2 * n, n) = q.alpha;
    for (int m = 0; m < levels; ++m) {
      psi0(2 * m + 1, n) = q.beta * eng.fc().entries(m, n);
    }
    const double defect = std::abs(psi0.col(n).squaredNorm() - 1.0);
    if (defect > 1e-10) {
      throw IntegrityError(
          "basis_panel: truncation clips the displaced state |" +
          std::to_string(n) + "> (norm defect " + detail::format_sci(defect) +
          "); enlarge n-max");
    }
  }
  return psi0;
}

Matrix single_panel(const Engine& eng, const QubitAmps<double>& q,
                    const Vector& amps) {
  const TotalState<double> state = make_product_state(q, amps, eng.fc());
  Matrix psi0(2 * eng.config().levels(), 1);
  psi0.col(0) = to_joint_vector(state);
  return psi0;
}

/// Fidelity and truncation-health flag for every column of an evolved
/// panel against the theta target.
std::vector<PointValue> score_panel(const Engine& eng,
                                    const QubitAmps<double>& q, double theta,
                                    const Matrix& evolved) {
  const int levels = eng.config().levels();
  const auto cols = evolved.cols();
  const ReducedDensity<double> target = target_density(q, theta);

  const auto g_rows = Eigen::seqN(0, levels, 2);
  const auto e_rows = Eigen::seqN(1, levels, 2);
  const Matrix g_amps = evolved(g_rows, Eigen::all);
  const Matrix e_amps = evolved(e_rows, Eigen::all);
  const Matrix e_in_g = eng.fc().entries.adjoint() * e_amps;

  std::vector<PointValue> out(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    ReducedDensity<double> rho;
    rho.rho_gg = g_amps.col(j).squaredNorm();
    rho.rho_ge = e_in_g.col(j).dot(g_amps.col(j));
    out[static_cast<std::size_t>(j)].fidelity = fidelity(target, rho);

    double edge = 0.0;
    for (int back = 1; back <= 2 && back <= levels; ++back) {
      edge += std::norm(g_amps(levels - back, j)) +
              std::norm(e_amps(levels - back, j));
    }
    out[static_cast<std::size_t>(j)].converged = edge < kEdgeTol;
  }
  return out;
}

/// Evolve all columns of `panel` to pulse area theta and score them.
/// `transformed` caches V^dag panel so sweeps pay the basis change once.
std::vector<PointValue> evaluate_theta(const Engine& eng,
                                       const QubitAmps<double>& q,
                                       const Matrix& panel,
                                       const Matrix& transformed,
                                       double theta) {
  if (theta == 0.0) return score_panel(eng, q, theta, panel);
  const auto pulse = PulseSpec<double>::for_constant_drive(theta, eng.config().rabi);
  const Vector phases = eng.propagator().phases(pulse.tau);
  const Matrix evolved =
      eng.propagator().eigenvectors() * (phases.asDiagonal() * transformed);
  return score_panel(eng, q, theta, evolved);
}

QubitAmps<double> qubit_from(const RunConfig& cfg) {
  QubitAmps<double> q{cfg.alpha, cfg.beta};
  q.validate();
  return q;
}

/// All rows of the configured experiment at a fixed truncation, in curve
/// order then ascending theta.
std::vector<SweepRow> run_rows(const RunConfig& cfg, int n_max) {
  const QubitAmps<double> q = qubit_from(cfg);
  const std::vector<CurveSpec> curves = build_curves(cfg, n_max);
  const int n_theta = cfg.theta_grid.points;

  std::vector<SweepRow> rows;
  rows.reserve(curves.size() * static_cast<std::size_t>(n_theta));

  // One engine per distinct eta_ld, in first-appearance order.
  std::vector<double> etas;
  for (const auto& curve : curves) {
    if (std::find(etas.begin(), etas.end(), curve.eta_ld) == etas.end()) {
      etas.push_back(curve.eta_ld);
    }
  }

  for (double eta : etas) {
    TrapConfig<double> trap;
    trap.eta_ld = eta;
    trap.rabi = cfg.rabi;
    trap.detuning = cfg.detuning;
    trap.n_max = n_max;
    const Engine eng(trap, /*include_h1=*/true);

    // Shared number-state panel for every mixture curve at this eta.
    int mixture_states = 0;
    for (const auto& curve : curves) {
      if (curve.eta_ld == eta && curve.is_mixture) {
        mixture_states = std::max(mixture_states, curve.ensemble.n_max + 1);
      }
    }
    std::vector<std::vector<PointValue>> basis_scores;  // [theta][state]
    if (mixture_states > 0) {
      const Matrix panel = basis_panel(eng, q, mixture_states);
      const Matrix transformed = eng.propagator().eigenvectors().adjoint() * panel;
      basis_scores.reserve(static_cast<std::size_t>(n_theta));
      for (int i = 0; i < n_theta; ++i) {
        basis_scores.push_back(
            evaluate_theta(eng, q, panel, transformed, cfg.theta_grid.at(i)));
      }
    }

    for (const auto& curve : curves) {
      if (curve.eta_ld != eta) continue;
      std::vector<PointValue> values(static_cast<std::size_t>(n_theta));
      if (curve.is_mixture) {
        for (int i = 0; i < n_theta; ++i) {
          double f = 0.0;
          bool ok = true;
          for (int n = 0; n <= curve.ensemble.n_max; ++n) {
            const double w = curve.ensemble.weights(n);
            const auto& value = basis_scores[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(n)];
            f += w * value.fidelity;
            if (w > kWeightFloor && !value.converged) ok = false;
          }
          values[static_cast<std::size_t>(i)] = {f, ok};
        }
      } else {
        const Matrix panel = single_panel(eng, q, curve.pure_amps);
        const Matrix transformed =
            eng.propagator().eigenvectors().adjoint() * panel;
        for (int i = 0; i < n_theta; ++i) {
          values[static_cast<std::size_t>(i)] =
              evaluate_theta(eng, q, panel, transformed, cfg.theta_grid.at(i))[0];
        }
      }
      for (int i = 0; i < n_theta; ++i) {
        SweepRow row;
        row.theta = cfg.theta_grid.at(i);
        row.fidelity = values[static_cast<std::size_t>(i)].fidelity;
        row.eta_ld = curve.eta_ld;
        row.rabi = cfg.rabi;
        row.t_ratio = curve.t_ratio;
        row.initial_state = curve.label;
        row.n_max = n_max;
        row.converged = values[static_cast<std::size_t>(i)].converged;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void validate_for_run(const RunConfig& cfg) {
  if (cfg.theta_grid.points < 1) {
    throw ConfigError(ExitCode::invalid_config, "theta-points must be >= 1");
  }
  if (cfg.theta_grid.lo < 0.0 || cfg.theta_grid.hi < cfg.theta_grid.lo) {
    throw ConfigError(ExitCode::invalid_config,
                      "theta range must satisfy 0 <= theta-min <= theta-max");
  }
  if (cfg.rabi < 0.0) {
    throw ConfigError(ExitCode::invalid_config, "rabi must be >= 0");
  }
  bool any_nonzero_theta = false;
  for (int i = 0; i < cfg.theta_grid.points; ++i) {
    if (cfg.theta_grid.at(i) != 0.0) any_nonzero_theta = true;
  }
  if (any_nonzero_theta && cfg.rabi == 0.0 && cfg.mode != RunMode::dump) {
    throw ConfigError(ExitCode::invalid_config,
                      "a nonzero pulse area needs rabi > 0");
  }
  if (cfg.eta_ld_list.empty()) {
    throw ConfigError(ExitCode::invalid_config, "eta-ld list is empty");
  }
  for (double eta : cfg.eta_ld_list) {
    if (eta < 0.0) {
      throw ConfigError(ExitCode::invalid_config, "eta-ld must be >= 0");
    }
  }
  if (uses_thermal(cfg)) {
    if (cfg.t_ratio_list.empty()) {
      throw ConfigError(ExitCode::invalid_config, "t-ratio list is empty");
    }
    for (double t : cfg.t_ratio_list) {
      if (!(t > 0.0)) {
        throw ConfigError(ExitCode::invalid_config, "t-ratio must be > 0");
      }
    }
  }
  if (cfg.initial == InitialState::custom && cfg.custom_amps.empty()) {
    throw ConfigError(ExitCode::invalid_config,
                      "initial=custom needs --amps");
  }
  if (cfg.n_max && *cfg.n_max < 0) {
    throw ConfigError(ExitCode::invalid_config, "n-max must be >= 0");
  }
  if (cfg.n_max && uses_thermal(cfg)) {
    const int support = max_thermal_support(cfg);
    if (*cfg.n_max < support) {
      throw ConfigError(
          ExitCode::invalid_config,
          "n-max=" + std::to_string(*cfg.n_max) +
              " cannot hold the thermal tail policy (needs >= " +
              std::to_string(support) + " for the largest t-ratio)");
    }
  }
}

ConvergeReport converge_from_floor(const RunConfig& cfg, int floor) {
  ConvergeReport report;
  if (floor > kConvergeCap) {
    throw ConvergenceError("convergence floor " + std::to_string(floor) +
                           " already exceeds the hard cap " +
                           std::to_string(kConvergeCap));
  }
  std::vector<double> previous;
  int previous_n_max = 0;
  for (int n_max = floor; n_max <= kConvergeCap; n_max *= 2) {
    const std::vector<SweepRow> rows = run_rows(cfg, n_max);
    std::vector<double> fidelities(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      fidelities[i] = rows[i].fidelity;
    }
    ConvergeLevel level;
    level.n_max = n_max;
    if (!previous.empty()) {
      double delta = 0.0;
      for (std::size_t i = 0; i < fidelities.size(); ++i) {
        delta = std::max(delta, std::abs(fidelities[i] - previous[i]));
      }
      level.delta = delta;
      report.levels.push_back(level);
      if (delta < kConvergeTol) {
        report.converged = true;
        report.chosen_n_max = previous_n_max;
        report.final_delta = delta;
        return report;
      }
    } else {
      report.levels.push_back(level);
    }
    previous = std::move(fidelities);
    previous_n_max = n_max;
  }
  report.converged = false;
  report.chosen_n_max = previous_n_max;
  report.final_delta =
      report.levels.empty() || !report.levels.back().delta
          ? 0.0
          : *report.levels.back().delta;
  return report;
}

int converge_floor(const RunConfig& cfg) {
  if (cfg.n_max) return *cfg.n_max;
  if (uses_thermal(cfg)) return thermal_auto_n_max(cfg);
  return kConvergeFloor;
}

/// Auto truncation: thermal runs take the tail-policy size directly (the
/// doubling ladder over a thermal grid would multiply the run cost for no
/// information the policy does not already give); everything else runs
/// the doubling study and keeps the first stable level.
int resolve_n_max(const RunConfig& cfg) {
  if (cfg.n_max) return *cfg.n_max;
  if (uses_thermal(cfg)) return thermal_auto_n_max(cfg);
  const ConvergeReport report = converge_from_floor(cfg, kConvergeFloor);
  if (!report.converged) {
    throw ConvergenceError(
        "auto truncation did not stabilize below n-max=" +
        std::to_string(kConvergeCap) + " (last delta " +
        fmt(report.final_delta) + ")");
  }
  return report.chosen_n_max;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::sweep: return "sweep";
    case RunMode::fig2: return "fig2";
    case RunMode::fig3: return "fig3";
    case RunMode::converge: return "converge";
    case RunMode::dump: return "dump";
  }
  return "?";
}

std::string to_string(InitialState initial) {
  switch (initial) {
    case InitialState::ground: return "ground";
    case InitialState::spread: return "spread";
    case InitialState::custom: return "custom";
    case InitialState::thermal: return "thermal";
  }
  return "?";
}

std::string to_string(PurePhases phases) {
  return phases == PurePhases::zero ? "zero" : "seeded";
}

std::string RunConfig::echo(std::optional<int> resolved_n_max) const {
  std::ostringstream out;
  out << "# trapsim " << kVersion << "\n";
  out << "# mode=" << to_string(mode) << "\n";
  out << "# theta-points=" << theta_grid.points << "\n";
  out << "# theta-min=" << fmt(theta_grid.lo) << "\n";
  out << "# theta-max=" << fmt(theta_grid.hi) << "\n";
  out << "# eta-ld=" << join(eta_ld_list) << "\n";
  out << "# rabi=" << fmt(rabi) << "\n";
  out << "# detuning=" << fmt(detuning) << "\n";
  out << "# t-ratio=" << join(t_ratio_list) << "\n";
  out << "# initial=" << to_string(initial) << "\n";
  if (!custom_amps.empty()) {
    out << "# amps=";
    for (std::size_t i = 0; i < custom_amps.size(); ++i) {
      if (i > 0) out << ",";
      out << fmt_complex(custom_amps[i]);
    }
    out << "\n";
  }
  out << "# alpha=" << fmt_complex(alpha) << "\n";
  out << "# beta=" << fmt_complex(beta) << "\n";
  out << "# truncation=" << (n_max ? "explicit" : "auto") << "\n";
  if (resolved_n_max) {
    out << "# n-max=" << *resolved_n_max << "\n";
  }
  out << "# seed=" << seed << "\n";
  out << "# pure-phases=" << to_string(pure_phases) << "\n";
  return out.str();
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"trapped-qubit rotation fidelity sweeps"};
  app.set_version_flag("--version", std::string("trapsim ") + kVersion);
  app.set_config("--config", "", "plain-text key=value run configuration");
  app.allow_config_extras(false);

  std::string mode_s = "sweep";
  std::string theta_points_s, theta_min_s, theta_max_s;
  std::string eta_s, rabi_s, detuning_s, t_ratio_s;
  std::string initial_s, amps_s, alpha_s, beta_s;
  std::string n_max_s, seed_s, phases_s, output_s;
  bool auto_truncation = false;

  app.add_option("--mode", mode_s, "sweep, fig2, fig3, converge or dump");
  app.add_option("--theta-points", theta_points_s, "pulse-area grid size (default 64)");
  app.add_option("--theta-min", theta_min_s, "grid start in radians (default 0)");
  app.add_option("--theta-max", theta_max_s, "grid end in radians (default 2pi)");
  app.add_option("--eta-ld", eta_s, "comma list of Lamb-Dicke parameters (default 0.1)");
  app.add_option("--rabi", rabi_s, "Rabi frequency in trap units (default 100)");
  app.add_option("--detuning", detuning_s, "laser detuning in trap units (default 0)");
  app.add_option("--t-ratio", t_ratio_s, "comma list of kT/(hbar w) (default 1,3,10)");
  app.add_option("--initial", initial_s, "ground, spread, custom or thermal");
  app.add_option("--amps", amps_s, "custom motional amplitudes, comma list of re or re:im");
  app.add_option("--alpha", alpha_s, "qubit |g> amplitude, re or re:im");
  app.add_option("--beta", beta_s, "qubit |e> amplitude, re or re:im");
  app.add_option("--n-max", n_max_s, "motional truncation, integer or 'auto'");
  app.add_flag("--auto-truncation", auto_truncation, "resolve n-max automatically");
  app.add_option("--seed", seed_s, "seed for random-phase sampling (default 0)");
  app.add_option("--pure-phases", phases_s, "zero or seeded phases for the sqrt-rho pure state");
  app.add_option("--output", output_s, "CSV/report path (default standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForVersion& e) {
    throw HelpRequested{std::string(e.what()) + "\n"};
  } catch (const CLI::ExtrasError& e) {
    throw ConfigError(ExitCode::unknown_key, e.what());
  } catch (const CLI::ConfigError& e) {
    throw ConfigError(ExitCode::unknown_key, e.what());
  } catch (const CLI::ConversionError& e) {
    throw ConfigError(ExitCode::malformed_number, e.what());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(ExitCode::invalid_config, e.what());
  }

  RunConfig cfg;
  cfg.mode = parse_mode(mode_s);

  if (!theta_points_s.empty()) {
    cfg.theta_grid.points = parse_int(theta_points_s, "theta-points");
  }
  if (!theta_min_s.empty()) cfg.theta_grid.lo = parse_double(theta_min_s, "theta-min");
  if (!theta_max_s.empty()) cfg.theta_grid.hi = parse_double(theta_max_s, "theta-max");
  if (!eta_s.empty()) {
    cfg.eta_ld_list = parse_double_list(eta_s, "eta-ld");
  } else if (cfg.mode == RunMode::fig2) {
    cfg.eta_ld_list = {0.1, 0.3, 1.0};
  }
  if (!rabi_s.empty()) cfg.rabi = parse_double(rabi_s, "rabi");
  if (!detuning_s.empty()) cfg.detuning = parse_double(detuning_s, "detuning");
  if (!t_ratio_s.empty()) cfg.t_ratio_list = parse_double_list(t_ratio_s, "t-ratio");
  if (!initial_s.empty()) {
    cfg.initial = parse_initial(initial_s);
  } else if (!amps_s.empty()) {
    cfg.initial = InitialState::custom;
  }
  if (!amps_s.empty()) {
    for (const auto& part : split(amps_s, ',')) {
      cfg.custom_amps.push_back(parse_complex(part, "amps"));
    }
  }
  if (!alpha_s.empty()) cfg.alpha = parse_complex(alpha_s, "alpha");
  if (!beta_s.empty()) cfg.beta = parse_complex(beta_s, "beta");
  const double qubit_norm = std::sqrt(std::norm(cfg.alpha) + std::norm(cfg.beta));
  if (!(qubit_norm > 1e-12)) {
    throw ConfigError(ExitCode::invalid_config,
                      "qubit amplitudes (alpha, beta) have zero norm");
  }
  cfg.alpha /= qubit_norm;
  cfg.beta /= qubit_norm;

  if (!n_max_s.empty() && n_max_s != "auto") {
    cfg.n_max = parse_int(n_max_s, "n-max");
    if (auto_truncation) {
      throw ConfigError(ExitCode::invalid_config,
                        "--n-max " + n_max_s +
                            " conflicts with --auto-truncation; pick one");
    }
  }
  if (!seed_s.empty()) cfg.seed = parse_uint64(seed_s, "seed");
  if (!phases_s.empty()) cfg.pure_phases = parse_phases(phases_s);
  cfg.output = output_s;

  validate_for_run(cfg);
  if (cfg.mode == RunMode::dump && !cfg.n_max) {
    throw ConfigError(ExitCode::invalid_config,
                      "mode=dump needs an explicit --n-max");
  }
  return cfg;
}

std::string SweepResult::csv() const {
  std::ostringstream out;
  out << cfg.echo(n_max);
  out << "mode,theta,fidelity,eta_ld,rabi,t_ratio,initial_state,n_max,converged\n";
  const std::string mode_s = to_string(cfg.mode);
  for (const auto& row : rows) {
    out << mode_s << ',' << fmt(row.theta) << ',' << fmt(row.fidelity) << ','
        << fmt(row.eta_ld) << ',' << fmt(row.rabi) << ','
        << (row.t_ratio ? fmt(*row.t_ratio) : std::string()) << ','
        << row.initial_state << ',' << row.n_max << ','
        << (row.converged ? '1' : '0') << "\n";
  }
  return out.str();
}

SweepResult run_sweep(const RunConfig& cfg) {
  validate_for_run(cfg);
  SweepResult result;
  result.cfg = cfg;
  result.n_max = resolve_n_max(cfg);
  result.rows = run_rows(cfg, result.n_max);
  return result;
}

std::string ConvergeReport::text(const RunConfig& cfg) const {
  std::ostringstream out;
  out << cfg.echo(std::nullopt);
  out << "level,n_max,max_abs_delta\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out << i << ',' << levels[i].n_max << ','
        << (levels[i].delta ? fmt(*levels[i].delta) : std::string()) << "\n";
  }
  out << "chosen_n_max=" << chosen_n_max << "\n";
  out << "final_delta=" << fmt(final_delta) << "\n";
  out << "converged=" << (converged ? '1' : '0') << "\n";
  return out.str();
}

ConvergeReport converge(const RunConfig& cfg) {
  validate_for_run(cfg);
  return converge_from_floor(cfg, converge_floor(cfg));
}

std::string dump_matrices(const RunConfig& cfg) {
  validate_for_run(cfg);
  if (!cfg.n_max) {
    throw ConfigError(ExitCode::invalid_config, "mode=dump needs an explicit --n-max");
  }
  TrapConfig<double> trap;
  trap.eta_ld = cfg.eta_ld_list.front();
  trap.rabi = cfg.rabi;
  trap.detuning = cfg.detuning;
  trap.n_max = *cfg.n_max;

  const auto write_matrix = [](std::ostringstream& out, const char* name,
                               const Matrix& m) {
    out << "# matrix " << name << ' ' << m.rows() << ' ' << m.cols() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c > 0) out << ' ';
        out << fmt17(m(r, c).real()) << ' ' << fmt17(m(r, c).imag());
      }
      out << "\n";
    }
  };

  std::ostringstream out;
  out << cfg.echo(*cfg.n_max);
  write_matrix(out, "H0", build_h0(trap));
  write_matrix(out, "H1", build_h1(trap));
  write_matrix(out, "FC", fc_matrix<double>(trap.n_max, trap.eta_ld).entries);
  return out.str();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  out << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    std::cout << h.text;
    return static_cast<int>(ExitCode::ok);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }

  try {
    switch (cfg.mode) {
      case RunMode::sweep:
      case RunMode::fig2:
      case RunMode::fig3: {
        write_text(cfg.output, run_sweep(cfg).csv());
        return static_cast<int>(ExitCode::ok);
      }
      case RunMode::converge: {
        const ConvergeReport report = converge(cfg);
        write_text(cfg.output, report.text(cfg));
        return static_cast<int>(report.converged ? ExitCode::ok
                                                 : ExitCode::no_convergence);
      }
      case RunMode::dump: {
        write_text(cfg.output, dump_matrices(cfg));
        return static_cast<int>(ExitCode::ok);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::no_convergence);
  } catch (const IntegrityError& e) {
    std::cerr << "numerical integrity error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::integrity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::failure);
  }
  return static_cast<int>(ExitCode::failure);
}

}  // namespace trapsim::runner
