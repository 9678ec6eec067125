#pragma once

// Experiment runner behind the command-line tool: run configuration,
// theta/parameter sweeps with truncation handling, CSV emission, the
// truncation-convergence study, and the matrix dump. Everything here is
// deterministic for a fixed (configuration, seed): ordering, summation
// order and number formatting are pinned so repeated runs are
// byte-identical.

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trapsim::runner {

enum class ExitCode : int {
  ok = 0,
  failure = 1,
  unknown_key = 2,
  malformed_number = 3,
  invalid_config = 4,
  no_convergence = 5,
  integrity = 6,
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ExitCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_config for --help/--version: the caller prints `text`
/// and exits cleanly instead of running anything.
struct HelpRequested {
  std::string text;
};

enum class RunMode { sweep, fig2, fig3, converge, dump };
enum class InitialState { ground, spread, custom, thermal };
enum class PurePhases { zero, seeded };

std::string to_string(RunMode mode);
std::string to_string(InitialState initial);
std::string to_string(PurePhases phases);

/// Evenly spaced pulse-area grid sampling [lo, hi): theta_i = lo +
/// i (hi - lo) / points. Half-open because theta is 2 pi periodic as a
/// rotation; a single point lands on lo.
struct ThetaGrid {
  int points = 64;
  double lo = 0.0;
  double hi = 6.283185307179586476925286766559;  // 2 pi

  double at(int i) const {
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(points);
  }
};

struct RunConfig {
  RunMode mode = RunMode::sweep;
  ThetaGrid theta_grid;
  std::vector<double> eta_ld_list{0.1};
  double rabi = 100.0;
  double detuning = 0.0;
  std::vector<double> t_ratio_list{1.0, 3.0, 10.0};
  InitialState initial = InitialState::ground;
  std::vector<std::complex<double>> custom_amps;
  std::complex<double> alpha{0.70710678118654752440, 0.0};
  std::complex<double> beta{0.70710678118654752440, 0.0};
  std::optional<int> n_max;  // nullopt = auto-resolved truncation
  std::uint64_t seed = 0;
  PurePhases pure_phases = PurePhases::zero;
  std::string output;  // empty = standard output

  /// '#'-prefixed provenance block: code version plus every resolved
  /// field that affects the numbers (the output path is excluded).
  std::string echo(std::optional<int> resolved_n_max) const;
};

/// Parse command-line style arguments (without argv[0]); an optional
/// plain-text key=value file is pulled in via --config. Flags override
/// file values override defaults. Throws ConfigError with the exit code
/// for the failure class.
RunConfig parse_config(const std::vector<std::string>& args);

struct SweepRow {
  double theta = 0.0;
  double fidelity = 0.0;
  double eta_ld = 0.0;
  double rabi = 0.0;
  std::optional<double> t_ratio;
  std::string initial_state;
  int n_max = 0;
  bool converged = true;
};

struct SweepResult {
  RunConfig cfg;
  int n_max = 0;  // resolved truncation used for every row
  std::vector<SweepRow> rows;

  std::string csv() const;
};

/// Run the configured experiment (modes sweep, fig2, fig3). Resolves an
/// auto truncation first, then emits one row per (curve, theta) point in
/// a fixed order. Per-row `converged` reports whether the evolved state
/// stayed clear of the truncation edge.
SweepResult run_sweep(const RunConfig& cfg);

struct ConvergeLevel {
  int n_max = 0;
  std::optional<double> delta;  // vs previous level; empty for the first
};

struct ConvergeReport {
  std::vector<ConvergeLevel> levels;
  int chosen_n_max = 0;
  double final_delta = 0.0;
  bool converged = false;

  std::string text(const RunConfig& cfg) const;
};

/// Double n_max from a floor until the max-over-grid fidelity change
/// between successive levels drops below 1e-8 (hard cap 1024). The
/// chosen truncation is the smaller level of the first stable pair.
ConvergeReport converge(const RunConfig& cfg);

/// Plain-text serialization of H0, H1 and the displacement matrix for the
/// configured parameters (first eta_ld of the list; explicit n_max
/// required). Entries are written row-major as "re im" pairs at full
/// precision for cross-language comparison.
std::string dump_matrices(const RunConfig& cfg);

/// Full command-line entry point: parse, dispatch, write output, map
/// failures to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace trapsim::runner
