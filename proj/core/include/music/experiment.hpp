#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "music/objectives.hpp"
#include "music/optimizers.hpp"
#include "music/topology.hpp"
#include "music/types.hpp"

namespace music {

struct TraceRecord {
  std::size_t t = 0;
  std::size_t comm_rounds = 0;
  std::size_t grad_evals = 0;
  double rel_error = 0.0;
  /// Step size used to produce this iterate.
  double alpha = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TerminalStatus {
  enum class Kind { MaxIters, Converged, Diverged };
  Kind kind = Kind::MaxIters;
  /// Iteration at which divergence was detected (Diverged only).
  std::size_t at = 0;

  friend bool operator==(const TerminalStatus&, const TerminalStatus&) = default;
};

/// "max_iters", "converged" or "diverged@<t>".
std::string to_string(const TerminalStatus& s);
std::optional<TerminalStatus> parse_terminal_status(const std::string& s);

struct Trace {
  std::vector<TraceRecord> records;
  TerminalStatus status;

  bool diverged() const { return status.kind == TerminalStatus::Kind::Diverged; }
  /// Records produced by a combination step (comm_rounds advanced).
  std::vector<TraceRecord> round_records() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// (1/N) sum_i ||x_i - x*||^2 / ||x0_i - x*||^2. Throws std::invalid_argument
/// when some agent starts exactly at x*.
double relative_error(const AgentMatrix& x, const Vector& x_star,
                      const AgentMatrix& x0);

struct RunOptions {
  std::size_t iterations = 0;
  /// Stop with status Converged once rel_error <= stop_below (0 disables).
  double stop_below = 0.0;
};

/// Runs `config` from x0 = 0 for up to options.iterations steps, one trace
/// record per iteration. Divergence ends the run with status Diverged; it is
/// never rethrown.
Trace run(const Objective& f, const MixingMatrix& mixing,
          const AlgorithmConfig& config, const RunOptions& options,
          const Vector& x_star);

/// Communication rounds at the first combination step whose rel_error is
/// <= target.
std::optional<std::size_t> rounds_to_threshold(const Trace& trace,
                                               double target);

struct Plateau {
  /// Best rel_error over the final 10% of rounds improved on everything
  /// before it by less than 1% (relative).
  bool steady = false;
  /// Median rel_error over the final 10% of rounds.
  double level = 0.0;
};

/// Steady-state readout over combination records. Diverged or too-short
/// traces report steady = false and level = +inf.
Plateau detect_plateau(const Trace& trace);

struct RateFit {
  /// exp(slope) of log(rel_error) against communication rounds.
  double rho = 1.0;
  bool contracting = true;
  std::size_t points = 0;
};

struct RoundPoint {
  double round = 0.0;
  double error = 0.0;
};

/// Least-squares fit of log(error) against round. Needs >= 3 points with
/// positive errors; throws std::invalid_argument otherwise.
RateFit fit_linear_rate(const std::vector<RoundPoint>& window);

/// Pre-plateau window of a trace: combination records whose rel_error is
/// more than 10x the plateau level, keeping the most recent half of them
/// (at least 3).
std::vector<RoundPoint> pre_plateau_window(const Trace& trace);

/// Header `t,comm_rounds,grad_evals,rel_error,alpha`, one row per record and
/// a trailing `# status=<status>` line. Reals use 17 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace);
void export_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(std::istream& in);

struct LabeledConfig {
  std::string label;
  AlgorithmConfig config;
};

struct LabeledTrace {
  std::string label;
  AlgorithmConfig config;
  Trace trace;
  std::optional<std::size_t> rounds_to_target;
  Plateau plateau;
  std::optional<RateFit> rate;
  /// Set when the config itself was rejected before running.
  std::optional<std::string> error;
};

struct CompareOptions {
  RunOptions run;
  /// Target for rounds_to_target; 0 skips it.
  double target_error = 0.0;
};

/// Runs every config on the same problem and network. Configs whose kind
/// uses_half_identity() get w_bar, the rest get w. A failing config is
/// reported in its own entry and does not stop the others.
std::vector<LabeledTrace> compare(const Objective& f, const MixingMatrix& w,
                                  const MixingMatrix& w_bar,
                                  const std::vector<LabeledConfig>& configs,
                                  const CompareOptions& options,
                                  const Vector& x_star);

}  // namespace music
