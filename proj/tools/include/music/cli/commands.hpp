#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "music/cli/config.hpp"
#include "music/error.hpp"
#include "music/objectives.hpp"
#include "music/topology.hpp"

namespace music::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
};

/// Environment variable that overrides run.output_dir.
inline constexpr const char* kOutputDirEnv = "MUSIC_OUTPUT_DIR";

/// Semantic problem found while materializing a config (data too small for
/// the partition, disconnected graph, ...). Maps to exit status 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Everything a run needs except x*.
struct Prepared {
  std::unique_ptr<Objective> problem;
  Graph graph;
  MixingMatrix w;
  MixingMatrix w_bar;
  ConvexityBounds bounds;
};

/// Builds problem data, graph and both mixing matrices. Throws ConfigError
/// or IoError.
Prepared prepare(const ExperimentConfig& config);

/// Closed form for quadratic problems; centralized gradient descent with
/// alpha = 1 / (2 L_est) for kCentralizedIterations steps otherwise.
Vector compute_x_star(const Prepared& prepared);
inline constexpr std::size_t kCentralizedIterations = 200000;

/// Bounded-correction warnings for exact MUSIC entries (see stability_report).
std::vector<std::string> stability_warnings(const ExperimentConfig& config,
                                            const Prepared& prepared);

std::string resolve_output_dir(const RunSpec& run);

/// Runs every configured algorithm, writes `<label>.csv` plus `summary.csv`
/// into the output directory. Returns the exit status.
int execute(const ExperimentConfig& config, std::ostream& out,
            std::ostream& err);

int cmd_run(const std::string& config_path, std::ostream& out,
            std::ostream& err);
int cmd_validate(const std::string& config_path, std::ostream& out,
                 std::ostream& err);
int cmd_figures(const std::string& config_path, std::ostream& out,
                std::ostream& err);

}  // namespace music::cli
