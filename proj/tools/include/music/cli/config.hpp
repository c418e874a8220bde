#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "music/experiment.hpp"

namespace music::cli {

enum class ProblemKind { Quadratic, Logistic };

struct SyntheticSource {
  std::size_t p = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
};

struct LibsvmSource {
  std::string path;
  /// Required for logistic problems; quadratic problems may use every label.
  std::optional<double> label_pos;
  std::optional<double> label_neg;
  std::size_t m_per_agent = 0;
  std::uint64_t seed = 0;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Quadratic;
  std::variant<SyntheticSource, LibsvmSource> source;
  double mu = 0.0;
};

struct NetworkSpec {
  std::size_t n = 0;
  double avg_degree = 0.0;
  std::uint64_t seed = 0;
  std::string rule = "metropolis";
};

struct RunSpec {
  std::size_t iterations = 0;
  std::optional<double> target_error;
  std::string output_dir;
  /// Only in figure configs.
  std::optional<std::string> figure;
};

struct ExperimentConfig {
  ProblemSpec problem;
  NetworkSpec network;
  std::vector<LabeledConfig> algorithms;
  RunSpec run;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
};

/// Schema and per-field validation of a `run`/`validate` config. Every
/// problem is reported; unknown keys are errors.
ConfigResult parse_experiment_config(const nlohmann::json& doc);

/// A `figures` config names a recipe and optionally overrides parts of it.
struct FigureConfig {
  RunSpec run;
  std::optional<ProblemSpec> problem;
  std::optional<NetworkSpec> network;
};

struct FigureConfigResult {
  std::optional<FigureConfig> config;
  std::vector<std::string> errors;
};

/// `run` must carry `figure` and `output_dir`; `T` and `target_error` are
/// optional, as are whole `problem` and `network` blocks. `algorithms` is
/// not allowed (the recipe fixes the curves).
FigureConfigResult parse_figure_config(const nlohmann::json& doc);

std::string_view to_string(ProblemKind kind);

}  // namespace music::cli
