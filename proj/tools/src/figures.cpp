#include "music/cli/figures.hpp"

#include <array>
#include <utility>

namespace music::cli {

namespace {

constexpr std::array<std::string_view, 7> kNames{
    "fig2a", "fig2b", "fig2c", "fig2d", "fig4", "fig6", "fig7"};

ExperimentConfig least_squares_base(std::size_t iterations, double target) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::Quadratic;
  c.problem.mu = 1e-6;
  c.problem.source = SyntheticSource{10, 10, kRecipeDataSeed};
  c.network = {100, 4.0, kRecipeGraphSeed, "metropolis"};
  c.run.iterations = iterations;
  c.run.target_error = target;
  return c;
}

ExperimentConfig logistic_base() {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::Logistic;
  c.problem.mu = 1e-3;
  c.problem.source = SyntheticSource{16, 30, kRecipeDataSeed};
  c.network = {50, 4.0, kRecipeGraphSeed, "metropolis"};
  c.run.iterations = 80000;
  c.run.target_error = 1e-10;
  return c;
}

LabeledConfig curve(std::string label, AlgorithmKind kind, std::size_t e,
                    double beta, StepSchedule schedule) {
  return {std::move(label), AlgorithmConfig{kind, e, beta, schedule}};
}

std::string e_label(std::string_view prefix, std::size_t e) {
  return std::string(prefix) + "_E" + std::to_string(e);
}

std::vector<LabeledConfig> exact_family(const std::vector<std::size_t>& es,
                                        bool with_easgd) {
  const auto step = StepSchedule::constant(2e-3);
  std::vector<LabeledConfig> curves{
      curve("exact_diffusion", AlgorithmKind::ExactDiffusion, 1, 1.0, step)};
  for (std::size_t e : es) {
    curves.push_back(curve(e_label("exact_music", e), AlgorithmKind::ExactMusic,
                           e, 1.0, step));
  }
  if (with_easgd) {
    curves.push_back(curve("easgd_like_E3", AlgorithmKind::EasgdLike, 3, 1.0, step));
  }
  return curves;
}

}  // namespace

std::vector<std::string_view> figure_names() {
  return {kNames.begin(), kNames.end()};
}

std::optional<FigureRecipe> figure_recipe(std::string_view name) {
  FigureRecipe r;
  r.name = std::string(name);
  const auto inexact = AlgorithmKind::InexactMusic;
  if (name == "fig2a") {
    r.config = least_squares_base(200000, 1e-1);
    for (std::size_t e : {1, 2, 4, 8}) {
      r.config.algorithms.push_back(curve(e_label("inexact_music", e), inexact,
                                          e, 1.0, StepSchedule::constant(1e-4)));
    }
  } else if (name == "fig2b") {
    r.config = least_squares_base(200000, 1e-1);
    const std::array<std::pair<double, const char*>, 4> alphas{
        {{1e-4, "1e-4"}, {2e-4, "2e-4"}, {5e-4, "5e-4"}, {1e-3, "1e-3"}}};
    for (const auto& [a, tag] : alphas) {
      r.config.algorithms.push_back(curve(std::string("inexact_music_E3_alpha") + tag,
                                          inexact, 3, 1.0, StepSchedule::constant(a)));
    }
    r.config.algorithms.push_back(curve("inexact_music_E3_diminishing", inexact, 3,
                                        1.0, StepSchedule::diminishing(1e-3, 0.5)));
  } else if (name == "fig2c") {
    r.config = least_squares_base(200000, 1e-1);
    for (std::size_t e : {1, 2, 4, 8}) {
      r.config.algorithms.push_back(curve(e_label("inexact_music", e), inexact, e,
                                          1.0, StepSchedule::diminishing(1e-3, 0.5)));
    }
  } else if (name == "fig2d") {
    r.config = least_squares_base(200000, 1e-1);
    const std::array<std::pair<double, const char*>, 4> deltas{
        {{0.3, "0.3"}, {0.5, "0.5"}, {0.7, "0.7"}, {0.9, "0.9"}}};
    for (const auto& [d, tag] : deltas) {
      r.config.algorithms.push_back(curve(std::string("inexact_music_E3_delta") + tag,
                                          inexact, 3, 1.0,
                                          StepSchedule::diminishing(1e-3, d)));
    }
  } else if (name == "fig4") {
    r.config = least_squares_base(20000, 1e-6);
    r.config.algorithms = exact_family({1, 2, 3, 4}, false);
  } else if (name == "fig6" || name == "fig7") {
    r.config = logistic_base();
    r.config.algorithms = exact_family({2, 3, 4}, true);
  } else {
    return std::nullopt;
  }
  return r;
}

ExperimentConfig apply_overrides(const FigureRecipe& recipe,
                                 const FigureConfig& overrides) {
  ExperimentConfig c = recipe.config;
  if (overrides.problem) c.problem = *overrides.problem;
  if (overrides.network) c.network = *overrides.network;
  if (overrides.run.iterations > 0) c.run.iterations = overrides.run.iterations;
  if (overrides.run.target_error) c.run.target_error = overrides.run.target_error;
  c.run.output_dir = overrides.run.output_dir;
  c.run.figure = recipe.name;
  return c;
}

}  // namespace music::cli
