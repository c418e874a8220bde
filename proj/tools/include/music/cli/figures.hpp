#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "music/cli/config.hpp"

namespace music::cli {

/// Parameterization of one published figure.
///
/// Defaults:
///   fig2a  inexact MUSIC, E in {1,2,4,8}, constant alpha = 1e-4
///   fig2b  inexact MUSIC, E = 3, constant alpha in {1e-4,2e-4,5e-4,1e-3}
///          plus alpha = 1e-3 / t^0.5 for reference (alpha values assumed)
///   fig2c  inexact MUSIC, E in {1,2,4,8}, alpha = 1e-3 / t^0.5
///   fig2d  inexact MUSIC, E = 3, alpha = 1e-3 / t^delta,
///          delta in {0.3,0.5,0.7,0.9} (delta values assumed)
///   fig4   exact diffusion and exact MUSIC E in {1,2,3,4}, beta = 1,
///          alpha = 2e-3
///   fig6   logistic regression: exact diffusion, exact MUSIC E in {2,3,4}
///          and the EASGD-like variant E = 3, beta = 1, alpha = 2e-3
///          (alpha assumed; not stated for this experiment)
///   fig7   same curves as fig6, read against communication rounds
///
/// The least-squares figures use N = 100, p = m = 10, mu = 1e-6 on uniform
/// [0, 1] data. The logistic figures default to a synthetic stand-in
/// (N = 50, m = 30, p = 16, mu = 1e-3); point `problem` at a LIBSVM file to
/// use real data. All networks are Erdos-Renyi with average degree 4 and
/// Metropolis weights.
struct FigureRecipe {
  std::string name;
  ExperimentConfig config;
};

std::vector<std::string_view> figure_names();
std::optional<FigureRecipe> figure_recipe(std::string_view name);

/// Recipe defaults with the figure config's overrides applied.
ExperimentConfig apply_overrides(const FigureRecipe& recipe,
                                 const FigureConfig& overrides);

// Seeds shared by every recipe.
inline constexpr std::uint64_t kRecipeDataSeed = 1;
inline constexpr std::uint64_t kRecipeGraphSeed = 1;

}  // namespace music::cli
