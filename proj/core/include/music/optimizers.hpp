#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "music/objectives.hpp"
#include "music/topology.hpp"
#include "music/types.hpp"

namespace music {

enum class AlgorithmKind {
  Dgd,
  Atc,
  InexactMusic,
  ExactDiffusion,
  ExactMusic,
  EasgdLike,
};

std::string_view to_string(AlgorithmKind kind);
std::optional<AlgorithmKind> parse_algorithm_kind(std::string_view name);

/// The exact family (exact diffusion, exact MUSIC, the EASGD-like variant)
/// combines with (W + I) / 2 instead of W.
bool uses_half_identity(AlgorithmKind kind);

/// Single-combination baselines: one local update per communication round.
bool is_single_update(AlgorithmKind kind);

struct StepSchedule {
  enum class Kind { Constant, Diminishing };

  Kind kind = Kind::Constant;
  double alpha0 = 0.0;
  /// Decay exponent in (0, 2); unused for Constant.
  double delta = 0.0;

  static StepSchedule constant(double alpha0) {
    return {Kind::Constant, alpha0, 0.0};
  }
  static StepSchedule diminishing(double alpha0, double delta) {
    return {Kind::Diminishing, alpha0, delta};
  }
};

/// Constant: alpha0. Diminishing: alpha0 / (t + 1)^delta, so iteration 0
/// takes the full base step.
double alpha_at(const StepSchedule& schedule, std::size_t t);

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::InexactMusic;
  /// Local updates per communication round (E).
  std::size_t local_updates = 1;
  /// Correction gain in [0, 1]; only the exact MUSIC and EASGD-like steps
  /// read it.
  double beta = 1.0;
  StepSchedule schedule;

  /// Human-readable problems; empty when the configuration is usable.
  std::vector<std::string> validate() const;
};

/// Per-agent iterates plus the cost counters.
///
/// x holds x_i^t, v the most recent post-gradient iterate v_i^t, anchor the
/// frozen correction beta * (x_i^{t0} - v_i^{t0}) from the last combination.
/// All three start at zero, so v^0 = x^0 and the first correction vanishes.
struct NetworkState {
  AgentMatrix x;
  AgentMatrix v;
  AgentMatrix anchor;
  std::size_t t = 0;
  std::size_t comm_rounds = 0;
  std::size_t grad_evals = 0;

  static NetworkState zeros(std::size_t agents, std::size_t dim);

  std::size_t agents() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

/// Norm guard applied to every agent's iterate after each step.
inline constexpr double kDivergenceNorm = 1e12;

// Each step advances the state by one iteration and throws DivergenceError
// (carrying the 1-based iteration count) when an iterate turns non-finite or
// its norm exceeds kDivergenceNorm. Gradients are always taken at the
// pre-step iterate x^t of every agent.

/// x_i <- sum_j w_ij x_j - alpha grad f_i(x_i).
void step_dgd(NetworkState& s, const Objective& f, const MixingMatrix& w,
              const StepSchedule& schedule);

/// v_i <- x_i - alpha grad f_i(x_i); x_i <- sum_j w_ij v_j.
void step_atc(NetworkState& s, const Objective& f, const MixingMatrix& w,
              const StepSchedule& schedule);

/// E - 1 local gradient steps, then one ATC-style combination.
void step_inexact_music(NetworkState& s, const Objective& f,
                        const MixingMatrix& w, const AlgorithmConfig& config);

/// Adapt-correct-combine: x_i <- sum_j wbar_ij (v_j^{t+1} + x_j^t - v_j^t).
void step_exact_diffusion(NetworkState& s, const Objective& f,
                          const MixingMatrix& w_bar,
                          const StepSchedule& schedule);

/// Exact MUSIC. Inner steps add the frozen anchor to the gradient step;
/// the combination step mixes (v + anchor) and refreshes
/// anchor <- beta * (x_new - v_new).
void step_exact_music(NetworkState& s, const Objective& f,
                      const MixingMatrix& w_bar, const AlgorithmConfig& config);

/// Like step_exact_music, but inner steps are plain gradient steps: the
/// correction is applied only inside the combination.
void step_easgd_like(NetworkState& s, const Objective& f,
                     const MixingMatrix& w_bar, const AlgorithmConfig& config);

/// Dispatches on config.kind. `mixing` must already be W or W-bar as
/// uses_half_identity() dictates.
void step(NetworkState& s, const Objective& f, const MixingMatrix& mixing,
          const AlgorithmConfig& config);

struct StabilityReport {
  double lambda = 0.0;
  double nu = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool stable = false;
};

/// Bounded-correction condition for exact MUSIC:
///   nu^E (1 - c) <= 1 - c - beta ||Z||,  c = beta nu / (1 - nu) ||Z - I||,
/// with lambda = mu L / (mu + L) and nu = sqrt(1 - 2 alpha lambda).
/// Throws std::invalid_argument unless 0 < alpha <= 1 / (2 L).
StabilityReport stability_report(const ConvexityBounds& bounds, double alpha,
                                 std::size_t local_updates, double beta,
                                 double z_norm, double zmi_norm);

inline bool stability_check(const ConvexityBounds& bounds, double alpha,
                            std::size_t local_updates, double beta,
                            double z_norm, double zmi_norm) {
  return stability_report(bounds, alpha, local_updates, beta, z_norm, zmi_norm)
      .stable;
}

}  // namespace music
