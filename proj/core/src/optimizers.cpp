#include "music/optimizers.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

#include "music/error.hpp"
#include "music/format.hpp"

namespace music {

namespace {

constexpr std::array<std::pair<AlgorithmKind, std::string_view>, 6> kNames{{
    {AlgorithmKind::Dgd, "dgd"},
    {AlgorithmKind::Atc, "atc"},
    {AlgorithmKind::InexactMusic, "inexact_music"},
    {AlgorithmKind::ExactDiffusion, "exact_diffusion"},
    {AlgorithmKind::ExactMusic, "exact_music"},
    {AlgorithmKind::EasgdLike, "easgd_like"},
}};

std::span<const double> row_span(const AgentMatrix& m, std::size_t i) {
  return {m.data() + i * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

std::span<double> row_span(AgentMatrix& m, std::size_t i) {
  return {m.data() + i * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

void check_shapes(const NetworkState& s, const Objective& f,
                  const MixingMatrix& w) {
  if (s.agents() != f.agents() || s.dim() != f.dim()) {
    throw DimensionError("state is " + std::to_string(s.agents()) + "x" +
                         std::to_string(s.dim()) + " but problem is " +
                         std::to_string(f.agents()) + "x" +
                         std::to_string(f.dim()));
  }
  if (w.size() != s.agents()) {
    throw DimensionError("mixing matrix size " + std::to_string(w.size()) +
                         " != agent count " + std::to_string(s.agents()));
  }
}

/// v_next.row(i) = x.row(i) - alpha * grad f_i(x.row(i)).
AgentMatrix local_update(const NetworkState& s, const Objective& f,
                         double alpha) {
  AgentMatrix grad(s.x.rows(), s.x.cols());
  for (std::size_t i = 0; i < s.agents(); ++i) {
    f.gradient(i, row_span(s.x, i), row_span(grad, i));
  }
  AgentMatrix v_next = s.x - alpha * grad;
  return v_next;
}

void guard(const NetworkState& s) {
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    const double norm = s.x.row(i).norm();
    if (!std::isfinite(norm) || norm > kDivergenceNorm) {
      throw DivergenceError(s.t);
    }
  }
}

bool combines_now(const NetworkState& s, std::size_t local_updates) {
  return (s.t + 1) % local_updates == 0;
}

void finish(NetworkState& s, bool communicated) {
  ++s.t;
  ++s.grad_evals;
  if (communicated) ++s.comm_rounds;
  guard(s);
}

void require_kind(const AlgorithmConfig& c, AlgorithmKind kind) {
  if (c.kind != kind) {
    throw std::invalid_argument(std::string("config kind is ") +
                                std::string(to_string(c.kind)) + ", expected " +
                                std::string(to_string(kind)));
  }
  if (c.local_updates == 0) throw std::invalid_argument("E must be >= 1");
}

/// Shared body of exact MUSIC and the EASGD-like variant; they differ only
/// in whether inner steps add the anchor.
void corrected_step(NetworkState& s, const Objective& f,
                    const MixingMatrix& w_bar, const AlgorithmConfig& c,
                    bool correct_inner_steps) {
  check_shapes(s, f, w_bar);
  AgentMatrix v_next = local_update(s, f, alpha_at(c.schedule, s.t));
  const bool comm = combines_now(s, c.local_updates);
  if (comm) {
    const AgentMatrix corrected = v_next + s.anchor;
    w_bar.combine(corrected, s.x);
    s.anchor = c.beta * (s.x - v_next);
  } else if (correct_inner_steps) {
    s.x = v_next + s.anchor;
  } else {
    s.x = v_next;
  }
  s.v = std::move(v_next);
  finish(s, comm);
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<AlgorithmKind> parse_algorithm_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool uses_half_identity(AlgorithmKind kind) {
  return kind == AlgorithmKind::ExactDiffusion ||
         kind == AlgorithmKind::ExactMusic || kind == AlgorithmKind::EasgdLike;
}

bool is_single_update(AlgorithmKind kind) {
  return kind == AlgorithmKind::Dgd || kind == AlgorithmKind::Atc ||
         kind == AlgorithmKind::ExactDiffusion;
}

double alpha_at(const StepSchedule& schedule, std::size_t t) {
  if (schedule.kind == StepSchedule::Kind::Constant) return schedule.alpha0;
  return schedule.alpha0 /
         std::pow(static_cast<double>(t) + 1.0, schedule.delta);
}

std::vector<std::string> AlgorithmConfig::validate() const {
  std::vector<std::string> errors;
  if (local_updates < 1) errors.push_back("E must be >= 1");
  if (is_single_update(kind) && local_updates != 1) {
    errors.push_back(std::string(to_string(kind)) + " requires E = 1 (got " +
                     std::to_string(local_updates) + ")");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    errors.push_back("beta must lie in [0, 1] (got " + format_double(beta) + ")");
  }
  if (!(schedule.alpha0 > 0.0) || !std::isfinite(schedule.alpha0)) {
    errors.push_back("alpha0 must be > 0 (got " + format_double(schedule.alpha0) +
                     ")");
  }
  if (schedule.kind == StepSchedule::Kind::Diminishing &&
      !(schedule.delta > 0.0 && schedule.delta < 2.0)) {
    errors.push_back("delta must lie in (0, 2) (got " +
                     format_double(schedule.delta) + ")");
  }
  return errors;
}

NetworkState NetworkState::zeros(std::size_t agents, std::size_t dim) {
  NetworkState s;
  const auto n = static_cast<Eigen::Index>(agents);
  const auto p = static_cast<Eigen::Index>(dim);
  s.x = AgentMatrix::Zero(n, p);
  s.v = AgentMatrix::Zero(n, p);
  s.anchor = AgentMatrix::Zero(n, p);
  return s;
}

void step_dgd(NetworkState& s, const Objective& f, const MixingMatrix& w,
              const StepSchedule& schedule) {
  check_shapes(s, f, w);
  const double alpha = alpha_at(schedule, s.t);
  AgentMatrix grad(s.x.rows(), s.x.cols());
  for (std::size_t i = 0; i < s.agents(); ++i) {
    f.gradient(i, row_span(s.x, i), row_span(grad, i));
  }
  w.combine(s.x, s.v);
  s.x = s.v - alpha * grad;
  finish(s, true);
}

void step_atc(NetworkState& s, const Objective& f, const MixingMatrix& w,
              const StepSchedule& schedule) {
  check_shapes(s, f, w);
  s.v = local_update(s, f, alpha_at(schedule, s.t));
  w.combine(s.v, s.x);
  finish(s, true);
}

void step_inexact_music(NetworkState& s, const Objective& f,
                        const MixingMatrix& w, const AlgorithmConfig& config) {
  require_kind(config, AlgorithmKind::InexactMusic);
  check_shapes(s, f, w);
  s.v = local_update(s, f, alpha_at(config.schedule, s.t));
  const bool comm = combines_now(s, config.local_updates);
  if (comm) {
    w.combine(s.v, s.x);
  } else {
    s.x = s.v;
  }
  finish(s, comm);
}

void step_exact_diffusion(NetworkState& s, const Objective& f,
                          const MixingMatrix& w_bar,
                          const StepSchedule& schedule) {
  check_shapes(s, f, w_bar);
  AgentMatrix v_next = local_update(s, f, alpha_at(schedule, s.t));
  // y = v^{t+1} + (x^t - v^t); the correction is formed first so the sum
  // rounds the same way as exact MUSIC's v + anchor.
  const AgentMatrix correction = s.x - s.v;
  const AgentMatrix y = v_next + correction;
  w_bar.combine(y, s.x);
  s.v = std::move(v_next);
  s.anchor = s.x - s.v;
  finish(s, true);
}

void step_exact_music(NetworkState& s, const Objective& f,
                      const MixingMatrix& w_bar, const AlgorithmConfig& config) {
  require_kind(config, AlgorithmKind::ExactMusic);
  corrected_step(s, f, w_bar, config, true);
}

void step_easgd_like(NetworkState& s, const Objective& f,
                     const MixingMatrix& w_bar, const AlgorithmConfig& config) {
  require_kind(config, AlgorithmKind::EasgdLike);
  corrected_step(s, f, w_bar, config, false);
}

void step(NetworkState& s, const Objective& f, const MixingMatrix& mixing,
          const AlgorithmConfig& config) {
  switch (config.kind) {
    case AlgorithmKind::Dgd:
      return step_dgd(s, f, mixing, config.schedule);
    case AlgorithmKind::Atc:
      return step_atc(s, f, mixing, config.schedule);
    case AlgorithmKind::InexactMusic:
      return step_inexact_music(s, f, mixing, config);
    case AlgorithmKind::ExactDiffusion:
      return step_exact_diffusion(s, f, mixing, config.schedule);
    case AlgorithmKind::ExactMusic:
      return step_exact_music(s, f, mixing, config);
    case AlgorithmKind::EasgdLike:
      return step_easgd_like(s, f, mixing, config);
  }
  throw std::invalid_argument("unknown algorithm kind");
}

StabilityReport stability_report(const ConvexityBounds& bounds, double alpha,
                                 std::size_t local_updates, double beta,
                                 double z_norm, double zmi_norm) {
  if (!(bounds.L > 0.0)) throw std::invalid_argument("L must be > 0");
  if (!(alpha > 0.0) || alpha > 1.0 / (2.0 * bounds.L)) {
    throw std::invalid_argument("alpha=" + format_double(alpha) +
                                " outside (0, 1/(2L)] with L=" +
                                format_double(bounds.L));
  }
  StabilityReport r;
  r.lambda = bounds.mu * bounds.L / (bounds.mu + bounds.L);
  r.nu = std::sqrt(1.0 - 2.0 * alpha * r.lambda);
  const double nu_e = std::pow(r.nu, static_cast<double>(local_updates));
  if (beta == 0.0) {
    r.lhs = nu_e;
    r.rhs = 1.0;
  } else if (r.nu >= 1.0) {
    // No contraction (mu = 0): the correction term is unbounded.
    r.lhs = nu_e;
    r.rhs = -std::numeric_limits<double>::infinity();
  } else {
    const double c = beta * r.nu / (1.0 - r.nu) * zmi_norm;
    r.lhs = nu_e * (1.0 - c);
    r.rhs = 1.0 - c - beta * z_norm;
  }
  r.stable = r.lhs <= r.rhs;
  return r;
}

}  // namespace music
