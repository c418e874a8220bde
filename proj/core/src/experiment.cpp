#include "music/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "music/error.hpp"
#include "music/format.hpp"

namespace music {

std::string to_string(const TerminalStatus& s) {
  switch (s.kind) {
    case TerminalStatus::Kind::MaxIters:
      return "max_iters";
    case TerminalStatus::Kind::Converged:
      return "converged";
    case TerminalStatus::Kind::Diverged:
      return "diverged@" + std::to_string(s.at);
  }
  return "unknown";
}

std::optional<TerminalStatus> parse_terminal_status(const std::string& s) {
  if (s == "max_iters") return TerminalStatus{TerminalStatus::Kind::MaxIters, 0};
  if (s == "converged") return TerminalStatus{TerminalStatus::Kind::Converged, 0};
  constexpr std::string_view prefix = "diverged@";
  if (s.rfind(prefix, 0) == 0) {
    std::size_t at = 0;
    const char* first = s.data() + prefix.size();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, at);
    if (ec == std::errc{} && ptr == last && first != last) {
      return TerminalStatus{TerminalStatus::Kind::Diverged, at};
    }
  }
  return std::nullopt;
}

std::vector<TraceRecord> Trace::round_records() const {
  std::vector<TraceRecord> out;
  std::size_t last = 0;
  for (const auto& r : records) {
    if (r.comm_rounds > last) {
      out.push_back(r);
      last = r.comm_rounds;
    }
  }
  return out;
}

double relative_error(const AgentMatrix& x, const Vector& x_star,
                      const AgentMatrix& x0) {
  if (x.rows() != x0.rows() || x.cols() != x0.cols() ||
      x.cols() != x_star.size()) {
    throw DimensionError("relative_error: shape mismatch");
  }
  const Eigen::Index n = x.rows();
  if (n == 0) throw DimensionError("relative_error: no agents");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = (x0.row(i).transpose() - x_star).squaredNorm();
    if (denom == 0.0) {
      throw std::invalid_argument("relative_error: agent " + std::to_string(i) +
                                  " starts at x*");
    }
    sum += (x.row(i).transpose() - x_star).squaredNorm() / denom;
  }
  return sum / static_cast<double>(n);
}

Trace run(const Objective& f, const MixingMatrix& mixing,
          const AlgorithmConfig& config, const RunOptions& options,
          const Vector& x_star) {
  if (options.iterations == 0) {
    throw std::invalid_argument("run: iterations must be >= 1");
  }
  if (auto errors = config.validate(); !errors.empty()) {
    throw std::invalid_argument("run: " + errors.front());
  }
  NetworkState state = NetworkState::zeros(f.agents(), f.dim());
  const AgentMatrix x0 = state.x;
  // Validates x* against x0 before any work is done.
  (void)relative_error(state.x, x_star, x0);

  Trace trace;
  trace.records.reserve(options.iterations);
  for (std::size_t k = 0; k < options.iterations; ++k) {
    const double alpha = alpha_at(config.schedule, state.t);
    try {
      step(state, f, mixing, config);
    } catch (const DivergenceError& e) {
      trace.status = {TerminalStatus::Kind::Diverged, e.iteration()};
      return trace;
    }
    const double err = relative_error(state.x, x_star, x0);
    trace.records.push_back(
        {state.t, state.comm_rounds, state.grad_evals, err, alpha});
    if (options.stop_below > 0.0 && err <= options.stop_below) {
      trace.status = {TerminalStatus::Kind::Converged, 0};
      return trace;
    }
  }
  trace.status = {TerminalStatus::Kind::MaxIters, 0};
  return trace;
}

std::optional<std::size_t> rounds_to_threshold(const Trace& trace,
                                               double target) {
  for (const auto& r : trace.round_records()) {
    if (r.rel_error <= target) return r.comm_rounds;
  }
  return std::nullopt;
}

Plateau detect_plateau(const Trace& trace) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (trace.diverged()) return {false, kInf};
  const auto rounds = trace.round_records();
  const std::size_t k = rounds.size();
  if (k < 10) return {false, kInf};
  const std::size_t split = k - std::max<std::size_t>(1, k / 10);

  double best_before = kInf;
  for (std::size_t i = 0; i < split; ++i) {
    best_before = std::min(best_before, rounds[i].rel_error);
  }
  std::vector<double> tail;
  for (std::size_t i = split; i < k; ++i) tail.push_back(rounds[i].rel_error);
  const double best_tail = *std::min_element(tail.begin(), tail.end());

  std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
  const double median = tail[tail.size() / 2];

  const bool steady = best_before == 0.0 ||
                      (best_before - best_tail) / best_before < 0.01;
  return {steady, median};
}

RateFit fit_linear_rate(const std::vector<RoundPoint>& window) {
  if (window.size() < 3) {
    throw std::invalid_argument("fit_linear_rate: need >= 3 points, got " +
                                std::to_string(window.size()));
  }
  for (const auto& p : window) {
    if (!(p.error > 0.0) || !std::isfinite(p.error)) {
      throw std::invalid_argument("fit_linear_rate: errors must be positive");
    }
  }
  // Offsets from the first point keep a constant series exactly flat.
  const double x0 = window.front().round;
  const double y0 = std::log(window.front().error);
  double sx = 0.0, sy = 0.0;
  for (const auto& p : window) {
    sx += p.round - x0;
    sy += std::log(p.error) - y0;
  }
  const auto n = static_cast<double>(window.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : window) {
    const double dx = p.round - x0 - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.error) - y0 - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("fit_linear_rate: rounds are all equal");
  }
  const double slope = sxy / sxx;
  RateFit fit;
  fit.rho = std::exp(slope);
  fit.contracting = slope <= 0.0;
  fit.points = window.size();
  return fit;
}

std::vector<RoundPoint> pre_plateau_window(const Trace& trace) {
  const Plateau plateau = detect_plateau(trace);
  const double floor = plateau.steady ? 10.0 * plateau.level : 0.0;
  std::vector<RoundPoint> pts;
  for (const auto& r : trace.round_records()) {
    if (r.rel_error > floor && std::isfinite(r.rel_error)) {
      pts.push_back({static_cast<double>(r.comm_rounds), r.rel_error});
    } else if (plateau.steady) {
      break;
    }
  }
  const std::size_t keep = std::min(pts.size(), std::max<std::size_t>(3, pts.size() / 2));
  pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(keep));
  return pts;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t,comm_rounds,grad_evals,rel_error,alpha\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << r.comm_rounds << ',' << r.grad_evals << ','
        << format_double(r.rel_error) << ',' << format_double(r.alpha) << '\n';
  }
  out << "# status=" << to_string(trace.status) << '\n';
}

void export_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "bad field '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_status = false;
  if (!std::getline(in, line) || line != "t,comm_rounds,grad_evals,rel_error,alpha") {
    throw ParseError(1, "missing trace header");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# status=", 0) == 0) {
      auto status = parse_terminal_status(line.substr(9));
      if (!status) throw ParseError(line_no, "bad status '" + line + "'");
      trace.status = *status;
      have_status = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields");
    trace.records.push_back({parse_field<std::size_t>(fields[0], line_no),
                             parse_field<std::size_t>(fields[1], line_no),
                             parse_field<std::size_t>(fields[2], line_no),
                             parse_field<double>(fields[3], line_no),
                             parse_field<double>(fields[4], line_no)});
  }
  if (!have_status) throw ParseError(line_no, "missing status line");
  return trace;
}

std::vector<LabeledTrace> compare(const Objective& f, const MixingMatrix& w,
                                  const MixingMatrix& w_bar,
                                  const std::vector<LabeledConfig>& configs,
                                  const CompareOptions& options,
                                  const Vector& x_star) {
  std::vector<LabeledTrace> out;
  out.reserve(configs.size());
  for (const auto& lc : configs) {
    LabeledTrace lt;
    lt.label = lc.label;
    lt.config = lc.config;
    try {
      const MixingMatrix& mixing = uses_half_identity(lc.config.kind) ? w_bar : w;
      lt.trace = run(f, mixing, lc.config, options.run, x_star);
    } catch (const std::exception& e) {
      lt.error = e.what();
      out.push_back(std::move(lt));
      continue;
    }
    if (options.target_error > 0.0) {
      lt.rounds_to_target = rounds_to_threshold(lt.trace, options.target_error);
    }
    lt.plateau = detect_plateau(lt.trace);
    if (!lt.trace.diverged()) {
      try {
        lt.rate = fit_linear_rate(pre_plateau_window(lt.trace));
      } catch (const std::invalid_argument&) {
        lt.rate.reset();
      }
    }
    out.push_back(std::move(lt));
  }
  return out;
}

}  // namespace music
