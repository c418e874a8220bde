#include "music/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "music/cli/figures.hpp"
#include "music/dataio.hpp"
#include "music/error.hpp"
#include "music/experiment.hpp"
#include "music/format.hpp"

namespace music::cli {

namespace fs = std::filesystem;

namespace {

struct LoadedJson {
  std::optional<nlohmann::json> doc;
  int status = kExitOk;
};

LoadedJson load_json(const std::string& path, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot open config '" << path << "'\n";
    return {std::nullopt, kExitIo};
  }
  try {
    return {nlohmann::json::parse(in), kExitOk};
  } catch (const nlohmann::json::parse_error& e) {
    err << "error: " << path << ": invalid JSON: " << e.what() << '\n';
    return {std::nullopt, kExitValidation};
  }
}

void report(std::ostream& err, const std::vector<std::string>& errors) {
  for (const auto& e : errors) err << "error: " << e << '\n';
}

std::unique_ptr<Objective> build_problem(const ExperimentConfig& c) {
  const ProblemSpec& spec = c.problem;
  const std::size_t n = c.network.n;
  if (const auto* syn = std::get_if<SyntheticSource>(&spec.source)) {
    if (spec.kind == ProblemKind::Quadratic) {
      return std::make_unique<QuadraticProblem>(
          synth_uniform(syn->p, syn->m, n, spec.mu, syn->seed));
    }
    return std::make_unique<LogisticProblem>(
        synth_logistic(syn->p, syn->m, n, spec.mu, syn->seed));
  }
  const auto& src = std::get<LibsvmSource>(spec.source);
  Dataset data;
  try {
    data = load_libsvm(src.path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (src.label_pos) {
    try {
      data = binary_filter(data, *src.label_pos, *src.label_neg);
    } catch (const Error& e) {
      throw ConfigError(std::string(src.path) + ": " + e.what());
    }
  }
  if (data.dim == 0) throw ConfigError(src.path + ": dataset has no features");
  std::vector<std::vector<std::size_t>> shards;
  try {
    shards = partition(data, n, src.m_per_agent, src.seed);
  } catch (const Error& e) {
    throw ConfigError(src.path + ": " + e.what());
  }
  if (spec.kind == ProblemKind::Quadratic) {
    return std::make_unique<QuadraticProblem>(
        quadratic_from_dataset(data, shards, data.dim, spec.mu));
  }
  return std::make_unique<LogisticProblem>(
      logistic_from_dataset(data, shards, data.dim, spec.mu));
}

std::string optional_count(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string{};
}

}  // namespace

Prepared prepare(const ExperimentConfig& config) {
  Prepared p;
  p.problem = build_problem(config);
  try {
    p.graph = erdos_renyi(config.network.n, config.network.avg_degree,
                          config.network.seed);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
  p.w = metropolis_weights(p.graph);
  p.w_bar = half_identity(p.w);
  p.bounds = estimate_bounds(*p.problem);
  return p;
}

Vector compute_x_star(const Prepared& prepared) {
  if (const auto* quad = dynamic_cast<const QuadraticProblem*>(prepared.problem.get())) {
    return quad->optimum();
  }
  const double alpha = 1.0 / (2.0 * prepared.bounds.L);
  return centralized_gd_optimum(*prepared.problem, alpha, kCentralizedIterations).x;
}

std::vector<std::string> stability_warnings(const ExperimentConfig& config,
                                            const Prepared& prepared) {
  std::vector<std::string> warnings;
  const double z = prepared.w_bar.spectral_norm();
  const double zmi = prepared.w_bar.spectral_norm_minus_identity();
  const double alpha_max = 1.0 / (2.0 * prepared.bounds.L);
  for (const auto& lc : config.algorithms) {
    if (lc.config.kind != AlgorithmKind::ExactMusic) continue;
    const double alpha = lc.config.schedule.alpha0;
    if (alpha > alpha_max) {
      warnings.push_back(lc.label + ": alpha0=" + format_double(alpha) +
                         " exceeds 1/(2L)=" + format_double(alpha_max) +
                         "; bounded-correction condition not evaluated");
      continue;
    }
    const auto r = stability_report(prepared.bounds, alpha,
                                    lc.config.local_updates, lc.config.beta, z, zmi);
    if (!r.stable) {
      warnings.push_back(lc.label + ": (E=" + std::to_string(lc.config.local_updates) +
                         ", beta=" + format_double(lc.config.beta) +
                         ") violates the bounded-correction condition (lhs=" +
                         format_double(r.lhs) + " > rhs=" + format_double(r.rhs) +
                         ", nu=" + format_double(r.nu) + ")");
    }
  }
  return warnings;
}

std::string resolve_output_dir(const RunSpec& run) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return run.output_dir;
}

int execute(const ExperimentConfig& config, std::ostream& out,
            std::ostream& err) {
  Prepared prepared;
  try {
    prepared = prepare(config);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  for (const auto& w : stability_warnings(config, prepared)) {
    err << "warning: " << w << '\n';
  }

  Vector x_star;
  try {
    x_star = compute_x_star(prepared);
  } catch (const std::exception& e) {
    err << "error: computing x*: " << e.what() << '\n';
    return kExitValidation;
  }

  const fs::path dir = resolve_output_dir(config.run);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << dir.string()
        << "': " << ec.message() << '\n';
    return kExitIo;
  }

  CompareOptions options;
  options.run.iterations = config.run.iterations;
  options.target_error = config.run.target_error.value_or(0.0);
  const auto results = compare(*prepared.problem, prepared.w, prepared.w_bar,
                               config.algorithms, options, x_star);

  try {
    for (const auto& r : results) {
      if (r.error) continue;
      export_csv(r.trace, (dir / (r.label + ".csv")).string());
    }
    const fs::path summary_path = dir / "summary.csv";
    std::ofstream summary(summary_path, std::ios::binary | std::ios::trunc);
    if (!summary) throw IoError("cannot open '" + summary_path.string() + "'");
    summary << "label,final_rel_error,rounds_to_target,rate,status\n";
    for (const auto& r : results) {
      summary << r.label << ',';
      if (r.error) {
        summary << ",,,failed\n";
        err << "error: " << r.label << ": " << *r.error << '\n';
        continue;
      }
      if (!r.trace.records.empty()) {
        summary << format_double(r.trace.records.back().rel_error);
      }
      summary << ',' << optional_count(r.rounds_to_target) << ',';
      if (r.rate) summary << format_double(r.rate->rho);
      summary << ',' << to_string(r.trace.status) << '\n';
    }
    summary.flush();
    if (!summary) throw IoError("write to '" + summary_path.string() + "' failed");
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }

  for (const auto& r : results) {
    out << r.label << ": ";
    if (r.error) {
      out << "failed\n";
      continue;
    }
    out << to_string(r.trace.status);
    if (!r.trace.records.empty()) {
      out << ", final rel_error " << format_double(r.trace.records.back().rel_error);
    }
    if (r.rounds_to_target) out << ", rounds to target " << *r.rounds_to_target;
    out << '\n';
  }
  out << "wrote " << results.size() << " traces to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_run(const std::string& config_path, std::ostream& out,
            std::ostream& err) {
  auto loaded = load_json(config_path, err);
  if (!loaded.doc) return loaded.status;
  auto parsed = parse_experiment_config(*loaded.doc);
  if (!parsed.config) {
    report(err, parsed.errors);
    return kExitValidation;
  }
  return execute(*parsed.config, out, err);
}

int cmd_validate(const std::string& config_path, std::ostream& out,
                 std::ostream& err) {
  auto loaded = load_json(config_path, err);
  if (!loaded.doc) return loaded.status;
  auto parsed = parse_experiment_config(*loaded.doc);
  if (!parsed.config) {
    report(err, parsed.errors);
    return kExitValidation;
  }
  try {
    const Prepared prepared = prepare(*parsed.config);
    for (const auto& w : stability_warnings(*parsed.config, prepared)) {
      err << "warning: " << w << '\n';
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  out << "ok\n";
  return kExitOk;
}

int cmd_figures(const std::string& config_path, std::ostream& out,
                std::ostream& err) {
  auto loaded = load_json(config_path, err);
  if (!loaded.doc) return loaded.status;
  auto parsed = parse_figure_config(*loaded.doc);
  if (!parsed.config) {
    report(err, parsed.errors);
    return kExitValidation;
  }
  const std::string name = parsed.config->run.figure.value_or("");
  auto recipe = figure_recipe(name);
  if (!recipe) {
    err << "error: /run/figure: unknown recipe '" << name << "' (known:";
    for (auto n : figure_names()) err << ' ' << n;
    err << ")\n";
    return kExitValidation;
  }
  return execute(apply_overrides(*recipe, *parsed.config), out, err);
}

}  // namespace music::cli
