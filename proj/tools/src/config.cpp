#include "music/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <set>

#include "music/format.hpp"

namespace music::cli {

namespace {

using nlohmann::json;

/// Collects every schema problem with a JSON-pointer-like path.
class Checker {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }

  bool object(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void known_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> keys) {
    for (const auto& [key, _] : j.items()) {
      if (std::none_of(keys.begin(), keys.end(),
                       [&](const char* k) { return key == k; })) {
        fail(path + "/" + key, "unknown key '" + key + "'");
      }
    }
  }

  const json* field(const json& j, const std::string& path, const char* key,
                    bool required = true) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "/" + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> real(const json& j, const std::string& path,
                             const char* key, bool required = true) {
    const json* v = field(j, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(path + "/" + key, "expected a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      fail(path + "/" + key, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::uint64_t> count(const json& j, const std::string& path,
                                     const char* key, bool required = true) {
    const json* v = field(j, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) {
      fail(path + "/" + key, "expected a non-negative integer");
      return std::nullopt;
    }
    return v->get<std::uint64_t>();
  }

  std::optional<std::string> text(const json& j, const std::string& path,
                                  const char* key, bool required = true) {
    const json* v = field(j, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(path + "/" + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }
};

std::optional<ProblemSpec> parse_problem(Checker& c, const json& j,
                                         const std::string& path) {
  if (!c.object(j, path)) return std::nullopt;
  c.known_keys(j, path, {"kind", "source", "mu"});
  const std::size_t before = c.errors.size();
  ProblemSpec spec;

  if (auto kind = c.text(j, path, "kind")) {
    if (*kind == "quadratic") {
      spec.kind = ProblemKind::Quadratic;
    } else if (*kind == "logistic") {
      spec.kind = ProblemKind::Logistic;
    } else {
      c.fail(path + "/kind", "must be 'quadratic' or 'logistic' (got '" + *kind + "')");
    }
  }
  if (auto mu = c.real(j, path, "mu")) {
    if (*mu < 0.0) c.fail(path + "/mu", "must be >= 0");
    spec.mu = *mu;
  }

  if (const json* src = c.field(j, path, "source")) {
    const std::string sp = path + "/source";
    if (c.object(*src, sp)) {
      c.known_keys(*src, sp, {"synthetic", "libsvm"});
      if (src->size() != 1) {
        c.fail(sp, "must contain exactly one of 'synthetic' or 'libsvm'");
      } else if (auto it = src->find("synthetic"); it != src->end()) {
        const std::string ssp = sp + "/synthetic";
        if (c.object(*it, ssp)) {
          c.known_keys(*it, ssp, {"p", "m", "seed"});
          SyntheticSource s;
          if (auto p = c.count(*it, ssp, "p")) {
            if (*p == 0) c.fail(ssp + "/p", "must be >= 1");
            s.p = *p;
          }
          if (auto m = c.count(*it, ssp, "m")) {
            if (*m == 0) c.fail(ssp + "/m", "must be >= 1");
            s.m = *m;
          }
          if (auto seed = c.count(*it, ssp, "seed")) s.seed = *seed;
          spec.source = s;
        }
      } else if (auto lt = src->find("libsvm"); lt != src->end()) {
        const std::string lp = sp + "/libsvm";
        if (c.object(*lt, lp)) {
          c.known_keys(*lt, lp,
                       {"path", "label_pos", "label_neg", "m_per_agent", "seed"});
          LibsvmSource s;
          if (auto file = c.text(*lt, lp, "path")) {
            if (file->empty()) c.fail(lp + "/path", "must not be empty");
            s.path = *file;
          }
          const bool need_labels = spec.kind == ProblemKind::Logistic;
          s.label_pos = c.real(*lt, lp, "label_pos", need_labels);
          s.label_neg = c.real(*lt, lp, "label_neg", need_labels);
          if (s.label_pos.has_value() != s.label_neg.has_value()) {
            c.fail(lp, "label_pos and label_neg must be given together");
          } else if (s.label_pos && *s.label_pos == *s.label_neg) {
            c.fail(lp, "label_pos and label_neg must differ");
          }
          if (auto m = c.count(*lt, lp, "m_per_agent")) {
            if (*m == 0) c.fail(lp + "/m_per_agent", "must be >= 1");
            s.m_per_agent = *m;
          }
          if (auto seed = c.count(*lt, lp, "seed")) s.seed = *seed;
          spec.source = s;
        }
      }
    }
  }
  if (c.errors.size() != before) return std::nullopt;
  return spec;
}

std::optional<NetworkSpec> parse_network(Checker& c, const json& j,
                                         const std::string& path) {
  if (!c.object(j, path)) return std::nullopt;
  c.known_keys(j, path, {"n", "avg_degree", "seed", "rule"});
  const std::size_t before = c.errors.size();
  NetworkSpec spec;
  if (auto n = c.count(j, path, "n")) {
    if (*n < 2) c.fail(path + "/n", "must be >= 2");
    spec.n = *n;
  }
  if (auto d = c.real(j, path, "avg_degree")) {
    if (!(*d > 0.0)) c.fail(path + "/avg_degree", "must be > 0");
    if (spec.n >= 2 && !(*d < static_cast<double>(spec.n))) {
      c.fail(path + "/avg_degree", "must be < n");
    }
    spec.avg_degree = *d;
  }
  if (auto seed = c.count(j, path, "seed")) spec.seed = *seed;
  if (auto rule = c.text(j, path, "rule")) {
    if (*rule != "metropolis") {
      c.fail(path + "/rule", "only 'metropolis' is supported (got '" + *rule + "')");
    }
    spec.rule = *rule;
  }
  if (c.errors.size() != before) return std::nullopt;
  return spec;
}

bool safe_label(const std::string& label) {
  if (label.empty() || label == "." || label == ".." || label == "summary") {
    return false;
  }
  return std::all_of(label.begin(), label.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
           ch == '-' || ch == '.' || ch == '=';
  });
}

std::optional<LabeledConfig> parse_algorithm(Checker& c, const json& j,
                                             const std::string& path) {
  if (!c.object(j, path)) return std::nullopt;
  c.known_keys(j, path, {"label", "kind", "E", "beta", "schedule"});
  const std::size_t before = c.errors.size();
  LabeledConfig lc;
  if (auto label = c.text(j, path, "label")) {
    if (!safe_label(*label)) {
      c.fail(path + "/label",
             "must be non-empty, not 'summary', and use only [A-Za-z0-9_.=-]");
    }
    lc.label = *label;
  }
  if (auto kind = c.text(j, path, "kind")) {
    if (auto k = parse_algorithm_kind(*kind)) {
      lc.config.kind = *k;
    } else {
      c.fail(path + "/kind", "unknown algorithm '" + *kind + "'");
    }
  }
  if (auto e = c.count(j, path, "E")) lc.config.local_updates = *e;
  if (auto beta = c.real(j, path, "beta")) lc.config.beta = *beta;
  if (const json* sched = c.field(j, path, "schedule")) {
    const std::string sp = path + "/schedule";
    if (c.object(*sched, sp)) {
      c.known_keys(*sched, sp, {"kind", "alpha0", "delta"});
      auto kind = c.text(*sched, sp, "kind");
      auto alpha0 = c.real(*sched, sp, "alpha0");
      if (kind && *kind == "constant") {
        if (sched->contains("delta")) {
          c.fail(sp + "/delta", "only valid for a diminishing schedule");
        }
        if (alpha0) lc.config.schedule = StepSchedule::constant(*alpha0);
      } else if (kind && *kind == "diminishing") {
        auto delta = c.real(*sched, sp, "delta");
        if (alpha0 && delta) {
          lc.config.schedule = StepSchedule::diminishing(*alpha0, *delta);
        }
      } else if (kind) {
        c.fail(sp + "/kind", "must be 'constant' or 'diminishing' (got '" + *kind + "')");
      }
    }
  }
  if (c.errors.size() == before) {
    for (const auto& e : lc.config.validate()) c.fail(path, e);
  }
  if (c.errors.size() != before) return std::nullopt;
  return lc;
}

std::optional<RunSpec> parse_run(Checker& c, const json& j,
                                 const std::string& path, bool figure) {
  if (!c.object(j, path)) return std::nullopt;
  if (figure) {
    c.known_keys(j, path, {"figure", "T", "target_error", "output_dir"});
  } else {
    c.known_keys(j, path, {"T", "target_error", "output_dir"});
  }
  const std::size_t before = c.errors.size();
  RunSpec spec;
  if (auto t = c.count(j, path, "T", !figure)) {
    if (*t == 0) c.fail(path + "/T", "must be >= 1");
    spec.iterations = *t;
  }
  if (auto target = c.real(j, path, "target_error", false)) {
    if (!(*target > 0.0)) c.fail(path + "/target_error", "must be > 0");
    spec.target_error = *target;
  }
  if (auto dir = c.text(j, path, "output_dir")) {
    if (dir->empty()) c.fail(path + "/output_dir", "must not be empty");
    spec.output_dir = *dir;
  }
  if (figure) spec.figure = c.text(j, path, "figure");
  if (c.errors.size() != before) return std::nullopt;
  return spec;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::Quadratic ? "quadratic" : "logistic";
}

ConfigResult parse_experiment_config(const nlohmann::json& doc) {
  Checker c;
  ConfigResult result;
  if (!c.object(doc, "")) {
    result.errors = std::move(c.errors);
    return result;
  }
  c.known_keys(doc, "", {"problem", "network", "algorithms", "run"});

  ExperimentConfig cfg;
  std::optional<ProblemSpec> problem;
  std::optional<NetworkSpec> network;
  std::optional<RunSpec> run;
  bool algorithms_ok = false;

  if (const json* j = c.field(doc, "", "problem")) problem = parse_problem(c, *j, "/problem");
  if (const json* j = c.field(doc, "", "network")) network = parse_network(c, *j, "/network");
  if (const json* j = c.field(doc, "", "run")) run = parse_run(c, *j, "/run", false);
  if (const json* j = c.field(doc, "", "algorithms")) {
    if (!j->is_array() || j->empty()) {
      c.fail("/algorithms", "expected a non-empty array");
    } else {
      algorithms_ok = true;
      std::set<std::string> labels;
      for (std::size_t k = 0; k < j->size(); ++k) {
        const std::string path = "/algorithms/" + std::to_string(k);
        const json& entry = (*j)[k];
        // Checked on the raw entry so duplicates are reported even when
        // other fields of the entry are invalid.
        if (entry.is_object() && entry.contains("label") && entry["label"].is_string()) {
          const auto label = entry["label"].get<std::string>();
          if (!labels.insert(label).second) {
            c.fail(path + "/label", "duplicate label '" + label + "'");
            algorithms_ok = false;
          }
        }
        auto lc = parse_algorithm(c, entry, path);
        if (!lc) {
          algorithms_ok = false;
          continue;
        }
        cfg.algorithms.push_back(std::move(*lc));
      }
    }
  }

  if (c.errors.empty() && problem && network && run && algorithms_ok) {
    cfg.problem = std::move(*problem);
    cfg.network = std::move(*network);
    cfg.run = std::move(*run);
    result.config = std::move(cfg);
  }
  result.errors = std::move(c.errors);
  return result;
}

FigureConfigResult parse_figure_config(const nlohmann::json& doc) {
  Checker c;
  FigureConfigResult result;
  if (!c.object(doc, "")) {
    result.errors = std::move(c.errors);
    return result;
  }
  c.known_keys(doc, "", {"problem", "network", "run"});
  FigureConfig cfg;
  std::optional<RunSpec> run;
  if (const json* j = c.field(doc, "", "run")) run = parse_run(c, *j, "/run", true);
  if (const json* j = c.field(doc, "", "problem", false)) {
    cfg.problem = parse_problem(c, *j, "/problem");
  }
  if (const json* j = c.field(doc, "", "network", false)) {
    cfg.network = parse_network(c, *j, "/network");
  }
  if (c.errors.empty() && run) {
    cfg.run = std::move(*run);
    result.config = std::move(cfg);
  }
  result.errors = std::move(c.errors);
  return result;
}

}  // namespace music::cli
