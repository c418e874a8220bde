#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "music/objectives.hpp"

namespace music {

/// One LIBSVM record. Feature indices are 0-based here (1-based on disk)
/// and kept in ascending order.
struct Sample {
  double label = 0.0;
  std::vector<std::pair<std::size_t, double>> features;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  /// Largest 1-based feature index seen.
  std::size_t dim = 0;
};

/// Parses `label idx:val idx:val ...`, one sample per non-empty line.
/// Out-of-order indices are accepted (and sorted); a repeated index is an
/// error. Throws ParseError carrying the line number.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_string(const std::string& text);
Dataset load_libsvm(const std::string& path);

/// Inverse of parse_libsvm; values rendered with 17 significant digits.
void write_libsvm(std::ostream& out, const Dataset& d);

/// Keeps samples labelled label_pos (-> +1) or label_neg (-> -1), in order.
Dataset binary_filter(const Dataset& d, double label_pos, double label_neg);

/// Seeded Fisher-Yates shuffle, then contiguous blocks of m_per_agent.
/// Returns, per agent, indices into d.samples.
std::vector<std::vector<std::size_t>> partition(const Dataset& d,
                                                std::size_t n_agents,
                                                std::size_t m_per_agent,
                                                std::uint64_t seed);

/// Zero-filled m x p matrix of the selected samples' features (row = sample).
Matrix densify(const Dataset& d, const std::vector<std::size_t>& rows,
               std::size_t p);

/// A_i (p x m) and b_i (m) with i.i.d. uniform[0, 1] entries.
QuadraticProblem synth_uniform(std::size_t p, std::size_t m,
                               std::size_t n_agents, double mu,
                               std::uint64_t seed);

/// Well-conditioned synthetic stand-in for a binary classification set:
/// standard normal features, a planted weight vector w ~ N(0, I/p), and
/// labels drawn with P(y = +1 | h) = sigmoid(h^T w).
LogisticProblem synth_logistic(std::size_t p, std::size_t m,
                               std::size_t n_agents, double mu,
                               std::uint64_t seed);

/// Each agent's samples become the columns of A_i, their labels b_i.
QuadraticProblem quadratic_from_dataset(
    const Dataset& d, const std::vector<std::vector<std::size_t>>& shards,
    std::size_t p, double mu);

/// Each agent's samples become the rows of its feature matrix; labels must
/// already be +-1 (see binary_filter).
LogisticProblem logistic_from_dataset(
    const Dataset& d, const std::vector<std::vector<std::size_t>>& shards,
    std::size_t p, double mu);

}  // namespace music
