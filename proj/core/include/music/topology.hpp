#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "music/types.hpp"

namespace music {

/// Undirected simple graph over agents 0..n-1.
///
/// Edges are stored as (i, j) with i < j, sorted lexicographically. The
/// constructor normalizes orientation and rejects self-loops, duplicates and
/// out-of-range indices.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph() = default;
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
  /// Neighbors of i in ascending order, excluding i itself.
  const std::vector<std::size_t>& neighbors(std::size_t i) const {
    return adjacency_.at(i);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Erdos-Renyi G(n, q) with q = avg_degree / (n - 1), resampled until
/// connected. Attempt k uses the sub-seed derived from (seed, k).
/// Throws std::invalid_argument for bad parameters and music::Error when no
/// connected sample appears within 1000 attempts.
Graph erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed);

inline constexpr int kMaxConnectAttempts = 1000;

bool is_connected(const Graph& g);

/// Text edge list: "n m" followed by m lines "i j", 0-based.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

/// Dense symmetric combination matrix.
///
/// Also keeps, per row, the ascending list of columns with nonzero weight so
/// that combine() is O(edges) and always sums in ascending agent order.
class MixingMatrix {
 public:
  MixingMatrix() = default;
  /// Takes the dense weights as given; validity is checked separately with
  /// validate_doubly_stochastic().
  explicit MixingMatrix(Matrix weights);

  static MixingMatrix identity(std::size_t n);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(w_.rows());
  }
  double operator()(std::size_t i, std::size_t j) const {
    return w_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& dense() const noexcept { return w_; }

  /// out.row(i) = sum_j w(i, j) * in.row(j), j ascending over the support.
  /// `out` must not alias `in`.
  void combine(const AgentMatrix& in, AgentMatrix& out) const;

  /// Largest singular value (the matrix is symmetric, so max |eigenvalue|).
  double spectral_norm() const;
  /// Spectral norm of (W - I).
  double spectral_norm_minus_identity() const;

 private:
  Matrix w_;
  std::vector<std::vector<std::size_t>> support_;
};

/// Metropolis rule: w_ij = 1 / (1 + max(deg i, deg j)) on edges, diagonal by
/// row-sum completion.
MixingMatrix metropolis_weights(const Graph& g);

/// (W + I) / 2.
MixingMatrix half_identity(const MixingMatrix& w);

struct Violation {
  enum class Kind { RowSum, ColumnSum, Negative, Asymmetric, NotSquare };
  Kind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  /// Offending quantity: the sum, the entry, or |w_ij - w_ji|.
  double value = 0.0;
};

std::string to_string(const Violation& v);

/// Empty iff every row/column sum is within tol of 1, every entry is
/// >= -tol and |w_ij - w_ji| <= tol.
std::vector<Violation> validate_doubly_stochastic(const Matrix& w, double tol);
inline std::vector<Violation> validate_doubly_stochastic(const MixingMatrix& w,
                                                         double tol) {
  return validate_doubly_stochastic(w.dense(), tol);
}

/// n rows of comma-separated weights, 17 significant digits.
void write_mixing_csv(std::ostream& out, const MixingMatrix& w);

}  // namespace music
