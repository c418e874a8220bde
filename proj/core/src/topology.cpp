#include "music/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "music/error.hpp"
#include "music/format.hpp"
#include "music/rng.hpp"

namespace music {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), adjacency_(n) {
  for (auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw std::invalid_argument("edge (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw std::invalid_argument("self-loop on vertex " + std::to_string(a));
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end());
      dup != edges.end()) {
    throw std::invalid_argument("duplicate edge (" +
                                std::to_string(dup->first) + ", " +
                                std::to_string(dup->second) + ")");
  }
  edges_ = std::move(edges);
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

Graph erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("erdos_renyi: n must be >= 2");
  if (!(avg_degree > 0.0) || !(avg_degree < static_cast<double>(n))) {
    throw std::invalid_argument("erdos_renyi: need 0 < avg_degree < n");
  }
  const double q = std::min(1.0, avg_degree / static_cast<double>(n - 1));
  for (int attempt = 0; attempt < kMaxConnectAttempts; ++attempt) {
    Xoshiro256 rng(Xoshiro256::derive(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<Graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.uniform() < q) edges.emplace_back(i, j);
      }
    }
    Graph g(n, std::move(edges));
    if (is_connected(g)) return g;
  }
  throw Error("erdos_renyi: no connected sample in " +
              std::to_string(kMaxConnectAttempts) +
              " attempts; avg_degree is too low for n=" + std::to_string(n));
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.size();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.size() << ' ' << g.edges().size() << '\n';
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(1, "missing header \"n m\"");
  std::size_t n = 0, m = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m)) throw ParseError(line_no, "expected \"n m\"");
  }
  std::vector<Graph::Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!next_line()) throw ParseError(line_no + 1, "missing edge line");
    std::istringstream es(line);
    std::size_t a = 0, b = 0;
    std::string extra;
    if (!(es >> a >> b) || (es >> extra)) {
      throw ParseError(line_no, "expected \"i j\"");
    }
    edges.emplace_back(a, b);
  }
  try {
    return Graph(n, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

MixingMatrix::MixingMatrix(Matrix weights) : w_(std::move(weights)) {
  if (w_.rows() != w_.cols()) {
    throw DimensionError("mixing matrix must be square");
  }
  support_.resize(size());
  for (Eigen::Index i = 0; i < w_.rows(); ++i) {
    for (Eigen::Index j = 0; j < w_.cols(); ++j) {
      if (w_(i, j) != 0.0) {
        support_[static_cast<std::size_t>(i)].push_back(
            static_cast<std::size_t>(j));
      }
    }
  }
}

MixingMatrix MixingMatrix::identity(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return MixingMatrix(Matrix::Identity(dim, dim));
}

void MixingMatrix::combine(const AgentMatrix& in, AgentMatrix& out) const {
  if (static_cast<std::size_t>(in.rows()) != size()) {
    throw DimensionError("combine: state has " + std::to_string(in.rows()) +
                         " agents, matrix has " + std::to_string(size()));
  }
  out.resize(in.rows(), in.cols());
  for (std::size_t i = 0; i < support_.size(); ++i) {
    auto row = out.row(static_cast<Eigen::Index>(i));
    row.setZero();
    for (std::size_t j : support_[i]) {
      row += (*this)(i, j) * in.row(static_cast<Eigen::Index>(j));
    }
  }
}

double MixingMatrix::spectral_norm() const {
  if (size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(w_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double MixingMatrix::spectral_norm_minus_identity() const {
  if (size() == 0) return 0.0;
  const Matrix shifted = w_ - Matrix::Identity(w_.rows(), w_.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MixingMatrix metropolis_weights(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [a, b] : g.edges()) {
    const double weight =
        1.0 / (1.0 + static_cast<double>(std::max(g.degree(a), g.degree(b))));
    w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = weight;
    w(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = weight;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : g.neighbors(static_cast<std::size_t>(i))) {
      off += w(i, static_cast<Eigen::Index>(j));
    }
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix(std::move(w));
}

MixingMatrix half_identity(const MixingMatrix& w) {
  Matrix half = w.dense();
  half.diagonal().array() += 1.0;
  half *= 0.5;
  return MixingMatrix(std::move(half));
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  switch (v.kind) {
    case Violation::Kind::RowSum:
      os << "row " << v.i << " sums to " << format_double(v.value);
      break;
    case Violation::Kind::ColumnSum:
      os << "column " << v.j << " sums to " << format_double(v.value);
      break;
    case Violation::Kind::Negative:
      os << "entry (" << v.i << ", " << v.j
         << ") is negative: " << format_double(v.value);
      break;
    case Violation::Kind::Asymmetric:
      os << "entries (" << v.i << ", " << v.j << ") and (" << v.j << ", "
         << v.i << ") differ by " << format_double(v.value);
      break;
    case Violation::Kind::NotSquare:
      os << "matrix is not square";
      break;
  }
  return os.str();
}

std::vector<Violation> validate_doubly_stochastic(const Matrix& w, double tol) {
  std::vector<Violation> out;
  if (w.rows() != w.cols()) {
    out.push_back({Violation::Kind::NotSquare, 0, 0, 0.0});
    return out;
  }
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) row += w(i, j);
    if (!(std::abs(row - 1.0) <= tol)) {
      out.push_back({Violation::Kind::RowSum, static_cast<std::size_t>(i), 0, row});
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += w(i, j);
    if (!(std::abs(col - 1.0) <= tol)) {
      out.push_back({Violation::Kind::ColumnSum, 0, static_cast<std::size_t>(j), col});
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(w(i, j) >= -tol)) {
        out.push_back({Violation::Kind::Negative, static_cast<std::size_t>(i),
                       static_cast<std::size_t>(j), w(i, j)});
      }
      if (j > i) {
        const double gap = std::abs(w(i, j) - w(j, i));
        if (!(gap <= tol)) {
          out.push_back({Violation::Kind::Asymmetric,
                         static_cast<std::size_t>(i),
                         static_cast<std::size_t>(j), gap});
        }
      }
    }
  }
  return out;
}

void write_mixing_csv(std::ostream& out, const MixingMatrix& w) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_double(w(i, j));
    }
    out << '\n';
  }
}

}  // namespace music
