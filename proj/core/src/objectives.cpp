#include "music/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "music/error.hpp"

namespace music {

namespace {

using ConstMap = Eigen::Map<const Vector>;
using MutMap = Eigen::Map<Vector>;

ConstMap as_vector(std::span<const double> x) {
  return ConstMap(x.data(), static_cast<Eigen::Index>(x.size()));
}

double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Vector Objective::gradient(std::size_t agent, const Vector& x) const {
  Vector out(x.size());
  gradient(agent, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double Objective::value(std::size_t agent, const Vector& x) const {
  return value(agent,
               std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Vector Objective::average_gradient(const Vector& x) const {
  Vector sum = Vector::Zero(x.size());
  Vector g(x.size());
  for (std::size_t i = 0; i < agents(); ++i) {
    gradient(i, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
             std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
    sum += g;
  }
  return sum / static_cast<double>(agents());
}

void Objective::check_agent_and_dim(std::size_t agent, std::size_t len) const {
  if (agent >= agents()) {
    throw DimensionError("agent index " + std::to_string(agent) +
                         " out of range (N=" + std::to_string(agents()) + ")");
  }
  if (len != dim()) {
    throw DimensionError("vector of length " + std::to_string(len) +
                         ", expected p=" + std::to_string(dim()));
  }
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(std::vector<Matrix> a, std::vector<Vector> b,
                                   double mu)
    : a_(std::move(a)), b_(std::move(b)), mu_(mu) {
  if (a_.empty()) throw DimensionError("quadratic problem needs >= 1 agent");
  if (a_.size() != b_.size()) {
    throw DimensionError("A and b have different agent counts");
  }
  if (!(mu_ >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  p_ = static_cast<std::size_t>(a_.front().rows());
  m_ = static_cast<std::size_t>(a_.front().cols());
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (static_cast<std::size_t>(a_[i].rows()) != p_ ||
        static_cast<std::size_t>(a_[i].cols()) != m_) {
      throw DimensionError("A_" + std::to_string(i) + " is not " +
                           std::to_string(p_) + "x" + std::to_string(m_));
    }
    if (static_cast<std::size_t>(b_[i].size()) != m_) {
      throw DimensionError("b_" + std::to_string(i) + " has wrong length");
    }
  }
}

double QuadraticProblem::value(std::size_t agent,
                               std::span<const double> x) const {
  check_agent_and_dim(agent, x.size());
  const auto xv = as_vector(x);
  const Vector r = a_[agent].transpose() * xv - b_[agent];
  return 0.5 * r.squaredNorm() + 0.5 * mu_ * xv.squaredNorm();
}

void QuadraticProblem::gradient(std::size_t agent, std::span<const double> x,
                                std::span<double> out) const {
  check_agent_and_dim(agent, x.size());
  if (out.size() != p_) throw DimensionError("gradient output has wrong length");
  const auto xv = as_vector(x);
  const Matrix& a = a_[agent];
  const Vector r = a.transpose() * xv - b_[agent];
  MutMap g(out.data(), static_cast<Eigen::Index>(out.size()));
  g.noalias() = a * r;
  g += mu_ * xv;
}

ConvexityBounds QuadraticProblem::bounds() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& a : a_) {
    const Matrix gram = a * a.transpose();
    lo = std::min(lo, std::max(0.0, min_eigenvalue(gram)));
    hi = std::max(hi, max_eigenvalue(gram));
  }
  return {mu_ + lo, mu_ + hi};
}

Vector QuadraticProblem::optimum() const {
  const auto p = static_cast<Eigen::Index>(p_);
  Matrix normal = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (std::size_t i = 0; i < a_.size(); ++i) {
    normal.noalias() += a_[i] * a_[i].transpose();
    rhs.noalias() += a_[i] * b_[i];
  }
  normal.diagonal().array() += static_cast<double>(a_.size()) * mu_;
  Eigen::FullPivLU<Matrix> lu(normal);
  if (!lu.isInvertible()) {
    throw Error("quad_optimum: normal equations are singular (rank " +
                std::to_string(lu.rank()) + " < " + std::to_string(p_) + ")");
  }
  return lu.solve(rhs);
}

// ---------------------------------------------------------------------------
// Logistic

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticProblem::LogisticProblem(std::vector<Matrix> features,
                                 std::vector<Vector> labels, double mu)
    : h_(std::move(features)), y_(std::move(labels)), mu_(mu) {
  if (h_.empty()) throw DimensionError("logistic problem needs >= 1 agent");
  if (h_.size() != y_.size()) {
    throw DimensionError("features and labels have different agent counts");
  }
  if (!(mu_ >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  p_ = static_cast<std::size_t>(h_.front().cols());
  for (std::size_t i = 0; i < h_.size(); ++i) {
    if (static_cast<std::size_t>(h_[i].cols()) != p_) {
      throw DimensionError("agent " + std::to_string(i) +
                           " has non-uniform feature dimension");
    }
    if (h_[i].rows() == 0 || y_[i].size() != h_[i].rows()) {
      throw DimensionError("agent " + std::to_string(i) +
                           " has mismatched sample/label counts");
    }
    for (Eigen::Index j = 0; j < y_[i].size(); ++j) {
      if (y_[i][j] != 1.0 && y_[i][j] != -1.0) {
        throw std::invalid_argument("labels must be -1 or +1");
      }
    }
  }
}

double LogisticProblem::value(std::size_t agent,
                              std::span<const double> x) const {
  check_agent_and_dim(agent, x.size());
  const auto xv = as_vector(x);
  const Matrix& h = h_[agent];
  const Vector& y = y_[agent];
  const Vector margins = h * xv;
  double loss = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    loss += softplus(-y[j] * margins[j]);
  }
  return loss / static_cast<double>(h.rows()) + 0.5 * mu_ * xv.squaredNorm();
}

void LogisticProblem::gradient(std::size_t agent, std::span<const double> x,
                               std::span<double> out) const {
  check_agent_and_dim(agent, x.size());
  if (out.size() != p_) throw DimensionError("gradient output has wrong length");
  const auto xv = as_vector(x);
  const Matrix& h = h_[agent];
  const Vector& y = y_[agent];
  Vector coef = h * xv;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    coef[j] = -y[j] * sigmoid(-y[j] * coef[j]);
  }
  MutMap g(out.data(), static_cast<Eigen::Index>(out.size()));
  g.noalias() = h.transpose() * coef;
  g /= static_cast<double>(h.rows());
  g += mu_ * xv;
}

ConvexityBounds LogisticProblem::bounds() const {
  double hi = 0.0;
  for (const auto& h : h_) {
    const Matrix scatter = h.transpose() * h;
    hi = std::max(hi, max_eigenvalue(scatter) / (4.0 * static_cast<double>(h.rows())));
  }
  return {mu_, mu_ + hi};
}

// ---------------------------------------------------------------------------

GdResult centralized_gd_optimum(const Objective& f, double alpha,
                                std::size_t iters) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (iters == 0) throw std::invalid_argument("iters must be >= 1");
  GdResult res;
  res.x = Vector::Zero(static_cast<Eigen::Index>(f.dim()));
  Vector g = f.average_gradient(res.x);
  for (std::size_t k = 0; k < iters; ++k) {
    Vector next = res.x - alpha * g;
    res.iterations = k + 1;
    if (!next.allFinite() || next.norm() > 1e12) throw DivergenceError(k + 1);
    if (next == res.x) break;
    res.x = std::move(next);
    g = f.average_gradient(res.x);
  }
  res.gradient_norm = g.norm();
  return res;
}

}  // namespace music
