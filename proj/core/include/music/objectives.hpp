#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "music/types.hpp"

namespace music {

/// Strong-convexity and smoothness moduli of the per-agent objectives.
struct ConvexityBounds {
  double mu = 0.0;
  double L = 0.0;

  double condition_number() const { return L / mu; }
};

/// Finite-sum objective: agent i holds a private, differentiable f_i over R^p.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t agents() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double value(std::size_t agent, std::span<const double> x) const = 0;
  /// Writes grad f_agent(x) into `out` (length dim()).
  virtual void gradient(std::size_t agent, std::span<const double> x,
                        std::span<double> out) const = 0;
  virtual ConvexityBounds bounds() const = 0;

  Vector gradient(std::size_t agent, const Vector& x) const;
  double value(std::size_t agent, const Vector& x) const;

  /// (1/N) sum_i grad f_i(x).
  Vector average_gradient(const Vector& x) const;

 protected:
  void check_agent_and_dim(std::size_t agent, std::size_t len) const;
};

/// f_i(x) = 1/2 ||A_i^T x - b_i||^2 + (mu/2) ||x||^2 with A_i in R^{p x m}.
class QuadraticProblem final : public Objective {
 public:
  QuadraticProblem(std::vector<Matrix> a, std::vector<Vector> b, double mu);

  std::size_t agents() const override { return a_.size(); }
  std::size_t dim() const override { return p_; }
  std::size_t samples() const { return m_; }
  double mu() const { return mu_; }
  const Matrix& a(std::size_t agent) const { return a_.at(agent); }
  const Vector& b(std::size_t agent) const { return b_.at(agent); }

  using Objective::gradient;
  using Objective::value;
  double value(std::size_t agent, std::span<const double> x) const override;
  void gradient(std::size_t agent, std::span<const double> x,
                std::span<double> out) const override;

  /// mu + min_i lambda_min(A_i A_i^T), mu + max_i lambda_max(A_i A_i^T).
  ConvexityBounds bounds() const override;

  /// Solves (sum_i A_i A_i^T + N mu I) x = sum_i A_i b_i.
  /// Throws music::Error if the system is singular.
  Vector optimum() const;

 private:
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  double mu_;
  std::size_t p_ = 0;
  std::size_t m_ = 0;
};

/// f_i(x) = (1/m) sum_j ln(1 + exp(-y_ij h_ij^T x)) + (mu/2) ||x||^2.
///
/// Features for agent i are the rows of an m x p matrix; labels in {-1, +1}.
class LogisticProblem final : public Objective {
 public:
  LogisticProblem(std::vector<Matrix> features, std::vector<Vector> labels,
                  double mu);

  std::size_t agents() const override { return h_.size(); }
  std::size_t dim() const override { return p_; }
  double mu() const { return mu_; }
  const Matrix& features(std::size_t agent) const { return h_.at(agent); }
  const Vector& labels(std::size_t agent) const { return y_.at(agent); }

  using Objective::gradient;
  using Objective::value;
  double value(std::size_t agent, std::span<const double> x) const override;
  void gradient(std::size_t agent, std::span<const double> x,
                std::span<double> out) const override;

  /// mu_est = mu; L_est = mu + max_i lambda_max(sum_j h h^T) / (4m).
  ConvexityBounds bounds() const override;

 private:
  std::vector<Matrix> h_;
  std::vector<Vector> y_;
  double mu_;
  std::size_t p_ = 0;
};

/// ln(1 + exp(z)) without overflow.
double softplus(double z);
/// 1 / (1 + exp(-z)) without overflow.
double sigmoid(double z);

inline ConvexityBounds estimate_bounds(const Objective& f) { return f.bounds(); }

struct GdResult {
  Vector x;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

/// Plain gradient descent on (1/N) sum_i f_i from x = 0.
///
/// Stops early only once an iterate reproduces itself bit-for-bit (every
/// further step would be identical). Throws DivergenceError if the iterate
/// norm exceeds 1e12 or turns non-finite.
GdResult centralized_gd_optimum(const Objective& f, double alpha,
                                std::size_t iters);

}  // namespace music
