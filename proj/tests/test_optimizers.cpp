#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "music/dataio.hpp"
#include "music/error.hpp"
#include "music/optimizers.hpp"
#include "music/rng.hpp"

using namespace music;

namespace {

// f_i(x) = 1/2 (x - b_i)^2 on two agents, b = (1, -1): grad_i = x - b_i.
QuadraticProblem two_agent_scalar() {
  Matrix one(1, 1);
  one << 1.0;
  Vector b0(1), b1(1);
  b0 << 1.0;
  b1 << -1.0;
  return QuadraticProblem({one, one}, {b0, b1}, 0.0);
}

MixingMatrix complete_pair() {
  Matrix w(2, 2);
  w << 0.5, 0.5, 0.5, 0.5;
  return MixingMatrix(w);
}

AlgorithmConfig make(AlgorithmKind kind, std::size_t e, double beta,
                     double alpha) {
  AlgorithmConfig c;
  c.kind = kind;
  c.local_updates = e;
  c.beta = beta;
  c.schedule = StepSchedule::constant(alpha);
  return c;
}

// Plain-loop reference implementations over std::vector.
using Rows = std::vector<std::vector<double>>;

Rows to_rows(const AgentMatrix& m) {
  Rows r(static_cast<std::size_t>(m.rows()),
         std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = m(i, k);
    }
  }
  return r;
}

Rows mix(const Matrix& w, const Rows& in) {
  Rows out(in.size(), std::vector<double>(in[0].size(), 0.0));
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double wij = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t k = 0; k < in[0].size(); ++k) out[i][k] += wij * in[j][k];
    }
  }
  return out;
}

Rows grad_step(const Objective& f, const Rows& x, double alpha) {
  Rows v = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> g(x[i].size());
    f.gradient(i, std::span<const double>(x[i]), std::span<double>(g));
    for (std::size_t k = 0; k < g.size(); ++k) v[i][k] -= alpha * g[k];
  }
  return v;
}

Rows add(const Rows& a, const Rows& b, double sb = 1.0) {
  Rows r = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i].size(); ++k) r[i][k] += sb * b[i][k];
  }
  return r;
}

double max_diff(const AgentMatrix& m, const Rows& r) {
  double d = 0.0;
  const Rows mr = to_rows(m);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t k = 0; k < r[i].size(); ++k) {
      d = std::max(d, std::abs(mr[i][k] - r[i][k]));
    }
  }
  return d;
}

struct Fixture {
  QuadraticProblem f = synth_uniform(3, 4, 6, 1e-2, 21);
  MixingMatrix w = metropolis_weights(erdos_renyi(6, 2.5, 21));
  MixingMatrix wb = half_identity(w);
};

}  // namespace

TEST_CASE("algorithm names round-trip") {
  for (auto k : {AlgorithmKind::Dgd, AlgorithmKind::Atc,
                 AlgorithmKind::InexactMusic, AlgorithmKind::ExactDiffusion,
                 AlgorithmKind::ExactMusic, AlgorithmKind::EasgdLike}) {
    CHECK(parse_algorithm_kind(to_string(k)) == k);
  }
  CHECK(to_string(AlgorithmKind::InexactMusic) == "inexact_music");
  CHECK_FALSE(parse_algorithm_kind("music").has_value());
  CHECK(uses_half_identity(AlgorithmKind::ExactDiffusion));
  CHECK(uses_half_identity(AlgorithmKind::EasgdLike));
  CHECK_FALSE(uses_half_identity(AlgorithmKind::InexactMusic));
  CHECK(is_single_update(AlgorithmKind::Atc));
  CHECK_FALSE(is_single_update(AlgorithmKind::ExactMusic));
}

TEST_CASE("step schedules") {
  const auto c = StepSchedule::constant(0.1);
  CHECK(alpha_at(c, 0) == 0.1);
  CHECK(alpha_at(c, 999) == 0.1);
  const auto d = StepSchedule::diminishing(0.1, 0.5);
  CHECK(alpha_at(d, 0) == 0.1);
  CHECK(alpha_at(d, 3) == doctest::Approx(0.05));
  CHECK(alpha_at(d, 99) == doctest::Approx(0.01));
}

TEST_CASE("config validation") {
  CHECK(make(AlgorithmKind::ExactMusic, 3, 1.0, 0.1).validate().empty());
  CHECK_FALSE(make(AlgorithmKind::ExactMusic, 0, 1.0, 0.1).validate().empty());
  CHECK_FALSE(make(AlgorithmKind::Atc, 2, 1.0, 0.1).validate().empty());
  CHECK_FALSE(make(AlgorithmKind::ExactMusic, 2, 1.5, 0.1).validate().empty());
  CHECK_FALSE(make(AlgorithmKind::ExactMusic, 2, -0.1, 0.1).validate().empty());
  CHECK_FALSE(make(AlgorithmKind::Dgd, 1, 1.0, 0.0).validate().empty());
  auto dim = make(AlgorithmKind::InexactMusic, 2, 1.0, 0.1);
  dim.schedule = StepSchedule::diminishing(0.1, 2.0);
  CHECK_FALSE(dim.validate().empty());
  dim.schedule = StepSchedule::diminishing(0.1, 0.5);
  CHECK(dim.validate().empty());
}

TEST_CASE("hand-traced exact MUSIC, E=2, beta=1, alpha=1/2") {
  const auto f = two_agent_scalar();
  const auto wb = half_identity(complete_pair());
  const auto cfg = make(AlgorithmKind::ExactMusic, 2, 1.0, 0.5);
  auto s = NetworkState::zeros(2, 1);

  step_exact_music(s, f, wb, cfg);  // inner: v = 0.5 b, x = v + 0
  CHECK(s.x(0, 0) == 0.5);
  CHECK(s.x(1, 0) == -0.5);
  CHECK(s.comm_rounds == 0);

  step_exact_music(s, f, wb, cfg);  // combine: v = .75, x = Wbar v = .375
  CHECK(s.x(0, 0) == 0.375);
  CHECK(s.x(1, 0) == -0.375);
  CHECK(s.anchor(0, 0) == -0.375);
  CHECK(s.comm_rounds == 1);

  step_exact_music(s, f, wb, cfg);  // inner: v = .6875, x = v + anchor
  CHECK(s.v(0, 0) == 0.6875);
  CHECK(s.x(0, 0) == 0.3125);

  step_exact_music(s, f, wb, cfg);  // combine: v = .65625, y = .28125
  CHECK(s.v(0, 0) == 0.65625);
  CHECK(s.x(0, 0) == 0.140625);
  CHECK(s.x(1, 0) == -0.140625);
  CHECK(s.anchor(0, 0) == -0.515625);
  CHECK(s.t == 4);
  CHECK(s.grad_evals == 4);
  CHECK(s.comm_rounds == 2);
}

TEST_CASE("hand-traced EASGD-like variant drops the anchor on inner steps") {
  const auto f = two_agent_scalar();
  const auto wb = half_identity(complete_pair());
  const auto cfg = make(AlgorithmKind::EasgdLike, 2, 1.0, 0.5);
  auto s = NetworkState::zeros(2, 1);
  for (int i = 0; i < 3; ++i) step_easgd_like(s, f, wb, cfg);
  CHECK(s.x(0, 0) == 0.6875);
  step_easgd_like(s, f, wb, cfg);
  CHECK(s.v(0, 0) == 0.84375);
  CHECK(s.x(0, 0) == 0.234375);
  CHECK(s.anchor(0, 0) == -0.609375);
}

TEST_CASE("steps agree with plain-loop reference formulas") {
  Fixture fx;
  const double alpha = 0.05;
  const Matrix& W = fx.w.dense();
  const Matrix& Wb = fx.wb.dense();

  SUBCASE("dgd") {
    auto s = NetworkState::zeros(6, 3);
    Rows x = to_rows(s.x);
    for (int t = 0; t < 30; ++t) {
      step_dgd(s, fx.f, fx.w, StepSchedule::constant(alpha));
      const Rows g = grad_step(fx.f, x, alpha);  // x - alpha grad
      x = add(mix(W, x), add(g, x, -1.0));       // Wx - alpha grad
      REQUIRE(max_diff(s.x, x) < 1e-13);
    }
  }
  SUBCASE("atc") {
    auto s = NetworkState::zeros(6, 3);
    Rows x = to_rows(s.x);
    for (int t = 0; t < 30; ++t) {
      step_atc(s, fx.f, fx.w, StepSchedule::constant(alpha));
      x = mix(W, grad_step(fx.f, x, alpha));
      REQUIRE(max_diff(s.x, x) < 1e-13);
    }
  }
  SUBCASE("inexact music") {
    const auto cfg = make(AlgorithmKind::InexactMusic, 3, 1.0, alpha);
    auto s = NetworkState::zeros(6, 3);
    Rows x = to_rows(s.x);
    for (int t = 0; t < 30; ++t) {
      step_inexact_music(s, fx.f, fx.w, cfg);
      const Rows v = grad_step(fx.f, x, alpha);
      x = (t + 1) % 3 == 0 ? mix(W, v) : v;
      REQUIRE(max_diff(s.x, x) < 1e-13);
    }
  }
  SUBCASE("exact diffusion") {
    auto s = NetworkState::zeros(6, 3);
    Rows x = to_rows(s.x), v = x;
    for (int t = 0; t < 30; ++t) {
      step_exact_diffusion(s, fx.f, fx.wb, StepSchedule::constant(alpha));
      const Rows vn = grad_step(fx.f, x, alpha);
      x = mix(Wb, add(vn, add(x, v, -1.0)));
      v = vn;
      REQUIRE(max_diff(s.x, x) < 1e-13);
    }
  }
  SUBCASE("exact music with partial beta") {
    const std::size_t e = 3;
    const double beta = 0.6;
    const auto cfg = make(AlgorithmKind::ExactMusic, e, beta, alpha);
    auto s = NetworkState::zeros(6, 3);
    Rows x = to_rows(s.x);
    Rows anchor = x;
    for (std::size_t t = 0; t < 30; ++t) {
      step_exact_music(s, fx.f, fx.wb, cfg);
      const Rows vn = grad_step(fx.f, x, alpha);
      if ((t + 1) % e == 0) {
        x = mix(Wb, add(vn, anchor));
        anchor = add(x, vn, -1.0);
        for (auto& row : anchor) {
          for (double& a : row) a *= beta;
        }
      } else {
        x = add(vn, anchor);
      }
      REQUIRE(max_diff(s.x, x) < 1e-13);
    }
  }
}

TEST_CASE("reduction identities hold bit-for-bit") {
  Fixture fx;
  const double alpha = 0.05;
  SUBCASE("inexact E=1 is ATC") {
    auto a = NetworkState::zeros(6, 3), b = a;
    const auto cfg = make(AlgorithmKind::InexactMusic, 1, 1.0, alpha);
    for (int t = 0; t < 50; ++t) {
      step_inexact_music(a, fx.f, fx.w, cfg);
      step_atc(b, fx.f, fx.w, cfg.schedule);
      REQUIRE(a.x == b.x);
    }
  }
  SUBCASE("exact MUSIC E=1 beta=1 is exact diffusion") {
    auto a = NetworkState::zeros(6, 3), b = a;
    const auto cfg = make(AlgorithmKind::ExactMusic, 1, 1.0, alpha);
    for (int t = 0; t < 50; ++t) {
      step_exact_music(a, fx.f, fx.wb, cfg);
      step_exact_diffusion(b, fx.f, fx.wb, cfg.schedule);
      REQUIRE(a.x == b.x);
    }
  }
  SUBCASE("exact MUSIC beta=0 is inexact MUSIC on W-bar") {
    auto a = NetworkState::zeros(6, 3), b = a;
    const auto ex = make(AlgorithmKind::ExactMusic, 3, 0.0, alpha);
    const auto in = make(AlgorithmKind::InexactMusic, 3, 1.0, alpha);
    for (int t = 0; t < 50; ++t) {
      step_exact_music(a, fx.f, fx.wb, ex);
      step_inexact_music(b, fx.f, fx.wb, in);
      REQUIRE(a.x == b.x);
    }
  }
}

TEST_CASE("counters follow floor(T/E) and T") {
  Fixture fx;
  for (std::size_t e : {1u, 2u, 3u, 4u, 8u}) {
    for (auto kind : {AlgorithmKind::InexactMusic, AlgorithmKind::ExactMusic,
                      AlgorithmKind::EasgdLike}) {
      const auto cfg = make(kind, e, 1.0, 0.01);
      const MixingMatrix& m = uses_half_identity(kind) ? fx.wb : fx.w;
      auto s = NetworkState::zeros(6, 3);
      for (std::size_t t = 1; t <= 37; ++t) {
        step(s, fx.f, m, cfg);
        REQUIRE(s.t == t);
        REQUIRE(s.grad_evals == t);
        REQUIRE(s.comm_rounds == t / e);
      }
    }
  }
}

TEST_CASE("divergence guard reports the iteration") {
  const auto f = synth_uniform(3, 4, 4, 0.0, 2);
  const auto w = metropolis_weights(erdos_renyi(4, 2.0, 2));
  auto s = NetworkState::zeros(4, 3);
  const auto cfg = make(AlgorithmKind::Atc, 1, 1.0, 50.0);
  std::size_t at = 0;
  try {
    for (int t = 0; t < 1000; ++t) step(s, f, w, cfg);
  } catch (const DivergenceError& e) {
    at = e.iteration();
  }
  REQUIRE(at > 0);
  CHECK(at == s.t);
}

TEST_CASE("stability report matches the closed-form condition") {
  const ConvexityBounds cb{0.1, 2.0};
  const double alpha = 0.2;
  const double lambda = 0.1 * 2.0 / 2.1;
  const double nu = std::sqrt(1.0 - 2.0 * alpha * lambda);
  for (std::size_t e : {1u, 3u, 10u}) {
    for (double beta : {0.0, 0.05, 0.5}) {
      const double zmi = 0.4, z = 1.0;
      const auto r = stability_report(cb, alpha, e, beta, z, zmi);
      const double c = beta * nu / (1.0 - nu) * zmi;
      CHECK(r.lambda == doctest::Approx(lambda));
      CHECK(r.nu == doctest::Approx(nu));
      CHECK(r.lhs == doctest::Approx(std::pow(nu, static_cast<double>(e)) * (1.0 - c)));
      CHECK(r.rhs == doctest::Approx(1.0 - c - beta * z));
      CHECK(r.stable == (r.lhs <= r.rhs));
    }
  }
  // beta = 0 always satisfies nu^E <= 1.
  CHECK(stability_check(cb, alpha, 5, 0.0, 1.0, 0.5));
  // Full correction with ||Z|| = 1 leaves no room.
  CHECK_FALSE(stability_check(cb, alpha, 5, 1.0, 1.0, 0.5));
  CHECK_THROWS_AS(stability_report(cb, 0.3, 1, 1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(stability_report(cb, 0.0, 1, 1.0, 1.0, 0.5), std::invalid_argument);
}

namespace {

// f_i = 1/2 (x - b_i)^2 with b = (1, 3).
QuadraticProblem two_agent_b13() {
  Matrix one(1, 1);
  one << 1.0;
  Vector b0(1), b1(1);
  b0 << 1.0;
  b1 << 3.0;
  return QuadraticProblem({one, one}, {b0, b1}, 0.0);
}

NetworkState start_0_2() {
  auto s = NetworkState::zeros(2, 1);
  s.x << 0.0, 2.0;
  s.v = s.x;
  return s;
}

}  // namespace

TEST_CASE("DGD, ATC and inexact MUSIC on the two-agent instance") {
  const auto f = two_agent_b13();
  const auto w = complete_pair();
  {
    auto s = start_0_2();
    step_dgd(s, f, w, StepSchedule::constant(1.0));
    CHECK(s.x(0, 0) == 2.0);
    CHECK(s.x(1, 0) == 2.0);
    CHECK(s.comm_rounds == 1);
  }
  {
    auto s = start_0_2();
    step_atc(s, f, w, StepSchedule::constant(1.0));
    CHECK(s.v(0, 0) == 1.0);
    CHECK(s.v(1, 0) == 3.0);
    CHECK(s.x(0, 0) == 2.0);
    CHECK(s.x(1, 0) == 2.0);
  }
  {
    auto s = start_0_2();
    const auto cfg = make(AlgorithmKind::InexactMusic, 2, 1.0, 1.0);
    step_inexact_music(s, f, w, cfg);
    CHECK(s.x(0, 0) == 1.0);
    CHECK(s.x(1, 0) == 3.0);
    CHECK(s.comm_rounds == 0);
    step_inexact_music(s, f, w, cfg);
    CHECK(s.v(0, 0) == 1.0);
    CHECK(s.x(0, 0) == 2.0);
    CHECK(s.x(1, 0) == 2.0);
    CHECK(s.comm_rounds == 1);
  }
}

TEST_CASE("single agent DGD is plain gradient descent") {
  Matrix a(1, 1);
  a << 2.0;
  Vector b(1);
  b << 1.0;
  const QuadraticProblem f({a}, {b}, 0.0);
  auto s = NetworkState::zeros(1, 1);
  double x = 0.0;
  for (int t = 0; t < 20; ++t) {
    step_dgd(s, f, MixingMatrix::identity(1), StepSchedule::constant(0.1));
    x -= 0.1 * 2.0 * (2.0 * x - 1.0);
    REQUIRE(s.x(0, 0) == doctest::Approx(x).epsilon(1e-15));
  }
}

TEST_CASE("zero gradient: identity mixing is a fixed point, ATC applies W") {
  std::vector<Matrix> a(3, Matrix::Zero(2, 1));
  std::vector<Vector> b(3, Vector::Zero(1));
  const QuadraticProblem zero(a, b, 0.0);
  auto s = NetworkState::zeros(3, 2);
  s.x << 1, 2, 3, 4, 5, 6;
  const AgentMatrix x0 = s.x;
  step_dgd(s, zero, MixingMatrix::identity(3), StepSchedule::constant(0.3));
  CHECK(s.x == x0);

  const MixingMatrix w = metropolis_weights(Graph(3, {{0, 1}, {1, 2}}));
  step_atc(s, zero, w, StepSchedule::constant(0.3));
  CHECK((Matrix(s.x) - w.dense() * Matrix(x0)).cwiseAbs().maxCoeff() < 1e-15);

  // Exact diffusion from a consensus start with v = x stays put.
  auto c = NetworkState::zeros(3, 2);
  c.x.rowwise() = Eigen::RowVector2d(0.5, -1.5);
  c.v = c.x;
  const AgentMatrix c0 = c.x;
  step_exact_diffusion(c, zero, half_identity(w), StepSchedule::constant(0.3));
  CHECK(c.x == c0);
}

TEST_CASE("exact diffusion matches its global two-step recursion") {
  // x^1 = Wbar (x^0 - a g(x^0));
  // x^{t+1} = Wbar (2 x^t - x^{t-1} - a (g(x^t) - g(x^{t-1}))).
  const auto f = two_agent_b13();
  const Matrix wb = half_identity(complete_pair()).dense();
  const double alpha = 0.5;
  auto s = start_0_2();
  Eigen::Vector2d prev(0.0, 2.0);
  const Eigen::Vector2d b(1.0, 3.0);
  auto g = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d { return x - b; };
  Eigen::Vector2d cur = wb * (prev - alpha * g(prev));
  step_exact_diffusion(s, f, half_identity(complete_pair()), StepSchedule::constant(alpha));
  CHECK(s.x(0, 0) == doctest::Approx(cur(0)));
  CHECK(s.x(1, 0) == doctest::Approx(cur(1)));
  for (int t = 0; t < 5; ++t) {
    const Eigen::Vector2d next =
        wb * (2.0 * cur - prev - alpha * (g(cur) - g(prev)));
    prev = cur;
    cur = next;
    step_exact_diffusion(s, f, half_identity(complete_pair()), StepSchedule::constant(alpha));
    REQUIRE(s.x(0, 0) == doctest::Approx(cur(0)).epsilon(1e-14));
    REQUIRE(s.x(1, 0) == doctest::Approx(cur(1)).epsilon(1e-14));
  }
}

TEST_CASE("stability check worked example") {
  // mu = L = 1, alpha = 0.25: lambda = 1/2, nu = sqrt(1 - 2 * 0.25 * 0.5).
  const ConvexityBounds cb{1.0, 1.0};
  const auto r = stability_report(cb, 0.25, 1, 0.1, 1.0, 0.5);
  const double nu = std::sqrt(0.75);
  const double c = 0.1 * nu / (1.0 - nu) * 0.5;
  CHECK(r.nu == doctest::Approx(nu));
  CHECK(r.lhs == doctest::Approx(nu * (1.0 - c)));
  CHECK(r.rhs == doctest::Approx(1.0 - c - 0.1));
  CHECK(r.stable == (nu * (1.0 - c) <= 1.0 - c - 0.1));
  // beta -> 1 with ||Wbar - I|| near 2 drives the right side negative.
  const auto big = stability_report(cb, 0.25, 1, 1.0, 1.0, 1.9);
  CHECK(big.rhs < 0.0);
  CHECK_FALSE(big.stable);
}
