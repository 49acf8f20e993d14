#include "doctest.h"
#include "sweep/bench.hpp"

#include <cmath>
#include <random>

using namespace sweep;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec ones2(double s) { return v2(s, s); }

// Partial derivatives of the edge-shift closed form, written out by hand.
Vec ex3_gradient(double b0, double bs) {
  const double N = -2 * b0 * b0 * b0 + 8 * b0 * b0 * bs * bs + 8 * b0 * b0 * bs + 6 * b0 * b0 -
                   10 * b0 * bs * bs - 16 * b0 * bs - 12 * b0 + 3 * bs * bs + 6 * bs + 10;
  const double D = 8 * (1 - b0) * (1 - b0);
  const double dN0 = -6 * b0 * b0 + 16 * b0 * bs * bs + 16 * b0 * bs + 12 * b0 - 10 * bs * bs -
                     16 * bs - 12;
  const double dNs = 16 * b0 * b0 * bs + 8 * b0 * b0 - 20 * b0 * bs - 16 * b0 + 6 * bs + 6;
  const double dD0 = -16 * (1 - b0);
  return v2((dN0 * D - N * dD0) / (D * D), dNs / D);
}

}  // namespace

TEST_CASE("grid search on a convex quadratic") {
  auto f = [](const Vec& p) { return std::pow(p[0] - 0.3, 2) + std::pow(p[1] + 0.4, 2); };
  GridResult g = grid_refine(f, ones2(-1), ones2(1), 4, 11);
  CHECK(std::abs(g.argmin[0] - 0.3) <= 1e-3);
  CHECK(std::abs(g.argmin[1] + 0.4) <= 1e-3);
  CHECK(g.evaluations > 0);
}

TEST_CASE("grid search breaks ties toward the smallest parameter") {
  GridResult g = grid_refine([](const Vec&) { return 1.0; }, ones2(-1), ones2(1), 3, 5);
  CHECK(g.argmin == ones2(-1));
}

TEST_CASE("grid search rejects unsupported settings") {
  auto f = [](const Vec&) { return 0.0; };
  CHECK_THROWS_AS(grid_refine(f, Vec::Zero(5), Vec::Ones(5), 2, 3), Error);
  CHECK_THROWS_AS(grid_refine(f, ones2(0), ones2(1), 0, 3), Error);
}

TEST_CASE("grid search on the edge-shift closed form") {
  auto f = [](const Vec& p) { return analytic_cost_ex3(p[0], p[1]); };
  GridResult g = grid_refine(f, ones2(-1), ones2(1), 4, 11);
  CHECK(std::abs(g.argmin[0] + 0.877931) <= 1e-3);
  CHECK(std::abs(g.argmin[1] + 0.730354) <= 1e-3);
  CHECK(g.min == doctest::Approx(0.600458).epsilon(1e-5));
}

TEST_CASE("grid search then polish on the constant-control closed form") {
  // The optimum sits on the kink where the hitting time reaches T, so the
  // nested lattice alone only gets near it; the polish finishes the job.
  auto f = [](const Vec& p) { return analytic_cost_ex1(p[0], p[1], p[0], p[1]); };
  GridResult g = grid_refine(f, ones2(-1), ones2(1), 4, 11);
  CHECK((g.argmin - v2(-5.0 / 6.0, -1.0 / 3.0)).cwiseAbs().maxCoeff() <= 0.1);
  CHECK(std::abs(g.min - 43.0 / 24.0) <= 5e-3);
  DescentResult r = simplex_polish(f, g.argmin, ones2(-1), ones2(1), 1e-2);
  CHECK(std::abs(r.p[0] + 5.0 / 6.0) <= 1e-4);
  CHECK(std::abs(r.p[1] + 1.0 / 3.0) <= 1e-4);
  CHECK(r.f == doctest::Approx(43.0 / 24.0).epsilon(1e-8));
}

TEST_CASE("finite-difference gradient matches the hand gradient") {
  auto f = [](const Vec& p) { return analytic_cost_ex3(p[0], p[1]); };
  for (const Vec& p : {v2(-0.5, -0.5), v2(-0.877931, -0.730354), v2(-0.2, -0.9)}) {
    Vec g = fd_gradient(f, p, ones2(-1), ones2(0), 1e-5);
    Vec ref = ex3_gradient(p[0], p[1]);
    // central differences: truncation O(h^2) plus roundoff O(eps / h)
    CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-8);
  }
  Vec edge = fd_gradient(f, v2(0.0, -0.5), ones2(-1), ones2(0), 1e-6);
  CHECK(std::abs(edge[0] - ex3_gradient(0.0, -0.5)[0]) <= 1e-4);
}

TEST_CASE("projected descent stops on the box face") {
  auto f = [](const Vec& p) { return (p[0] - 2.0) * (p[0] - 2.0); };
  DescentResult r = projected_descent(f, Vec::Zero(1), -Vec::Ones(1), Vec::Ones(1), SolveOptions{});
  CHECK(r.p[0] == doctest::Approx(1.0));
  CHECK(r.converged);
  for (size_t k = 1; k < r.costs.size(); ++k) CHECK(r.costs[k] <= r.costs[k - 1]);
}

TEST_CASE("simplex polish handles a kink") {
  auto f = [](const Vec& p) { return std::abs(p[0] - 0.3) + std::abs(p[1] + 0.2); };
  DescentResult r = simplex_polish(f, v2(0.9, 0.9), ones2(-1), ones2(1), 0.1);
  CHECK(std::abs(r.p[0] - 0.3) <= 1e-6);
  CHECK(std::abs(r.p[1] + 0.2) <= 1e-6);
}

TEST_CASE("decoded controls always satisfy the control invariants") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (const std::string name : {"ex1", "ex2", "ex3"}) {
    CAPTURE(name);
    ExampleSpec ex = make_example(name);
    Parameterization pz = make_parameterization(ex.problem, ex.family);
    Mesh mesh = Mesh::uniform(1.0, 120);
    for (int trial = 0; trial < 20; ++trial) {
      Vec p = pz.clamp(v2(U(rng), U(rng)));
      Decoded d = pz.decode(mesh, p);
      CHECK_NOTHROW(validate_controls(ex.problem, d.path));
    }
  }
  SweepingProblem P = make_example("ex1").problem;
  Parameterization seg = piecewise_constant_u(P, 3);
  CHECK(seg.dim() == 6);
  CHECK_NOTHROW(validate_controls(P, seg.decode(Mesh::uniform(1.0, 7), seg.clamp(Vec::Constant(6, 5.0))).path));
}

TEST_CASE("solve keeps a monotone incumbent and is deterministic") {
  ExampleSpec ex = make_example("ex3");
  Parameterization pz = make_parameterization(ex.problem, ex.family);
  Mesh mesh = Mesh::uniform(1.0, 200);
  SolveOptions o;
  o.levels = 2;
  o.points_per_axis = 5;
  o.max_iter = 50;
  SolveResult a = solve(ex.problem, pz, mesh, o);
  SolveResult b = solve(ex.problem, pz, mesh, o);
  REQUIRE(!a.cost_trail.empty());
  for (size_t k = 1; k < a.cost_trail.size(); ++k) CHECK(a.cost_trail[k] <= a.cost_trail[k - 1]);
  CHECK(a.cost <= a.cost_trail.front());
  REQUIRE(a.param_trail.size() == b.param_trail.size());
  for (size_t k = 0; k < a.param_trail.size(); ++k) CHECK(a.param_trail[k] == b.param_trail[k]);
  CHECK(a.params == b.params);
  CHECK(a.cost == b.cost);
  CHECK(std::abs(a.cost - cost(ex.problem, a.controls, a.traj)) <= 1e-12);
}

TEST_CASE("multi-start without a grid") {
  ExampleSpec ex = make_example("ex1");
  Parameterization pz = make_parameterization(ex.problem, ex.family);
  SolveOptions o;
  o.levels = 0;
  SolveResult s = solve(ex.problem, pz, Mesh::uniform(1.0, 100), o);
  CHECK(std::abs(s.cost - 43.0 / 24.0) <= 1e-3);
}
