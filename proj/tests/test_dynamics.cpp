#include "doctest.h"
#include "sweep/bench.hpp"

#include <cmath>

using namespace sweep;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// One fixed facet, no drift, start well inside.
SweepingProblem static_problem() {
  json j = {{"name", "static"},
            {"x0", {0.2, -0.3}},
            {"facets", {{{"a", {0.0, 1.0}}, {"b", 1.0}}}},
            {"U", {{"type", "box"}, {"lo", {-1.0}}, {"hi", {1.0}}}},
            {"g", {{"type", "constant"}, {"c", {0.0, 0.0}}}}};
  return problem_from_json(j);
}

SweepTrajectory run_ex1(double u1, double u2, int nu) {
  SweepingProblem P = make_example("ex1").problem;
  ControlPath c = constant_controls(P, Mesh::uniform(1.0, nu), v2(u1, u2));
  return catch_up(P, c);
}

double cost_ex1(double u1, double u2, int nu) {
  SweepingProblem P = make_example("ex1").problem;
  ControlPath c = constant_controls(P, Mesh::uniform(1.0, nu), v2(u1, u2));
  return cost(P, c, catch_up(P, c));
}

Decoded decode_example(const std::string& name, const Vec& p, int nu) {
  ExampleSpec ex = make_example(name);
  return make_parameterization(ex.problem, ex.family).decode(Mesh::uniform(1.0, nu), p);
}

void check_trajectory_invariants(const SweepingProblem& P, const ControlPath& c,
                                 const SweepTrajectory& tr) {
  const Tolerances& tol = P.tol;
  for (int j = 0; j <= c.mesh.nu(); ++j) CHECK(tr.slack[j].maxCoeff() <= tol.feas);
  for (int j = 0; j < c.mesh.nu(); ++j) {
    CHECK(tr.eta[j].minCoeff() >= 0.0);
    for (int i = 0; i < P.m; ++i)
      if (tr.eta[j][i] > tol.comp) CHECK(tr.slack[j + 1][i] >= -tol.active);
    Vec w = -tr.velocity(j) + P.g(tr.x[j], c.u[j]);
    CHECK((w - c.a[j + 1].transpose() * tr.eta[j]).norm() <= tol.cone);
  }
}

}  // namespace

TEST_CASE("uniform mesh construction") {
  Mesh m = Mesh::uniform(2.0, 4);
  CHECK(m.nu() == 4);
  CHECK(m.h(1) == doctest::Approx(0.5));
  CHECK(m.t.back() == 2.0);
  CHECK_THROWS_AS(Mesh::uniform(1.0, 0), Error);
  Mesh bad;
  bad.t = {0.0, 0.5, 0.5, 1.0};
  bad.T = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("static interior start stays put with zero multipliers") {
  SweepingProblem P = static_problem();
  ControlPath c = constant_controls(P, Mesh::uniform(1.0, 50), Vec::Zero(1));
  SweepTrajectory tr = catch_up(P, c);
  for (const Vec& x : tr.x) CHECK(x == P.x0);
  for (const Vec& e : tr.eta) CHECK(e.isZero());
  CHECK(tr.hits.empty());
  CHECK_FALSE(hitting_time(tr, 0).has_value());
}

TEST_CASE("zero costs give zero") {
  SweepingProblem P = static_problem();
  ControlPath c = constant_controls(P, Mesh::uniform(1.0, 10), Vec::Zero(1));
  CHECK(cost(P, c, catch_up(P, c)) == 0.0);
}

TEST_CASE("controls in the dynamics at the optimal constant control") {
  SweepTrajectory tr = run_ex1(-5.0 / 6.0, -1.0 / 3.0, 2000);
  const Vec& xT = tr.x.back();
  CHECK(xT[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(xT[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(std::abs(xT[0] + 2.0 * xT[1] - 2.0) <= 2e-3);
  for (int j = 0; j < 2000; ++j) CHECK(tr.slack[j][0] < 0.0);
  CHECK(std::abs(hitting_time(tr, 0).value_or(1.0) - 1.0) <= 5e-3);
  CHECK(std::abs(cost_ex1(-5.0 / 6.0, -1.0 / 3.0, 2000) - 43.0 / 24.0) <= 5e-3);
}

TEST_CASE("controls in the dynamics away from the optimum") {
  CHECK(cost_ex1(0.0, 0.0, 2000) == doctest::Approx(2.5));
  CHECK(std::abs(cost_ex1(-1.0, -1.0, 2000) - 2.9) <= 5e-3);
  SweepTrajectory tr = run_ex1(-1.0, -1.0, 2000);
  auto t = hitting_time(tr, 0);
  REQUIRE(t.has_value());
  CHECK(std::abs(*t - 0.5) <= 2.0 / 2000);
  CHECK(tr.hits.size() == 1);
}

TEST_CASE("edge shift phase one slides along the slanted facet") {
  const int nu = 2000;
  Decoded d = decode_example("ex3", v2(0.0, 0.0), nu);
  SweepingProblem P = make_example("ex3").problem;
  SweepTrajectory tr = catch_up(P, d.path);
  for (int j : {100, 500, 900}) {
    const double t = tr.mesh.t[j];
    CHECK(tr.x[j][0] == doctest::Approx(-t).epsilon(1e-9));
    CHECK(tr.x[j][1] == doctest::Approx(1.0 + t).epsilon(1e-9));
  }
  auto ts = hitting_time(tr, 1);
  REQUIRE(ts.has_value());
  CHECK(std::abs(*ts - 0.5) <= 2.0 / nu);
  CHECK(tr.x.back()[0] == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(tr.x.back()[1] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(cost(P, d.path, tr) == doctest::Approx(1.25).epsilon(1e-6));
}

TEST_CASE("trajectory invariants hold on every example") {
  struct Case {
    const char* name;
    Vec p;
  };
  for (const Case& k : {Case{"ex1", v2(-1.0, -0.5)}, Case{"ex1", v2(-5.0 / 6.0, -1.0 / 3.0)},
                        Case{"ex2", v2(0.7, 0.35)}, Case{"ex2", v2(1.2, -0.4)},
                        Case{"ex3", v2(-0.88, -0.73)}, Case{"ex3", v2(-0.2, 0.9)}}) {
    CAPTURE(k.name);
    SweepingProblem P = make_example(k.name).problem;
    Decoded d = decode_example(k.name, k.p, 400);
    check_trajectory_invariants(P, d.path, catch_up(P, d.path));
  }
}

TEST_CASE("simulation is deterministic") {
  SweepingProblem P = make_example("ex2").problem;
  Decoded d = decode_example("ex2", v2(0.69, 0.35), 500);
  SweepTrajectory a = catch_up(P, d.path), b = catch_up(P, d.path);
  for (size_t j = 0; j < a.x.size(); ++j) CHECK(a.x[j] == b.x[j]);
  for (size_t j = 0; j < a.eta.size(); ++j) CHECK(a.eta[j] == b.eta[j]);
}

TEST_CASE("self-convergence while sliding on a rotating facet") {
  json j = example_problem_json("ex2");
  j["x0"] = {-1.0, 0.0};  // starts on the facet
  SweepingProblem P = problem_from_json(j);
  Parameterization pz = make_parameterization(P, j["family"]);
  auto rows = converge(P, pz, v2(0.5, 0.5), {250, 500, 1000, 2000});
  for (size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].error < rows[k - 1].error);
    REQUIRE(rows[k].order.has_value());
    CHECK(*rows[k].order >= 0.9);
  }
}

TEST_CASE("infeasible start and bad controls are rejected") {
  SweepingProblem P = make_example("ex1").problem;
  ControlPath c = constant_controls(P, Mesh::uniform(1.0, 10), v2(0.0, 0.0));
  SweepingProblem Q = P;
  Q.x0 = v2(0.0, 0.0);
  try {
    catch_up(Q, c);
    FAIL("infeasible start accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InfeasiblePoint);
  }

  ControlPath big = constant_controls(P, Mesh::uniform(1.0, 10), v2(2.0, 0.0));
  CHECK_THROWS_AS(validate_controls(P, big), Error);

  ControlPath moved = c;
  moved.b[3][0] += 0.1;  // rate set is a point
  CHECK_THROWS_AS(validate_controls(P, moved), Error);

  ControlPath stretched = c;
  stretched.a[4] *= 1.05;
  CHECK_THROWS_AS(validate_controls(P, stretched), Error);
}

TEST_CASE("a-norm band shrinks with the mesh") {
  CHECK(band_epsilon(10) == doctest::Approx(1e-2));
  CHECK(band_epsilon(1000000) == doctest::Approx(1e-9));
}
