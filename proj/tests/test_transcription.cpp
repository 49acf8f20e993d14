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

SweepingProblem line_problem() {
  json j = {{"x0", {0.0}},
            {"facets", {{{"a", {1.0}}, {"b", 1.0}}}},
            {"U", {{"type", "box"}, {"lo", {-1.0}}, {"hi", {1.0}}}},
            {"g", {{"type", "affine"}, {"H", {{1.0}}}}}};
  return problem_from_json(j);
}

struct Candidate {
  SweepingProblem P;
  ControlPath c;
  SweepTrajectory tr;
};

Candidate simulate(const std::string& name, const Vec& p, int nu) {
  ExampleSpec ex = make_example(name);
  Candidate k;
  k.P = ex.problem;
  k.c = make_parameterization(ex.problem, ex.family).decode(Mesh::uniform(1.0, nu), p).path;
  k.tr = catch_up(k.P, k.c);
  return k;
}

}  // namespace

TEST_CASE("assemble rejects meshes with fewer than two intervals") {
  try {
    assemble(line_problem(), 1);
    FAIL("one interval accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadMesh);
  }
}

TEST_CASE("layout size of the smallest scalar problem") {
  DiscreteProblem dp = assemble(line_problem(), 2);
  // x: 3, a: 3, b: 3, u: 2
  CHECK(dp.layout.size == 11);
  CHECK(dp.layout.u_off == 9);
}

TEST_CASE("controls in the dynamics assembled on four intervals") {
  DiscreteProblem dp = assemble(make_example("ex1").problem, 4);
  CHECK(dp.layout.size == 5 * 2 + 5 * 1 * 2 + 5 * 1 + 4 * 2);
  CHECK(dp.constraint_counts.at("dynamics") == 4);
  CHECK(dp.constraint_counts.at("endpoint") == 1);
  CHECK(dp.constraint_counts.at("proximity") == 0);
  json s = dp.summary();
  CHECK(s["dimensions"]["nu"] == 4);
  CHECK(s["proximity"]["reference"] == false);
  CHECK(s["layout"]["size"] == 33);
}

TEST_CASE("pack and unpack are inverse") {
  Candidate k = simulate("ex3", v2(-0.5, 0.2), 20);
  DiscreteProblem dp = assemble(k.P, k.c.mesh);
  Vec z = pack(dp, k.c, k.tr);
  ControlPath c;
  std::vector<Vec> x;
  unpack(dp, z, &c, &x);
  for (int j = 0; j <= 20; ++j) {
    CHECK(x[j] == k.tr.x[j]);
    CHECK(c.a[j] == k.c.a[j]);
    CHECK(c.b[j] == k.c.b[j]);
  }
  for (int j = 0; j < 20; ++j) CHECK(c.u[j] == k.c.u[j]);
  CHECK(pack(dp, c, k.tr) == z);
}

TEST_CASE("simulated candidates are feasible for the discrete problem") {
  for (const auto& [name, p] : {std::pair{"ex1", v2(-1.0, -1.0)}, std::pair{"ex2", v2(0.69, 0.35)},
                                std::pair{"ex3", v2(-0.88, -0.73)}}) {
    CAPTURE(name);
    Candidate k = simulate(name, p, 300);
    DiscreteProblem dp = assemble(k.P, k.c.mesh);
    FeasibilityReport r = feasibility_residual(dp, pack(dp, k.c, k.tr));
    for (const auto& [group, v] : r.groups) {
      CAPTURE(group);
      CHECK(v <= k.P.tol.cone);
    }
  }
}

TEST_CASE("control outside U shows up as its projection distance") {
  Candidate k = simulate("ex1", v2(0.0, 0.0), 10);
  DiscreteProblem dp = assemble(k.P, k.c.mesh);
  ControlPath c = k.c;
  c.u[3] = v2(2.0, 0.5);
  FeasibilityReport r = feasibility_residual(dp, pack(dp, c, k.tr));
  CHECK(r.groups.at("control_set") == doctest::Approx(1.0));
}

TEST_CASE("normal outside the band by delta reports delta") {
  Candidate k = simulate("ex1", v2(0.0, 0.0), 10);
  DiscreteProblem dp = assemble(k.P, k.c.mesh);
  const double delta = 0.02;
  ControlPath c = k.c;
  c.a[5] *= 1.0 + dp.band_eps + delta;
  FeasibilityReport r = feasibility_residual(dp, pack(dp, c, k.tr));
  CHECK(r.groups.at("a_band") == doctest::Approx(delta));
}

TEST_CASE("discrete cost matches the simulation cost") {
  for (const auto& [name, p] : {std::pair{"ex1", v2(-5.0 / 6.0, -1.0 / 3.0)},
                                std::pair{"ex2", v2(0.69, 0.35)}, std::pair{"ex3", v2(-0.2, -0.7)}}) {
    CAPTURE(name);
    Candidate k = simulate(name, p, 200);
    const double J = cost(k.P, k.c, k.tr);
    DiscreteProblem bare = assemble(k.P, k.c.mesh);
    CHECK(std::abs(discrete_cost(bare, pack(bare, k.c, k.tr)) - J) <= 1e-12);
    Reference self{k.c, k.tr};
    DiscreteProblem prox = assemble(k.P, k.c.mesh, &self);
    Vec z = pack(prox, k.c, k.tr);
    CHECK(std::abs(discrete_cost(prox, z) - J) <= 1e-12);
    FeasibilityReport r = feasibility_residual(prox, z);
    CHECK(r.groups.at("proximity_state") == 0.0);
    CHECK(r.groups.at("proximity_velocity") == 0.0);
  }
}

TEST_CASE("a different reference adds a positive proximity term") {
  Candidate k = simulate("ex1", v2(-0.5, -0.5), 50);
  Candidate r = simulate("ex1", v2(0.5, 0.5), 50);
  Reference ref{r.c, r.tr};
  DiscreteProblem dp = assemble(k.P, k.c.mesh, &ref);
  CHECK(dp.constraint_counts.at("proximity") == 2);
  CHECK(discrete_cost(dp, pack(dp, k.c, k.tr)) > cost(k.P, k.c, k.tr));
}
