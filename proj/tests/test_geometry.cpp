#include "doctest.h"
#include "oracles.hpp"
#include "sweep/geometry.hpp"
#include "sweep/sets.hpp"

#include <cmath>
#include <random>

using namespace sweep;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

// {x : x1 + 2 x2 >= 2}
Polyhedron ex1_halfspace() {
  const double r5 = std::sqrt(5.0);
  Mat A(1, 2);
  A << -1.0 / r5, -2.0 / r5;
  Vec b(1);
  b << -2.0 / r5;
  return Polyhedron(A, b);
}

Polyhedron unit_square() {
  Mat A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  Vec b(4);
  b << 1, 1, 0, 0;
  return Polyhedron(A, b);
}

}  // namespace

TEST_CASE("nnls on an identity system clips the negative component") {
  NnlsResult r = nnls(Mat::Identity(2, 2), v2(1.0, -1.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
  CHECK(r.residual == doctest::Approx(1.0));
}

TEST_CASE("nnls on a coupled system settles on one column") {
  NnlsResult r = nnls(m2(1, 0, 1, 1), v2(2.0, 1.0));
  CHECK(r.x[0] == doctest::Approx(1.5));
  CHECK(r.x[1] == doctest::Approx(0.0));
  CHECK(r.residual == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("nnls_mixed leaves free columns unsigned") {
  NnlsResult r = nnls_mixed(Mat::Identity(2, 2), v2(1.0, -1.0), {false, true});
  CHECK(r.x[1] == doctest::Approx(-1.0));
  CHECK(r.residual == doctest::Approx(0.0));
}

TEST_CASE("polyhedron construction rejects bad data") {
  Mat A(1, 2);
  A << 1.0, 1.0;
  CHECK_THROWS_AS(Polyhedron(A, Vec::Zero(1)), Error);
  Mat B(2, 1);
  B << 1.0, -1.0;
  try {
    Polyhedron P(B, Vec::Zero(2));
    FAIL("flat polyhedron accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyPolyhedron);
  }
}

TEST_CASE("active set of the sliding facet") {
  Polyhedron P = ex1_halfspace();
  ActiveSet on = active_set(P, v2(0.0, 1.0));
  REQUIRE(on.indices.size() == 1);
  CHECK(on.slacks[0] == doctest::Approx(0.0));
  ActiveSet off = active_set(P, v2(1.5, 1.0));
  CHECK(off.indices.empty());
  CHECK(off.slacks[0] == doctest::Approx(-1.5 / std::sqrt(5.0)));
  try {
    active_set(P, v2(0.0, 0.0));
    FAIL("infeasible point accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InfeasiblePoint);
  }
}

TEST_CASE("active set at the corner of the edge-shift example") {
  const double r2 = std::sqrt(2.0);
  Mat A(2, 2);
  A << 1 / r2, 1 / r2, 0, 1;
  Vec b(2);
  b << 1 / r2, 1.5;
  ActiveSet s = active_set(Polyhedron(A, b), v2(0.0, 1.0));
  REQUIRE(s.indices.size() == 1);
  CHECK(s.indices[0] == 0);
  CHECK(s.slacks[1] == doctest::Approx(-0.5));
}

TEST_CASE("projection onto a halfspace") {
  Projection p = project(ex1_halfspace(), v2(0.0, 0.0));
  CHECK(p.x[0] == doctest::Approx(0.4));
  CHECK(p.x[1] == doctest::Approx(0.8));
  CHECK(p.multipliers[0] == doctest::Approx(2.0 / std::sqrt(5.0)));
  Projection q = project(ex1_halfspace(), v2(3.0, 2.0));
  CHECK(q.x == v2(3.0, 2.0));
  CHECK(q.multipliers[0] == 0.0);
}

TEST_CASE("projection onto the unit square from outside a corner") {
  Projection p = project(unit_square(), v2(2.0, 3.0));
  CHECK(p.x[0] == doctest::Approx(1.0));
  CHECK(p.x[1] == doctest::Approx(1.0));
  CHECK(p.multipliers[0] == doctest::Approx(1.0));
  CHECK(p.multipliers[1] == doctest::Approx(2.0));
  CHECK(p.multipliers[2] == 0.0);
  CHECK(p.multipliers[3] == 0.0);
}

TEST_CASE("projection agrees with face enumeration on random polyhedra") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 4;
    auto R = oracle::random_polyhedron(rng, n, m);
    Polyhedron P(R.A, R.b);
    Vec y = oracle::random_point(rng, n, 3.0);
    Projection p = project(P, y);
    Vec ref = oracle::projection(R.A, R.b, y);
    CHECK((p.x - ref).norm() <= 1e-9);
  }
}

TEST_CASE("iterative projection matches the oracle with many facets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto R = oracle::random_polyhedron(rng, 3, 8);
    Polyhedron P(R.A, R.b);
    Vec y = oracle::random_point(rng, 3, 3.0);
    Projection p = project(P, y);
    CHECK((p.x - oracle::projection(R.A, R.b, y)).norm() <= 1e-9);
  }
}

TEST_CASE("projection is idempotent, nonexpansive and satisfies KKT") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2, m = 1 + trial % 4;
    auto R = oracle::random_polyhedron(rng, n, m);
    Polyhedron P(R.A, R.b);
    Vec y1 = oracle::random_point(rng, n, 3.0), y2 = oracle::random_point(rng, n, 3.0);
    Projection p1 = project(P, y1), p2 = project(P, y2);

    CHECK((project(P, p1.x).x - p1.x).norm() <= 1e-12);
    CHECK((p1.x - p2.x).norm() <= (y1 - y2).norm() + 1e-12);

    Vec s = P.slacks(p1.x);
    CHECK(p1.multipliers.minCoeff() >= 0.0);
    CHECK(s.maxCoeff() <= 1e-9);
    CHECK((y1 - p1.x - R.A.transpose() * p1.multipliers).norm() <= 1e-9);
    CHECK(p1.multipliers.cwiseProduct(s).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("cone multipliers at an interior point vanish") {
  ConeFit f = cone_multipliers(ex1_halfspace(), v2(3.0, 3.0), Vec::Zero(2));
  CHECK(f.eta.isZero());
  CHECK(f.residual == 0.0);
  CHECK_THROWS_AS(cone_multipliers(ex1_halfspace(), v2(3.0, 3.0), v2(0.1, 0.0)), Error);
}

TEST_CASE("cone multipliers on the sliding face recover the scalar") {
  Polyhedron P = ex1_halfspace();
  Vec a = P.normals().row(0).transpose();
  ConeFit f = cone_multipliers(P, v2(0.0, 1.0), 0.3 * a);
  CHECK(f.eta[0] == doctest::Approx(0.3));
  CHECK(f.residual <= 1e-12);
  try {
    cone_multipliers(P, v2(0.0, 1.0), -a);
    FAIL("outward vector accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotInCone);
  }
}

TEST_CASE("cone multipliers reassemble the input vector") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2, m = 1 + trial % 3;
    Mat A(m, n);
    for (int i = 0; i < m; ++i) A.row(i) = oracle::unit(rng, n).transpose();
    Vec x = oracle::random_point(rng, n, 1.0);
    Vec b = A * x;  // every facet active at x
    Polyhedron P = Polyhedron::unchecked(A, b);
    Vec c(m);
    for (int i = 0; i < m; ++i) c[i] = U(rng);
    Vec w = A.transpose() * c;
    ConeFit f = cone_multipliers(P, x, w);
    CHECK(f.eta.minCoeff() >= 0.0);
    CHECK((A.transpose() * f.eta - w).norm() <= 1e-6);
  }
}

TEST_CASE("plicq on hand-picked normals") {
  Mat one(1, 2);
  one << 0, 1;
  PlicqReport single = check_plicq(Polyhedron::unchecked(one, Vec::Zero(1)), Vec::Zero(2));
  CHECK(single.holds);
  CHECK(single.sigma == doctest::Approx(1.0));

  PlicqReport flat = check_plicq(Polyhedron::unchecked(m2(1, 0, -1, 0), Vec::Zero(2)), Vec::Zero(2));
  CHECK_FALSE(flat.holds);

  const double r2 = std::sqrt(2.0);
  Mat corner = m2(1 / r2, 1 / r2, 0, 1);
  PlicqReport c = check_plicq(Polyhedron::unchecked(corner, Vec::Zero(2)), Vec::Zero(2));
  CHECK(c.holds);
  CHECK(c.licq);
  CHECK(c.sigma >= 1.0);

  PlicqReport orth = check_plicq(Polyhedron::unchecked(Mat::Identity(2, 2), Vec::Zero(2)), Vec::Zero(2));
  CHECK(orth.holds);
  CHECK(orth.sigma <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("plicq agrees with sign-pattern enumeration") {
  std::mt19937_64 rng(21);
  int failing = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 4;
    Mat A(m, n);
    for (int i = 0; i < m; ++i) A.row(i) = oracle::unit(rng, n).transpose();
    if (trial % 7 == 0 && m >= 2) A.row(1) = -A.row(0);
    PlicqReport r = check_plicq(Polyhedron::unchecked(A, Vec::Zero(m)), Vec::Zero(n));
    const bool dep = oracle::positively_dependent(A);
    CHECK(r.holds == !dep);
    failing += dep;
  }
  CHECK(failing > 0);
}

TEST_CASE("maximization gap over a box") {
  ConstraintSet U = ConstraintSet::box(v2(-1, -1), v2(1, 1));
  CHECK(maximization_gap(v2(0.5, 0.0), v2(1.0, 0.3), U) == doctest::Approx(0.0));
  CHECK(maximization_gap(v2(0.5, 0.0), v2(0.0, 0.0), U) == doctest::Approx(0.5));
  ConstraintSet B = ConstraintSet::ball(v2(0, 0), 2.0);
  CHECK(maximization_gap(v2(3.0, 4.0), v2(0.0, 0.0), B) == doctest::Approx(10.0));
  ConstraintSet H = ConstraintSet::halfspaces(Mat::Identity(2, 2), v2(1, 1));
  CHECK_THROWS_AS(maximization_gap(v2(1, 0), v2(0, 0), H), Error);
}

TEST_CASE("constraint set projections and normal cones") {
  ConstraintSet U = ConstraintSet::box(v2(-1, -1), v2(1, 1));
  CHECK(U.project(v2(2, 0.5)) == v2(1, 0.5));
  CHECK(U.contains(v2(1, -1)));
  CHECK_FALSE(U.contains(v2(1.1, 0)));
  CHECK(U.normal_cone_residual(v2(1, 0), v2(1, 0.5)) == doctest::Approx(0.0));
  CHECK(U.normal_cone_residual(v2(-1, 0), v2(1, 0.5)) == doctest::Approx(1.0));
  CHECK(U.normal_cone_residual(v2(0, 1), v2(0, 0)) == doctest::Approx(1.0));

  ConstraintSet B = ConstraintSet::ball(v2(0, 0), 1.0);
  CHECK((B.project(v2(3, 4)) - v2(0.6, 0.8)).norm() < 1e-15);
  CHECK(B.normal_cone_residual(v2(0.6, 0.8), v2(0.6, 0.8)) == doctest::Approx(0.0));

  ConstraintSet pt = ConstraintSet::point(Vec::Zero(1));
  Vec r(1);
  r << 7.0;
  CHECK(pt.normal_cone_residual(r, Vec::Zero(1)) == doctest::Approx(0.0));
}
