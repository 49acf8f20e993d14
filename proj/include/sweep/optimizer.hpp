#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sweep/dynamics.hpp"

namespace sweep {

struct Decoded {
  ControlPath path;
  std::optional<double> switch_time;
};

// Maps a parameter vector in [lo, hi] to a control path on a mesh.
struct Parameterization {
  std::string kind;
  std::vector<std::string> names;
  Vec lo, hi;
  std::function<Decoded(const Mesh&, const Vec&)> decode;

  int dim() const { return static_cast<int>(lo.size()); }
  Vec clamp(const Vec& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
};

// u constant on each of S equal time segments; a and b frozen.
Parameterization piecewise_constant_u(const SweepingProblem& P, int segments);

// b_facet moves at a constant rate; everything else frozen.
Parameterization constant_rate_b(const SweepingProblem& P, int facet);

// b_facet moves at rate p0 until contact_facet becomes active, then at p1.
Parameterization two_phase_rate_b(const SweepingProblem& P, int facet, int contact_facet);

// a_facet = (cos th, sin th) with th' = p0 until contact, then p1. Needs n = 2.
// Rates are bounded by the radius of the facet's rate ball.
Parameterization two_phase_angle(const SweepingProblem& P, int facet, double theta0,
                                 int contact_facet);

using Objective = std::function<double(const Vec&)>;

struct GridResult {
  Vec argmin;
  double min = 0.0;
  int evaluations = 0;
};

GridResult grid_refine(const Objective& f, const Vec& lo, const Vec& hi, int levels,
                       int points_per_axis);

struct SolveOptions {
  int levels = 4;
  int points_per_axis = 11;
  double fd_h = 1e-6;  // scaled by (1 + |p_k|)
  double g_tol = 1e-8;
  int max_iter = 500;
  int seeds = 5;
  bool polish = true;
};

struct SolveResult {
  Vec params;
  double cost = 0.0;
  ControlPath controls;
  SweepTrajectory traj;
  std::optional<double> switch_time;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<Vec> param_trail;
  std::vector<double> cost_trail;
};

SolveResult solve(const SweepingProblem& P, const Parameterization& param, const Mesh& mesh,
                  const SolveOptions& opts = {});

struct DescentResult {
  Vec p;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<Vec> trail;
  std::vector<double> costs;
};

// Central differences with step fd_h (1 + |p_k|), one-sided at the box faces.
Vec fd_gradient(const Objective& f, const Vec& p, const Vec& lo, const Vec& hi, double fd_h,
                int* evaluations = nullptr);

// Projected descent with central finite differences on a box.
DescentResult projected_descent(const Objective& f, const Vec& start, const Vec& lo, const Vec& hi,
                                const SolveOptions& opts);

// Derivative-free simplex polish inside a box.
DescentResult simplex_polish(const Objective& f, const Vec& start, const Vec& lo, const Vec& hi,
                             double step, int max_iter = 4000);

}  // namespace sweep
