#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sweep/geometry.hpp"
#include "sweep/sets.hpp"

namespace sweep {

struct Mesh {
  double T = 1.0;
  std::vector<double> t;  // t[0] = 0 < ... < t[nu] = T

  static Mesh uniform(double T, int nu);
  int nu() const { return static_cast<int>(t.size()) - 1; }
  double h(int j) const { return t[j + 1] - t[j]; }
  double max_step() const;
  void validate() const;
};

// u piecewise constant per interval; a, b sampled at nodes.
struct ControlPath {
  Mesh mesh;
  std::vector<Vec> u;  // nu entries of size d
  std::vector<Mat> a;  // nu + 1 entries, m x n, row i is a_i
  std::vector<Vec> b;  // nu + 1 entries of size m

  Vec alpha(int i, int j) const {
    return (a[j + 1].row(i) - a[j].row(i)).transpose() / mesh.h(j);
  }
  double beta(int i, int j) const { return (b[j + 1][i] - b[j][i]) / mesh.h(j); }
};

// g(x, u) = G x + H u + c
struct Perturbation {
  Mat G, H;
  Vec c;
  Vec operator()(const Vec& x, const Vec& u) const;
  const Mat& dx() const { return G; }
  const Mat& du() const { return H; }
};

struct RunningGrad {
  Vec wx, wu, wb, vx, vb;
  Mat wa, va;  // m x n
};

// phi(x) = <p, x> + x'Qx/2
// l = u'Ru/2 + <r, u> + sum_i wa_i |alpha_i|^2/2 + sum_i wb_i beta_i^2/2
struct CostModel {
  Vec phi_lin;
  Mat phi_quad;
  Mat R;
  Vec r;
  Vec wa, wb;

  double phi(const Vec& x) const;
  Vec grad_phi(const Vec& x) const;
  double running(const Vec& u, const Mat& alpha, const Vec& beta) const;
  RunningGrad running_grad(const Vec& u, const Mat& alpha, const Vec& beta, int n) const;
};

struct SweepingProblem {
  std::string name;
  int n = 0, m = 0, d = 0;
  double T = 1.0;
  Vec x0;
  Mat a0;  // m x n
  Vec b0;
  ConstraintSet U;
  std::vector<ConstraintSet> A, B;  // per facet, dims n and 1
  Perturbation g;
  CostModel cost;
  double lipschitz_g = 0.0;
  std::map<std::string, bool> assumptions;
  Tolerances tol;

  void validate() const;
};

struct HitEvent {
  int facet = 0;
  int interval = 0;  // slack crosses between nodes interval and interval + 1
  double time = 0.0;
};

struct SweepTrajectory {
  Mesh mesh;
  std::vector<Vec> x;      // nu + 1 node states
  std::vector<Vec> eta;    // nu per-interval multipliers
  std::vector<Vec> slack;  // nu + 1, <a_i, x> - b_i at the node
  std::vector<double> cone_residual;  // nu
  std::vector<HitEvent> hits;

  Vec velocity(int j) const { return (x[j + 1] - x[j]) / mesh.h(j); }
};

// Half-width of the a-norm band used on a mesh with nu intervals.
double band_epsilon(int nu);

// Throws InvalidInput on the first violated control invariant.
void validate_controls(const SweepingProblem& P, const ControlPath& c, double tol = 1e-9);

struct CatchUpOptions {
  bool validate = true;
};

SweepTrajectory catch_up(const SweepingProblem& P, const ControlPath& c,
                         const CatchUpOptions& opts = {});

std::optional<double> hitting_time(const SweepTrajectory& traj, int facet,
                                   double active_tol = 1e-8);

double cost(const SweepingProblem& P, const ControlPath& c, const SweepTrajectory& traj);

// Controls with constant u, frozen a = a0 and b = b0.
ControlPath constant_controls(const SweepingProblem& P, const Mesh& mesh, const Vec& u);

}  // namespace sweep
