#pragma once

#include <map>
#include <optional>
#include <string>

#include "sweep/dynamics.hpp"
#include "sweep/io.hpp"

namespace sweep {

// Offsets of the blocks of the decision vector z = (x, a, b, u).
struct Layout {
  int n = 0, m = 0, d = 0, nu = 0;
  long x_off = 0, a_off = 0, b_off = 0, u_off = 0, size = 0;

  long x(int j) const { return x_off + static_cast<long>(j) * n; }
  long a(int j, int i) const { return a_off + (static_cast<long>(j) * m + i) * n; }
  long b(int j, int i) const { return b_off + static_cast<long>(j) * m + i; }
  long u(int j) const { return u_off + static_cast<long>(j) * d; }
};

struct Reference {
  ControlPath controls;
  SweepTrajectory traj;
};

struct DiscreteProblem {
  SweepingProblem problem;
  Mesh mesh;
  Layout layout;
  std::optional<Reference> reference;
  double epsilon = 1.0;  // proximity radius
  double band_eps = 0.0;
  std::map<std::string, long> constraint_counts;

  json summary() const;
};

DiscreteProblem assemble(const SweepingProblem& P, int nu, const Reference* ref = nullptr,
                         double epsilon = 1.0);
DiscreteProblem assemble(const SweepingProblem& P, const Mesh& mesh, const Reference* ref = nullptr,
                         double epsilon = 1.0);

Vec pack(const DiscreteProblem& dp, const ControlPath& c, const SweepTrajectory& tr);
void unpack(const DiscreteProblem& dp, const Vec& z, ControlPath* c, std::vector<Vec>* x);

struct FeasibilityReport {
  std::map<std::string, double> groups;
  double max() const;
  json to_json() const;
};

FeasibilityReport feasibility_residual(const DiscreteProblem& dp, const Vec& z);

// Discrete cost including the proximity term when a reference is present.
double discrete_cost(const DiscreteProblem& dp, const Vec& z);

}  // namespace sweep
