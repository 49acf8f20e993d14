#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sweep/errors.hpp"

namespace sweep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Every tolerance used across the library. Defaults are the documented ones.
struct Tolerances {
  double norm = 1e-9;
  double active = 1e-8;
  double feas = 1e-8;
  double cone = 1e-6;
  double fit = 1e-6;
  double comp = 1e-8;
};

struct NnlsResult {
  Vec x;
  double residual = 0.0;
  int iterations = 0;
};

// Lawson-Hanson active-set NNLS: min ||A x - b|| s.t. x >= 0.
// Columns enter in order of largest dual value, ties to the lowest index.
NnlsResult nnls(const Mat& A, const Vec& b, int max_iter = 0);

// Same, but columns flagged in `free_cols` carry no sign constraint.
NnlsResult nnls_mixed(const Mat& A, const Vec& b, const std::vector<bool>& free_cols);

// C(a, b) = {x : <a_i, x> <= b_i}. Row i of `normals` is a_i.
class Polyhedron {
 public:
  // Checked construction: unit normals within norm_tol and a Slater point.
  Polyhedron(Mat normals, Vec offsets, double norm_tol = 1e-9);

  // No validation. Used on hot paths where the caller already knows the data.
  static Polyhedron unchecked(Mat normals, Vec offsets);

  int n() const { return static_cast<int>(a_.cols()); }
  int m() const { return static_cast<int>(a_.rows()); }
  const Mat& normals() const { return a_; }
  const Vec& offsets() const { return b_; }
  // Empty for unchecked instances.
  const Vec& slater_point() const { return slater_; }

  Vec slacks(const Vec& x) const { return a_ * x - b_; }

 private:
  Polyhedron() = default;
  Mat a_;
  Vec b_;
  Vec slater_;
};

// Finds x with A x < b strictly. Returns false if none exists.
bool find_interior_point(const Mat& normals, const Vec& offsets, Vec* point);

// Nonemptiness of {x : A x <= c} by a Farkas test.
bool is_nonempty(const Mat& normals, const Vec& offsets);

struct ActiveSet {
  std::vector<int> indices;
  Vec slacks;
};

ActiveSet active_set(const Polyhedron& P, const Vec& x, double active_tol = 1e-8,
                     double feas_tol = 1e-8);

struct Projection {
  Vec x;
  Vec multipliers;  // y - x = sum_i multipliers_i a_i
};

// Euclidean projection. Exact enumeration for m <= 6, iterative otherwise.
Projection project(const Polyhedron& P, const Vec& y);
Projection project_enumerate(const Polyhedron& P, const Vec& y);
Projection project_iterative(const Polyhedron& P, const Vec& y);

struct ConeFit {
  Vec eta;
  double residual = 0.0;
};

// Non-throwing multiplier recovery on the active facets at x.
ConeFit cone_fit(const Polyhedron& P, const Vec& x, const Vec& w, double active_tol = 1e-8);

// Throws NotInCone when the residual exceeds tol.cone.
ConeFit cone_multipliers(const Polyhedron& P, const Vec& x, const Vec& w,
                         const Tolerances& tol = {});

struct PlicqReport {
  bool holds = true;
  bool licq = true;
  double sigma = 1.0;  // infinity when PLICQ fails
  std::vector<int> active;
};

PlicqReport check_plicq(const Polyhedron& P, const Vec& x, double active_tol = 1e-8,
                        int samples = 2000, std::uint64_t seed = 7);

// Distance from psi to the cone generated by the columns of G, where columns
// flagged free span a subspace and the rest are nonnegative rays.
double cone_distance(const Mat& G, const std::vector<bool>& free_cols, const Vec& psi);

}  // namespace sweep
