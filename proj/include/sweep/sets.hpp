#pragma once

#include <string>
#include <vector>

#include "sweep/geometry.hpp"

namespace sweep {

// Closed convex constraint set given as membership + projection.
class ConstraintSet {
 public:
  enum class Kind { Box, Ball, Halfspaces };

  static ConstraintSet box(Vec lo, Vec hi);
  static ConstraintSet ball(Vec center, double radius);
  // {v : G v <= h}
  static ConstraintSet halfspaces(Mat G, Vec h);
  static ConstraintSet point(const Vec& p) { return box(p, p); }

  Kind kind() const { return kind_; }
  std::string kind_name() const;
  int dim() const { return dim_; }

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const Mat& G() const { return G_; }
  const Vec& h() const { return h_; }

  bool contains(const Vec& v, double tol = 1e-9) const;
  Vec project(const Vec& v) const;
  double distance(const Vec& v) const { return (project(v) - v).norm(); }

  // Generators of the normal cone at v (columns). Free columns span lines.
  void normal_cone(const Vec& v, double tol, Mat* gens, std::vector<bool>* free_cols) const;
  double normal_cone_residual(const Vec& psi, const Vec& v, double tol = 1e-8) const;

  // max over the set of <psi, s>. Throws UnsupportedSet for halfspace lists.
  double support(const Vec& psi) const;

  // Bounding box. Throws UnsupportedSet for halfspace lists.
  void bounds(Vec* lo, Vec* hi) const;

 private:
  Kind kind_ = Kind::Box;
  int dim_ = 0;
  Vec lo_, hi_, center_;
  double radius_ = 0.0;
  Mat G_;
  Vec h_;
};

// max_{s in set} <psi, s> - <psi, value>
double maximization_gap(const Vec& psi, const Vec& value, const ConstraintSet& set);

}  // namespace sweep
