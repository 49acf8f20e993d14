#include "sweep/sets.hpp"

#include <cmath>

namespace sweep {

ConstraintSet ConstraintSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw Error(Errc::InvalidInput, "box bounds size mismatch");
  for (int k = 0; k < lo.size(); ++k)
    if (lo[k] > hi[k]) throw Error(Errc::InvalidInput, "box lower bound above upper bound");
  ConstraintSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lo.size());
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

ConstraintSet ConstraintSet::ball(Vec center, double radius) {
  if (radius < 0.0) throw Error(Errc::InvalidInput, "negative ball radius");
  ConstraintSet s;
  s.kind_ = Kind::Ball;
  s.dim_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

ConstraintSet ConstraintSet::halfspaces(Mat G, Vec h) {
  if (G.rows() != h.size()) throw Error(Errc::InvalidInput, "halfspace list size mismatch");
  ConstraintSet s;
  s.kind_ = Kind::Halfspaces;
  s.dim_ = static_cast<int>(G.cols());
  s.G_ = std::move(G);
  s.h_ = std::move(h);
  return s;
}

std::string ConstraintSet::kind_name() const {
  switch (kind_) {
    case Kind::Box: return "box";
    case Kind::Ball: return "ball";
    case Kind::Halfspaces: return "halfspaces";
  }
  return "?";
}

bool ConstraintSet::contains(const Vec& v, double tol) const {
  switch (kind_) {
    case Kind::Box:
      return dim_ == 0 || ((v - hi_).maxCoeff() <= tol && (lo_ - v).maxCoeff() <= tol);
    case Kind::Ball:
      return (v - center_).norm() <= radius_ + tol;
    case Kind::Halfspaces:
      return G_.rows() == 0 || (G_ * v - h_).maxCoeff() <= tol;
  }
  return false;
}

Vec ConstraintSet::project(const Vec& v) const {
  switch (kind_) {
    case Kind::Box:
      return v.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::Ball: {
      Vec d = v - center_;
      const double r = d.norm();
      return r <= radius_ ? v : Vec(center_ + d * (radius_ / r));
    }
    case Kind::Halfspaces: {
      Vec norms = G_.rowwise().norm();
      Mat Gn = G_;
      Vec hn = h_;
      for (int i = 0; i < G_.rows(); ++i) {
        Gn.row(i) /= norms[i];
        hn[i] /= norms[i];
      }
      return sweep::project(Polyhedron::unchecked(Gn, hn), v).x;
    }
  }
  return v;
}

void ConstraintSet::normal_cone(const Vec& v, double tol, Mat* gens,
                                std::vector<bool>* free_cols) const {
  std::vector<Vec> cols;
  free_cols->clear();
  switch (kind_) {
    case Kind::Box:
      for (int k = 0; k < dim_; ++k) {
        Vec e = Vec::Zero(dim_);
        e[k] = 1.0;
        if (hi_[k] - lo_[k] <= tol) {
          cols.push_back(e);
          free_cols->push_back(true);
        } else if (v[k] >= hi_[k] - tol) {
          cols.push_back(e);
          free_cols->push_back(false);
        } else if (v[k] <= lo_[k] + tol) {
          cols.push_back(-e);
          free_cols->push_back(false);
        }
      }
      break;
    case Kind::Ball: {
      Vec d = v - center_;
      if (radius_ <= tol) {
        for (int k = 0; k < dim_; ++k) {
          Vec e = Vec::Zero(dim_);
          e[k] = 1.0;
          cols.push_back(e);
          free_cols->push_back(true);
        }
      } else if (d.norm() >= radius_ - tol) {
        cols.push_back(d / d.norm());
        free_cols->push_back(false);
      }
      break;
    }
    case Kind::Halfspaces:
      for (int i = 0; i < G_.rows(); ++i) {
        const double nr = G_.row(i).norm();
        if (G_.row(i).dot(v) - h_[i] >= -tol * nr) {
          cols.push_back(G_.row(i).transpose() / nr);
          free_cols->push_back(false);
        }
      }
      break;
  }
  *gens = Mat(dim_, cols.size());
  for (size_t c = 0; c < cols.size(); ++c) gens->col(c) = cols[c];
}

double ConstraintSet::normal_cone_residual(const Vec& psi, const Vec& v, double tol) const {
  Mat G;
  std::vector<bool> fr;
  normal_cone(v, tol, &G, &fr);
  return cone_distance(G, fr, psi);
}

double ConstraintSet::support(const Vec& psi) const {
  switch (kind_) {
    case Kind::Box: {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += std::max(psi[k] * lo_[k], psi[k] * hi_[k]);
      return s;
    }
    case Kind::Ball:
      return psi.dot(center_) + radius_ * psi.norm();
    case Kind::Halfspaces:
      break;
  }
  throw Error(Errc::UnsupportedSet, "support function needs a box or a ball");
}

void ConstraintSet::bounds(Vec* lo, Vec* hi) const {
  switch (kind_) {
    case Kind::Box:
      *lo = lo_;
      *hi = hi_;
      return;
    case Kind::Ball:
      *lo = center_.array() - radius_;
      *hi = center_.array() + radius_;
      return;
    case Kind::Halfspaces:
      break;
  }
  throw Error(Errc::UnsupportedSet, "no bounding box for a halfspace list");
}

double maximization_gap(const Vec& psi, const Vec& value, const ConstraintSet& set) {
  return std::max(0.0, set.support(psi) - psi.dot(value));
}

}  // namespace sweep
