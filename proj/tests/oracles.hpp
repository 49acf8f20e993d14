#pragma once
// Independent reference implementations shared by the unit and acceptance tests.
// They deliberately avoid the library's own solvers.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Mat rows(const Mat& A, const std::vector<int>& idx) {
  Mat out(idx.size(), A.cols());
  for (size_t k = 0; k < idx.size(); ++k) out.row(k) = A.row(idx[k]);
  return out;
}

inline std::vector<int> subset(unsigned mask, int m) {
  std::vector<int> s;
  for (int i = 0; i < m; ++i)
    if (mask & (1u << i)) s.push_back(i);
  return s;
}

// Closest point to y over all feasible equality-constrained projections
// onto the faces {A_S x = b_S}. Feasibility is checked with `feas`.
inline Vec projection(const Mat& A, const Vec& b, const Vec& y, double feas = 1e-10) {
  const int m = static_cast<int>(A.rows());
  Vec best;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    auto S = subset(mask, m);
    Vec x = y;
    if (!S.empty()) {
      Mat AS = rows(A, S);
      Vec r(S.size());
      for (size_t k = 0; k < S.size(); ++k) r[k] = AS.row(k).dot(y) - b[S[k]];
      Mat pinv = (AS * AS.transpose()).completeOrthogonalDecomposition().pseudoInverse();
      x = y - AS.transpose() * (pinv * r);
      // inconsistent face: skip
      if ((AS * x - Vec(b(S))).norm() > 1e-9) continue;
    }
    if ((A * x - b).maxCoeff() > feas) continue;
    const double d = (x - y).norm();
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

// Some nonzero lambda >= 0 with sum lambda_i a_i = 0? Uses the fact that a
// minimal positive dependence has a one-dimensional null space of one sign.
inline bool positively_dependent(const Mat& N) {  // rows are the normals
  const int k = static_cast<int>(N.rows());
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    auto S = subset(mask, k);
    Mat AS = rows(N, S).transpose();  // n x |S|
    Eigen::JacobiSVD<Mat> svd(AS, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const int s = static_cast<int>(S.size());
    int rank = 0;
    for (int q = 0; q < sv.size(); ++q)
      if (sv[q] > 1e-10) ++rank;
    if (s - rank != 1) continue;
    Vec v = svd.matrixV().col(s - 1);
    if ((v.array() > 1e-12).all() || (v.array() < -1e-12).all()) return true;
  }
  return false;
}

struct RandomPolyhedron {
  Mat A;  // m x n, unit rows
  Vec b;
  Vec slater;
};

inline Vec unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  do {
    for (int k = 0; k < n; ++k) v[k] = N(rng);
  } while (v.norm() < 1e-3);
  return v / v.norm();
}

// Unit normals and offsets with a known strictly interior point.
inline RandomPolyhedron random_polyhedron(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), margin(0.05, 1.0);
  RandomPolyhedron P;
  P.A.resize(m, n);
  P.b.resize(m);
  P.slater.resize(n);
  for (int k = 0; k < n; ++k) P.slater[k] = U(rng);
  for (int i = 0; i < m; ++i) {
    P.A.row(i) = unit(rng, n).transpose();
    P.b[i] = P.A.row(i).dot(P.slater) + margin(rng);
  }
  return P;
}

inline Vec random_point(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> U(-scale, scale);
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = U(rng);
  return v;
}

}  // namespace oracle
