#include "sweep/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace sweep {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InfeasiblePoint: return "InfeasiblePoint";
    case Errc::DegenerateActiveSystem: return "DegenerateActiveSystem";
    case Errc::NotInCone: return "NotInCone";
    case Errc::EmptyPolyhedron: return "EmptyPolyhedron";
    case Errc::ConeResidual: return "ConeResidual";
    case Errc::BadMesh: return "BadMesh";
    case Errc::SimulationFailed: return "SimulationFailed";
    case Errc::NoCertificate: return "NoCertificate";
    case Errc::UnsupportedSet: return "UnsupportedSet";
    case Errc::InvalidInput: return "InvalidInput";
  }
  return "Error";
}

namespace {

Vec solve_ls(const Mat& A, const Vec& b) {
  if (A.cols() == 0) return Vec(0);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  return cod.solve(b);
}

Mat rows_of(const Mat& A, const std::vector<int>& idx) {
  Mat out(idx.size(), A.cols());
  for (size_t k = 0; k < idx.size(); ++k) out.row(k) = A.row(idx[k]);
  return out;
}

}  // namespace

NnlsResult nnls(const Mat& A, const Vec& b, int max_iter) {
  const int n = static_cast<int>(A.cols());
  NnlsResult res;
  res.x = Vec::Zero(n);
  if (n == 0) {
    res.residual = b.norm();
    return res;
  }
  if (max_iter <= 0) max_iter = 3 * n + 30;
  const double tol = 1e-12 * std::max(1.0, A.norm()) * std::max(1.0, b.norm());

  std::vector<bool> passive(n, false);
  Vec x = Vec::Zero(n);
  Vec w = A.transpose() * (b - A * x);
  int outer = 0;
  while (outer < max_iter) {
    int t = -1;
    double best = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    }
    if (t < 0) break;
    ++outer;
    passive[t] = true;
    for (int inner = 0; inner < 3 * n + 30; ++inner) {
      std::vector<int> P;
      for (int j = 0; j < n; ++j)
        if (passive[j]) P.push_back(j);
      Mat AP(A.rows(), P.size());
      for (size_t k = 0; k < P.size(); ++k) AP.col(k) = A.col(P[k]);
      Vec zP = solve_ls(AP, b);
      bool all_pos = true;
      for (size_t k = 0; k < P.size(); ++k)
        if (zP[k] <= 0.0) all_pos = false;
      if (all_pos) {
        x.setZero();
        for (size_t k = 0; k < P.size(); ++k) x[P[k]] = zP[k];
        break;
      }
      double alpha = 1.0;
      for (size_t k = 0; k < P.size(); ++k) {
        if (zP[k] <= 0.0) {
          const double xk = x[P[k]];
          const double denom = xk - zP[k];
          if (denom > 0.0) alpha = std::min(alpha, xk / denom);
        }
      }
      for (size_t k = 0; k < P.size(); ++k) x[P[k]] += alpha * (zP[k] - x[P[k]]);
      bool dropped = false;
      for (size_t k = 0; k < P.size(); ++k) {
        if (x[P[k]] <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
          x[P[k]] = 0.0;
          passive[P[k]] = false;
          dropped = true;
        }
      }
      if (!dropped) break;
    }
    Vec w_new = A.transpose() * (b - A * x);
    // guard against cycling on a column that cannot improve the fit
    if (!passive[t]) w_new[t] = std::min(w_new[t], 0.0);
    w = w_new;
  }
  res.x = x;
  res.residual = (A * x - b).norm();
  res.iterations = outer;
  return res;
}

NnlsResult nnls_mixed(const Mat& A, const Vec& b, const std::vector<bool>& free_cols) {
  std::vector<int> F, C;
  for (int j = 0; j < A.cols(); ++j) (free_cols.at(j) ? F : C).push_back(j);
  NnlsResult res;
  res.x = Vec::Zero(A.cols());
  if (F.empty()) return nnls(A, b);
  Mat AF(A.rows(), F.size()), AC(A.rows(), C.size());
  for (size_t k = 0; k < F.size(); ++k) AF.col(k) = A.col(F[k]);
  for (size_t k = 0; k < C.size(); ++k) AC.col(k) = A.col(C[k]);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(AF);
  auto perp = [&](const Mat& M) -> Mat { return M - AF * cod.solve(M); };
  NnlsResult sub = nnls(perp(AC), perp(b));
  Vec zF = cod.solve(b - AC * sub.x);
  for (size_t k = 0; k < F.size(); ++k) res.x[F[k]] = zF[k];
  for (size_t k = 0; k < C.size(); ++k) res.x[C[k]] = sub.x[k];
  res.residual = (A * res.x - b).norm();
  res.iterations = sub.iterations;
  return res;
}

bool is_nonempty(const Mat& normals, const Vec& offsets) {
  const int m = static_cast<int>(normals.rows());
  if (m == 0) return true;
  const int n = static_cast<int>(normals.cols());
  Mat M(n + 1, m);
  M.topRows(n) = normals.transpose();
  M.row(n) = offsets.transpose();
  Vec t = Vec::Zero(n + 1);
  t[n] = -1.0;
  return nnls(M, t).residual > 1e-9;
}

bool find_interior_point(const Mat& normals, const Vec& offsets, Vec* point) {
  const int m = static_cast<int>(normals.rows());
  const int n = static_cast<int>(normals.cols());
  if (m == 0) {
    if (point) *point = Vec::Zero(n);
    return true;
  }
  for (double tau = 1.0; tau >= 1e-12; tau *= 0.1) {
    Vec shifted = offsets - Vec::Constant(m, tau);
    if (!is_nonempty(normals, shifted)) continue;
    Projection pr;
    try {
      pr = project(Polyhedron::unchecked(normals, shifted), Vec::Zero(n));
    } catch (const Error&) {
      continue;  // Farkas test is blind to nearly empty shifts
    }
    Vec s = normals * pr.x - offsets;
    if (s.maxCoeff() < 0.0) {
      if (point) *point = pr.x;
      return true;
    }
  }
  return false;
}

Polyhedron::Polyhedron(Mat normals, Vec offsets, double norm_tol)
    : a_(std::move(normals)), b_(std::move(offsets)) {
  if (a_.rows() != b_.size()) throw Error(Errc::InvalidInput, "normals/offsets size mismatch");
  for (int i = 0; i < a_.rows(); ++i) {
    if (std::abs(a_.row(i).norm() - 1.0) > norm_tol)
      throw Error(Errc::InvalidInput, "facet normal " + std::to_string(i) + " is not unit");
  }
  if (!find_interior_point(a_, b_, &slater_))
    throw Error(Errc::EmptyPolyhedron, "no strictly interior point");
}

Polyhedron Polyhedron::unchecked(Mat normals, Vec offsets) {
  Polyhedron p;
  p.a_ = std::move(normals);
  p.b_ = std::move(offsets);
  return p;
}

ActiveSet active_set(const Polyhedron& P, const Vec& x, double active_tol, double feas_tol) {
  ActiveSet out;
  out.slacks = P.slacks(x);
  for (int i = 0; i < P.m(); ++i) {
    if (out.slacks[i] > feas_tol)
      throw Error(Errc::InfeasiblePoint, "slack " + std::to_string(out.slacks[i]) +
                                             " on facet " + std::to_string(i));
    if (out.slacks[i] >= -active_tol) out.indices.push_back(i);
  }
  return out;
}

namespace {

const std::vector<unsigned>& masks_by_size(int m) {
  static std::vector<std::vector<unsigned>> cache(7);
  auto& v = cache.at(m);
  if (v.empty() && m > 0) {
    for (unsigned s = 1; s < (1u << m); ++s) v.push_back(s);
    std::stable_sort(v.begin(), v.end(), [](unsigned p, unsigned q) {
      return std::popcount(p) < std::popcount(q);
    });
  }
  return v;
}

}  // namespace

Projection project_enumerate(const Polyhedron& P, const Vec& y) {
  const int m = P.m();
  const Mat& A = P.normals();
  const Vec& b = P.offsets();
  Projection out;
  out.multipliers = Vec::Zero(m);
  const double tol = 1e-10 * (1.0 + y.norm() + (m ? b.cwiseAbs().maxCoeff() : 0.0));
  Vec s = A * y - b;
  if (m == 0 || s.maxCoeff() <= tol) {
    out.x = y;
    return out;
  }
  if (m > 6) throw Error(Errc::InvalidInput, "enumeration limited to m <= 6");
  for (unsigned mask : masks_by_size(m)) {
    std::vector<int> S;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    // a facet already strictly satisfied by y with slack margin can still be
    // active at the projection, so no pruning here beyond the KKT check
    Mat AS = rows_of(A, S);
    Vec bS(S.size());
    for (size_t k = 0; k < S.size(); ++k) bS[k] = b[S[k]];
    Vec lam;
    if (S.size() == 1) {
      const double nn = AS.row(0).squaredNorm();
      lam = Vec::Constant(1, (AS.row(0).dot(y) - bS[0]) / nn);
    } else {
      Mat G = AS * AS.transpose();
      lam = solve_ls(G, AS * y - bS);
    }
    if (lam.minCoeff() < -tol) continue;
    Vec x = y - AS.transpose() * lam;
    if ((AS * x - bS).cwiseAbs().maxCoeff() > tol) continue;
    if ((A * x - b).maxCoeff() > tol) continue;
    out.x = x;
    for (size_t k = 0; k < S.size(); ++k) out.multipliers[S[k]] = std::max(0.0, lam[k]);
    return out;
  }
  throw Error(Errc::DegenerateActiveSystem, "no active subset satisfies the KKT system");
}

Projection project_iterative(const Polyhedron& P, const Vec& y) {
  const int m = P.m();
  const int n = P.n();
  const Mat& A = P.normals();
  const Vec& b = P.offsets();
  Projection out;
  out.multipliers = Vec::Zero(m);
  const double scale = 1.0 + y.norm() + (m ? b.cwiseAbs().maxCoeff() : 0.0);
  const double tol = 1e-10 * scale;
  if (m == 0 || (A * y - b).maxCoeff() <= tol) {
    out.x = y;
    return out;
  }
  Vec sq = A.rowwise().squaredNorm();
  // Dykstra's cyclic projections
  Vec x = y;
  Mat q = Mat::Zero(n, m);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    Vec x_start = x;
    for (int i = 0; i < m; ++i) {
      Vec z = x + q.col(i);
      const double viol = A.row(i).dot(z) - b[i];
      Vec xn = viol > 0.0 ? Vec(z - (viol / sq[i]) * A.row(i).transpose()) : z;
      q.col(i) = z - xn;
      x = xn;
    }
    if ((x - x_start).norm() <= 1e-15 * scale) break;
  }
  // KKT polish on a guessed active set
  std::vector<int> S;
  Vec s = A * x - b;
  for (int i = 0; i < m; ++i)
    if (s[i] >= -1e-7 * scale) S.push_back(i);
  for (int it = 0; it < 4 * m + 10; ++it) {
    Mat AS = rows_of(A, S);
    Vec bS(S.size());
    for (size_t k = 0; k < S.size(); ++k) bS[k] = b[S[k]];
    Vec lam = S.empty() ? Vec(0) : solve_ls(Mat(AS * AS.transpose()), Vec(AS * y - bS));
    Vec xc = S.empty() ? y : Vec(y - AS.transpose() * lam);
    int worst = -1;
    double wl = -tol;
    for (size_t k = 0; k < S.size(); ++k)
      if (lam[k] < wl) {
        wl = lam[k];
        worst = static_cast<int>(k);
      }
    if (worst >= 0) {
      S.erase(S.begin() + worst);
      continue;
    }
    Vec sc = A * xc - b;
    int add = -1;
    double wv = tol;
    for (int i = 0; i < m; ++i)
      if (sc[i] > wv && std::find(S.begin(), S.end(), i) == S.end()) {
        wv = sc[i];
        add = i;
      }
    if (add >= 0) {
      S.push_back(add);
      std::sort(S.begin(), S.end());
      continue;
    }
    out.x = xc;
    for (size_t k = 0; k < S.size(); ++k) out.multipliers[S[k]] = std::max(0.0, lam[k]);
    return out;
  }
  throw Error(Errc::DegenerateActiveSystem, "active-set polish did not converge");
}

Projection project(const Polyhedron& P, const Vec& y) {
  return P.m() <= 6 ? project_enumerate(P, y) : project_iterative(P, y);
}

ConeFit cone_fit(const Polyhedron& P, const Vec& x, const Vec& w, double active_tol) {
  ConeFit out;
  out.eta = Vec::Zero(P.m());
  Vec s = P.slacks(x);
  std::vector<int> I;
  for (int i = 0; i < P.m(); ++i)
    if (s[i] >= -active_tol) I.push_back(i);
  if (I.empty()) {
    out.residual = w.norm();
    return out;
  }
  Mat N = rows_of(P.normals(), I).transpose();
  NnlsResult r = nnls(N, w);
  for (size_t k = 0; k < I.size(); ++k) out.eta[I[k]] = r.x[k];
  out.residual = r.residual;
  return out;
}

ConeFit cone_multipliers(const Polyhedron& P, const Vec& x, const Vec& w, const Tolerances& tol) {
  Vec s = P.slacks(x);
  if (P.m() > 0 && s.maxCoeff() > tol.feas)
    throw Error(Errc::InfeasiblePoint, "point outside the polyhedron");
  ConeFit f = cone_fit(P, x, w, tol.active);
  if (f.residual > tol.cone)
    throw Error(Errc::NotInCone, "residual " + std::to_string(f.residual));
  return f;
}

PlicqReport check_plicq(const Polyhedron& P, const Vec& x, double active_tol, int samples,
                        std::uint64_t seed) {
  PlicqReport out;
  Vec s = P.slacks(x);
  for (int i = 0; i < P.m(); ++i)
    if (s[i] >= -active_tol) out.active.push_back(i);
  const int k = static_cast<int>(out.active.size());
  if (k == 0) return out;
  Mat N = rows_of(P.normals(), out.active).transpose();  // n x k
  const int n = static_cast<int>(N.rows());

  Mat M(n + 1, k);
  M.topRows(n) = N;
  M.row(n).setOnes();
  Vec t = Vec::Zero(n + 1);
  t[n] = 1.0;
  out.holds = nnls(M, t).residual > 1e-9;

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(N);
  cod.setThreshold(1e-10);
  out.licq = cod.rank() == k;

  if (!out.holds) {
    out.sigma = std::numeric_limits<double>::infinity();
    return out;
  }
  Vec norms = N.colwise().norm().transpose();
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  double sigma = 1.0;  // attained at every vertex of the simplex
  for (int it = 0; it < samples; ++it) {
    Vec lam(k);
    for (int j = 0; j < k; ++j) lam[j] = ex(rng);
    const double den = (N * lam).norm();
    if (den > 0.0) sigma = std::max(sigma, lam.dot(norms) / den);
  }
  out.sigma = sigma;
  return out;
}

double cone_distance(const Mat& G, const std::vector<bool>& free_cols, const Vec& psi) {
  if (G.cols() == 0) return psi.norm();
  return nnls_mixed(G, psi, free_cols).residual;
}

}  // namespace sweep
