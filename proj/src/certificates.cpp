#include "sweep/certificates.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace sweep {

LambdaMode lambda_mode_from_string(const std::string& s) {
  if (s == "normal") return LambdaMode::Normal;
  if (s == "abnormal") return LambdaMode::Abnormal;
  if (s == "auto") return LambdaMode::Auto;
  throw Error(Errc::InvalidInput, "lambda mode must be normal, abnormal or auto");
}

std::string to_string(LambdaMode m) {
  switch (m) {
    case LambdaMode::Normal: return "normal";
    case LambdaMode::Abnormal: return "abnormal";
    case LambdaMode::Auto: return "auto";
  }
  return "?";
}

namespace {

// Per-interval running-cost gradients and rates along the candidate.
struct IntervalData {
  RunningGrad rg;
  Mat alpha;  // m x n
  Vec beta;
};

std::vector<IntervalData> interval_data(const SweepingProblem& P, const ControlPath& c) {
  const int nu = c.mesh.nu();
  std::vector<IntervalData> out(nu);
  for (int j = 0; j < nu; ++j) {
    IntervalData& d = out[j];
    d.alpha = Mat(P.m, P.n);
    d.beta = Vec(P.m);
    for (int i = 0; i < P.m; ++i) {
      d.alpha.row(i) = c.alpha(i, j).transpose();
      d.beta[i] = c.beta(i, j);
    }
    d.rg = P.cost.running_grad(c.u[j], d.alpha, d.beta, P.n);
  }
  return out;
}

bool is_point(const ConstraintSet& s) {
  if (s.kind() == ConstraintSet::Kind::Box) return (s.hi() - s.lo()).maxCoeff() <= 0.0;
  if (s.kind() == ConstraintSet::Kind::Ball) return s.radius() <= 0.0;
  return false;
}

std::vector<bool> exact_norm_facets(const SweepingProblem& P, const ControlPath& c) {
  std::vector<bool> ex(P.m, false);
  for (int i = 0; i < P.m; ++i) {
    if (is_point(P.A[i])) continue;
    bool unit = true;
    for (const Mat& a : c.a) unit = unit && std::abs(a.row(i).norm() - 1.0) <= P.tol.norm;
    ex[i] = unit;
  }
  return ex;
}

// +1 upper band edge, -1 lower edge, 0 strictly inside.
int band_edge(double nrm, double eps, double tol) {
  if (nrm >= 1.0 + eps - tol) return 1;
  if (nrm <= 1.0 - eps + tol) return -1;
  return 0;
}

bool active(const SweepTrajectory& tr, int node, int i, double tol) {
  return tr.slack[node][i] >= -tol;
}

}  // namespace

Vec OptimalityCertificate::y(const SweepingProblem& P, const ControlPath& c, int j) const {
  Mat alpha(P.m, P.n);
  Vec beta(P.m);
  for (int i = 0; i < P.m; ++i) {
    alpha.row(i) = c.alpha(i, j).transpose();
    beta[i] = c.beta(i, j);
  }
  return px[j + 1] - lambda * P.cost.running_grad(c.u[j], alpha, beta, P.n).vx;
}

double OptimalityCertificate::normalization() const {
  double s = std::abs(lambda) + eta_end.norm();
  double b2 = 0.0;
  for (const Vec& b : band) b2 += b.squaredNorm();
  s += std::sqrt(b2);
  for (size_t j = 0; j + 1 < px.size(); ++j) s += px[j].norm();
  if (!pa.empty()) s += pa[0].norm();
  if (!pb.empty()) s += pb[0].norm();
  for (size_t j = 0; j < psi_u.size(); ++j)
    s += std::sqrt(psi_u[j].squaredNorm() + psi_a[j].squaredNorm() + psi_b[j].squaredNorm());
  return s;
}

void OptimalityCertificate::scale(double s) {
  lambda *= s;
  for (auto& v : px) v *= s;
  for (auto& v : pa) v *= s;
  for (auto& v : pb) v *= s;
  for (auto& v : gamma) v *= s;
  for (auto& v : band) v *= s;
  for (auto& v : psi_u) v *= s;
  for (auto& v : psi_a) v *= s;
  for (auto& v : psi_b) v *= s;
  eta_end *= s;
}

OptimalityCertificate zero_certificate(const DiscreteProblem& dp, const SweepTrajectory& traj) {
  const SweepingProblem& P = dp.problem;
  const int nu = dp.mesh.nu();
  OptimalityCertificate z;
  z.px.assign(nu + 1, Vec::Zero(P.n));
  z.pa.assign(nu + 1, Mat::Zero(P.m, P.n));
  z.pb.assign(nu + 1, Vec::Zero(P.m));
  z.gamma.assign(nu, Vec::Zero(P.m));
  z.eta = traj.eta;
  z.eta_end = Vec::Zero(P.m);
  z.band.assign(nu + 1, Vec::Zero(P.m));
  z.psi_u.assign(nu, Vec::Zero(P.d));
  z.psi_a.assign(nu, Mat::Zero(P.m, P.n));
  z.psi_b.assign(nu, Vec::Zero(P.m));
  z.exact_norm.assign(P.m, false);
  return z;
}

double ResidualReport::max() const {
  double v = 0.0;
  for (const auto& [k, r] : groups) v = std::max(v, r);
  return v;
}

std::vector<std::string> ResidualReport::failing() const {
  std::vector<std::string> out;
  for (const auto& [k, r] : groups) {
    auto it = tolerances.find(k);
    if (!(r <= (it == tolerances.end() ? 0.0 : it->second))) out.push_back(k);
  }
  return out;
}

bool ResidualReport::passed() const { return failing().empty(); }

json ResidualReport::to_json() const {
  json j;
  j["mode"] = mode;
  j["lambda"] = lambda;
  j["abnormal"] = abnormal;
  j["passed"] = passed();
  json g = json::object();
  for (const auto& [k, r] : groups)
    g[k] = {{"residual", r}, {"tolerance", tolerances.at(k)}, {"ok", r <= tolerances.at(k)}};
  j["groups"] = g;
  j["margins"] = margins;
  j["skipped"] = skipped;
  return j;
}

std::string ResidualReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(22) << "group" << std::right << std::setw(14) << "residual"
     << std::setw(12) << "tolerance" << "  status\n";
  for (const auto& [k, r] : groups) {
    const double t = tolerances.at(k);
    os << std::left << std::setw(22) << k << std::right << std::scientific << std::setprecision(3)
       << std::setw(14) << r << std::setw(12) << t << "  " << (r <= t ? "ok" : "FAIL") << "\n";
  }
  os << std::defaultfloat << "mode " << mode << ", lambda " << lambda
     << (abnormal ? " (abnormal)" : "") << "\n";
  for (const auto& s : skipped) os << "skipped: " << s << "\n";
  return os.str();
}

ResidualReport residuals(const DiscreteProblem& dp, const ControlPath& c,
                         const SweepTrajectory& traj, const OptimalityCertificate& cert) {
  const SweepingProblem& P = dp.problem;
  const Tolerances& tol = P.tol;
  const int nu = dp.mesh.nu(), n = P.n, m = P.m;
  if (static_cast<int>(cert.px.size()) != nu + 1 || static_cast<int>(cert.gamma.size()) != nu ||
      static_cast<int>(cert.psi_u.size()) != nu)
    throw Error(Errc::InvalidInput, "certificate does not match the mesh");
  const auto data = interval_data(P, c);
  const Mat Gx = P.g.G.size() ? P.g.G : Mat::Zero(n, n);
  const Mat Hu = P.g.H.size() ? P.g.H : Mat::Zero(n, P.d);
  const double lam = cert.lambda;

  std::vector<Vec> y(nu);
  for (int j = 0; j < nu; ++j) y[j] = cert.px[j + 1] - lam * data[j].rg.vx;

  double adj_x = 0, adj_a = 0, adj_b = 0, link = 0, cases = 0, ctl = 0, ncone = 0;
  double gap = 0, signs = 0, comp = 0, orth = 0;
  bool gap_skipped = false;

  for (int k = 0; k < nu; ++k) {
    const double h = dp.mesh.h(k);
    Vec rx = (cert.px[k + 1] - cert.px[k]) / h - lam * data[k].rg.wx + Gx.transpose() * y[k];
    for (int i = 0; i < m && k > 0; ++i) rx -= cert.gamma[k - 1][i] * c.a[k].row(i).transpose();
    adj_x = std::max(adj_x, rx.cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i) {
      Vec ra = (cert.pa[k + 1].row(i) - cert.pa[k].row(i)).transpose() / h -
               lam * data[k].rg.wa.row(i).transpose() -
               (2.0 / h) * cert.band[k][i] * c.a[k].row(i).transpose();
      double rb = (cert.pb[k + 1][i] - cert.pb[k][i]) / h - lam * data[k].rg.wb[i];
      if (k > 0) {
        ra -= cert.gamma[k - 1][i] * traj.x[k] + cert.eta[k - 1][i] * y[k - 1];
        rb += cert.gamma[k - 1][i];
      }
      adj_a = std::max(adj_a, ra.cwiseAbs().maxCoeff());
      adj_b = std::max(adj_b, std::abs(rb));
    }
  }

  for (int j = 0; j < nu; ++j) {
    const double h = dp.mesh.h(j);
    for (int i = 0; i < m; ++i) {
      Vec la = cert.pa[j + 1].row(i).transpose() - lam * data[j].rg.va.row(i).transpose() -
               cert.psi_a[j].row(i).transpose();
      link = std::max(link, la.cwiseAbs().maxCoeff());
      link = std::max(link, std::abs(cert.pb[j + 1][i] - lam * data[j].rg.vb[i] - cert.psi_b[j][i]));
      Vec alpha = data[j].alpha.row(i).transpose();
      Vec beta = Vec::Constant(1, data[j].beta[i]);
      Vec pb1 = Vec::Constant(1, cert.psi_b[j][i]);
      Vec pa1 = cert.psi_a[j].row(i).transpose();
      ncone = std::max({ncone, P.A[i].normal_cone_residual(pa1, alpha, tol.active),
                        P.B[i].normal_cone_residual(pb1, beta, tol.active)});
      try {
        gap = std::max({gap, maximization_gap(pa1, alpha, P.A[i]),
                        maximization_gap(pb1, beta, P.B[i])});
      } catch (const Error&) {
        gap_skipped = true;
      }

      const double s = c.a[j + 1].row(i).dot(y[j]);
      const double g = cert.gamma[j][i];
      const double e = cert.eta[j][i];
      if (!active(traj, j + 1, i, tol.active)) {
        cases = std::max(cases, std::abs(g));
        comp = std::max(comp, std::min(std::abs(e), -traj.slack[j + 1][i]));
      } else if (e <= tol.comp) {
        if (!(g >= 0.0 && s >= 0.0)) cases = std::max(cases, std::min(std::abs(g), std::abs(s)));
      }
      if (e < 0.0) comp = std::max(comp, -e);
      if (e > tol.comp) orth = std::max(orth, std::abs(s));
    }
    Vec pu = h * (Hu.transpose() * y[j] - lam * data[j].rg.wu);
    if (P.d) {
      ctl = std::max(ctl, (cert.psi_u[j] - pu).cwiseAbs().maxCoeff());
      ncone = std::max(ncone, P.U.normal_cone_residual(cert.psi_u[j], c.u[j], tol.active));
      try {
        gap = std::max(gap, maximization_gap(cert.psi_u[j], c.u[j], P.U));
      } catch (const Error&) {
        gap_skipped = true;
      }
    }
  }

  // transversality
  const double hl = dp.mesh.h(nu - 1);
  Vec tx = cert.px[nu] + lam * P.cost.grad_phi(traj.x[nu]);
  double ta = 0.0, tb = 0.0;
  for (int i = 0; i < m; ++i) {
    const double mass = cert.eta_end[i] + hl * cert.gamma[nu - 1][i];
    tx += mass * c.a[nu].row(i).transpose();
    Vec ra = cert.pa[nu].row(i).transpose() + 2.0 * cert.band[nu][i] * c.a[nu].row(i).transpose() +
             (cert.eta_end[i] + hl * cert.gamma[nu - 1][i]) * traj.x[nu] +
             hl * cert.eta[nu - 1][i] * y[nu - 1];
    ta = std::max(ta, ra.cwiseAbs().maxCoeff());
    tb = std::max(tb, std::abs(cert.pb[nu][i] - mass));
    // endpoint multiplier: nonnegative, zero off the boundary, carries the final atom
    signs = std::max({signs, std::max(0.0, -cert.eta_end[i]), std::abs(cert.gamma[nu - 1][i])});
    if (!active(traj, nu, i, tol.active))
      comp = std::max(comp, std::min(std::abs(cert.eta_end[i]), -traj.slack[nu][i]));
  }

  signs = std::max(signs, std::max(0.0, -lam));
  for (int k = 0; k <= nu; ++k) {
    for (int i = 0; i < m; ++i) {
      const double b = cert.band[k][i];
      if (k == 0) {
        signs = std::max(signs, std::abs(b));
        continue;
      }
      if (!cert.exact_norm.empty() && cert.exact_norm[i]) continue;
      const int edge = band_edge(c.a[k].row(i).norm(), dp.band_eps, tol.active);
      if (edge == 0) signs = std::max(signs, std::abs(b));
      if (edge > 0) signs = std::max(signs, std::max(0.0, -b));
      if (edge < 0) signs = std::max(signs, std::max(0.0, b));
    }
  }

  FeasibilityReport feas = feasibility_residual(dp, pack(dp, c, traj));

  double gamma_norm = 0.0, band_norm = 0.0;
  for (const Vec& g : cert.gamma) gamma_norm += g.squaredNorm();
  for (const Vec& b : cert.band) band_norm += b.squaredNorm();
  const double ntc0 = cert.normalization();
  const double ntc1 = std::abs(lam) + std::sqrt(band_norm) + std::sqrt(gamma_norm);

  ResidualReport rep;
  rep.groups["primal_dynamics"] = feas.max();
  rep.groups["adjoint_x"] = adj_x;
  rep.groups["adjoint_a"] = adj_a;
  rep.groups["adjoint_b"] = adj_b;
  rep.groups["rate_link"] = link;
  rep.groups["coderivative_cases"] = cases;
  rep.groups["control_u"] = ctl;
  rep.groups["normal_cone"] = ncone;
  rep.groups["transversality_x"] = tx.size() ? tx.cwiseAbs().maxCoeff() : 0.0;
  rep.groups["transversality_a"] = ta;
  rep.groups["transversality_b"] = tb;
  rep.groups["sign_conditions"] = signs;
  rep.groups["complementarity"] = comp;
  rep.groups["orthogonality"] = orth;
  rep.groups["maximization_gap"] = gap;
  rep.groups["nontriviality"] = std::abs(ntc0 - 1.0);
  rep.groups["nontriviality_atoms"] = ntc1 > tol.fit ? 0.0 : 1.0;
  for (const auto& [k, r] : rep.groups) rep.tolerances[k] = tol.fit;
  rep.margins["normalization_sum"] = ntc0;
  rep.margins["lambda_band_gamma_sum"] = ntc1;
  if (gap_skipped) rep.skipped.push_back("maximization_gap on halfspace-list sets");
  rep.lambda = lam;
  rep.abnormal = lam == 0.0;
  rep.mode = lam == 0.0 ? "abnormal" : "normal";
  return rep;
}

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Unknown bookkeeping for the linear dual system. Lambda is kept outside.
struct Unknowns {
  int n = 0, m = 0, d = 0, nu = 0;
  long count = 0;
  std::vector<int> sign;  // +1 nonnegative, -1 nonpositive, 0 free
  std::vector<std::vector<long>> gamma, band;
  std::vector<long> eta_end;
  // cone generators per interval: U, then A_i, then B_i
  struct Cone {
    Mat G;
    long first = -1;
  };
  std::vector<Cone> cu;
  std::vector<std::vector<Cone>> ca, cb;

  long add(int s) {
    sign.push_back(s);
    return count++;
  }
  long px(int k, int a) const { return static_cast<long>(k) * n + a; }
  long pa(int k, int i, int a) const {
    return static_cast<long>(nu + 1) * n + (static_cast<long>(k) * m + i) * n + a;
  }
  long pb(int k, int i) const {
    return static_cast<long>(nu + 1) * (n + m * n) + static_cast<long>(k) * m + i;
  }
};

Unknowns::Cone make_cone(const ConstraintSet& s, const Vec& v, double tol, Unknowns* U) {
  Unknowns::Cone c;
  std::vector<bool> fr;
  s.normal_cone(v, tol, &c.G, &fr);
  for (int k = 0; k < c.G.cols(); ++k) {
    const long id = U->add(fr[k] ? 0 : 1);
    if (k == 0) c.first = id;
  }
  return c;
}

struct System {
  std::vector<Triplet> trip;
  std::vector<double> lam;  // coefficient of lambda per row
  long rows = 0;

  long row() {
    lam.push_back(0.0);
    return rows++;
  }
  void add(long r, long var, double v) {
    if (var >= 0 && v != 0.0) trip.emplace_back(r, var, v);
  }
};

struct Built {
  Unknowns u;
  Sparse A;
  Vec lam;
};

Built build_system(const DiscreteProblem& dp, const ControlPath& c, const SweepTrajectory& tr,
                   const std::vector<bool>& exact) {
  const SweepingProblem& P = dp.problem;
  const Tolerances& tol = P.tol;
  const int n = P.n, m = P.m, d = P.d, nu = dp.mesh.nu();
  const auto data = interval_data(P, c);
  const Mat Gx = P.g.G.size() ? P.g.G : Mat::Zero(n, n);
  const Mat Hu = P.g.H.size() ? P.g.H : Mat::Zero(n, d);

  Built B;
  Unknowns& U = B.u;
  U.n = n;
  U.m = m;
  U.d = d;
  U.nu = nu;
  for (long k = 0; k < static_cast<long>(nu + 1) * (n + m * n + m); ++k) U.add(0);
  // the atom at the final node only enters through eta_end + h gamma, so it is
  // absorbed into the endpoint multiplier
  U.gamma.assign(nu, std::vector<long>(m, -1));
  for (int j = 0; j + 1 < nu; ++j)
    for (int i = 0; i < m; ++i)
      if (active(tr, j + 1, i, tol.active)) U.gamma[j][i] = U.add(tr.eta[j][i] > tol.comp ? 0 : 1);
  U.eta_end.assign(m, -1);
  for (int i = 0; i < m; ++i)
    if (active(tr, nu, i, tol.active)) U.eta_end[i] = U.add(1);
  // a_0 is fixed by the initial condition, so its norm constraint carries no multiplier
  U.band.assign(nu + 1, std::vector<long>(m, -1));
  for (int k = 1; k <= nu; ++k)
    for (int i = 0; i < m; ++i) {
      if (exact[i]) {
        U.band[k][i] = U.add(0);
        continue;
      }
      const int e = band_edge(c.a[k].row(i).norm(), dp.band_eps, tol.active);
      if (e != 0) U.band[k][i] = U.add(e);
    }
  U.cu.resize(nu);
  U.ca.assign(nu, std::vector<Unknowns::Cone>(m));
  U.cb.assign(nu, std::vector<Unknowns::Cone>(m));
  for (int j = 0; j < nu; ++j) {
    if (d) U.cu[j] = make_cone(P.U, c.u[j], tol.active, &U);
    for (int i = 0; i < m; ++i) {
      U.ca[j][i] = make_cone(P.A[i], data[j].alpha.row(i).transpose(), tol.active, &U);
      U.cb[j][i] = make_cone(P.B[i], Vec::Constant(1, data[j].beta[i]), tol.active, &U);
    }
  }

  System S;
  auto gam = [&](int j, int i) { return j >= 0 ? U.gamma[j][i] : -1L; };

  for (int k = 0; k < nu; ++k) {
    const double h = dp.mesh.h(k);
    for (int a = 0; a < n; ++a) {
      const long r = S.row();
      S.add(r, U.px(k + 1, a), 1.0);
      S.add(r, U.px(k, a), -1.0);
      S.lam[r] -= h * data[k].rg.wx[a];
      for (int b = 0; b < n; ++b) {
        S.add(r, U.px(k + 1, b), h * Gx(b, a));
        S.lam[r] -= h * Gx(b, a) * data[k].rg.vx[b];
      }
      for (int i = 0; i < m; ++i) S.add(r, gam(k - 1, i), -h * c.a[k](i, a));
    }
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < n; ++a) {
        const long r = S.row();
        S.add(r, U.pa(k + 1, i, a), 1.0);
        S.add(r, U.pa(k, i, a), -1.0);
        S.lam[r] -= h * data[k].rg.wa(i, a);
        S.add(r, U.band[k][i], -2.0 * c.a[k](i, a));
        if (k > 0) {
          S.add(r, gam(k - 1, i), -h * tr.x[k][a]);
          const double e = tr.eta[k - 1][i];
          S.add(r, U.px(k, a), -h * e);
          S.lam[r] += h * e * data[k - 1].rg.vx[a];
        }
      }
      const long r = S.row();
      S.add(r, U.pb(k + 1, i), 1.0);
      S.add(r, U.pb(k, i), -1.0);
      S.lam[r] -= h * data[k].rg.wb[i];
      S.add(r, gam(k - 1, i), h);
    }
  }

  const double hl = dp.mesh.h(nu - 1);
  const Vec gphi = P.cost.grad_phi(tr.x[nu]);
  for (int a = 0; a < n; ++a) {
    const long r = S.row();
    S.add(r, U.px(nu, a), 1.0);
    S.lam[r] += gphi[a];
    for (int i = 0; i < m; ++i) {
      S.add(r, U.eta_end[i], c.a[nu](i, a));
      S.add(r, U.gamma[nu - 1][i], hl * c.a[nu](i, a));
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) {
      const long r = S.row();
      S.add(r, U.pa(nu, i, a), 1.0);
      S.add(r, U.band[nu][i], 2.0 * c.a[nu](i, a));
      S.add(r, U.eta_end[i], tr.x[nu][a]);
      S.add(r, U.gamma[nu - 1][i], hl * tr.x[nu][a]);
      const double e = tr.eta[nu - 1][i];
      S.add(r, U.px(nu, a), hl * e);
      S.lam[r] -= hl * e * data[nu - 1].rg.vx[a];
    }
    const long r = S.row();
    S.add(r, U.pb(nu, i), 1.0);
    S.add(r, U.eta_end[i], -1.0);
    S.add(r, U.gamma[nu - 1][i], -hl);
  }

  for (int j = 0; j < nu; ++j) {
    for (int i = 0; i < m; ++i) {
      const auto& ca = U.ca[j][i];
      for (int a = 0; a < n; ++a) {
        const long r = S.row();
        S.add(r, U.pa(j + 1, i, a), 1.0);
        S.lam[r] -= data[j].rg.va(i, a);
        for (int g = 0; g < ca.G.cols(); ++g) S.add(r, ca.first + g, -ca.G(a, g));
      }
      const auto& cb = U.cb[j][i];
      const long r = S.row();
      S.add(r, U.pb(j + 1, i), 1.0);
      S.lam[r] -= data[j].rg.vb[i];
      for (int g = 0; g < cb.G.cols(); ++g) S.add(r, cb.first + g, -cb.G(0, g));
    }
    // control rows divided by h; the generator weights absorb the factor
    const auto& cu = U.cu[j];
    for (int q = 0; q < d; ++q) {
      const long r = S.row();
      for (int b = 0; b < n; ++b) {
        S.add(r, U.px(j + 1, b), Hu(b, q));
        S.lam[r] -= Hu(b, q) * data[j].rg.vx[b];
      }
      S.lam[r] -= data[j].rg.wu[q];
      for (int g = 0; g < cu.G.cols(); ++g) S.add(r, cu.first + g, -cu.G(q, g));
    }
    for (int i = 0; i < m; ++i) {
      if (tr.eta[j][i] <= tol.comp) continue;
      const long r = S.row();
      for (int a = 0; a < n; ++a) {
        S.add(r, U.px(j + 1, a), c.a[j + 1](i, a));
        S.lam[r] -= c.a[j + 1](i, a) * data[j].rg.vx[a];
      }
    }
  }

  B.A.resize(S.rows, U.count);
  B.A.setFromTriplets(S.trip.begin(), S.trip.end());
  B.lam = Eigen::Map<Vec>(S.lam.data(), S.rows);
  return B;
}

Sparse select_columns(const Sparse& A, const std::vector<long>& keep) {
  Sparse Ssel(A.cols(), keep.size());
  std::vector<Triplet> t;
  for (size_t k = 0; k < keep.size(); ++k) t.emplace_back(keep[k], k, 1.0);
  Ssel.setFromTriplets(t.begin(), t.end());
  return A * Ssel;
}

Vec solve_ridge(const Sparse& A, const Vec& rhs) {
  Sparse N = A.transpose() * A;
  double dmax = 1.0;
  for (int k = 0; k < N.outerSize(); ++k) dmax = std::max(dmax, N.coeff(k, k));
  Sparse I(N.rows(), N.cols());
  I.setIdentity();
  N += (1e-12 * dmax) * I;
  Eigen::SimplicialLDLT<Sparse> ldlt(N);
  if (ldlt.info() != Eigen::Success) throw Error(Errc::NoCertificate, "normal equations failed");
  return ldlt.solve(A.transpose() * rhs);
}

// min |A z - rhs| with the sign pattern, by a clamp/release active-set loop.
Vec signed_least_squares(const Sparse& A, const Vec& rhs, const std::vector<int>& sign) {
  const long nv = A.cols();
  std::vector<bool> fixed(nv, false);
  Vec z = Vec::Zero(nv);
  for (int outer = 0; outer < 40; ++outer) {
    std::vector<long> keep;
    for (long k = 0; k < nv; ++k)
      if (!fixed[k]) keep.push_back(k);
    Vec zr = keep.empty() ? Vec() : solve_ridge(select_columns(A, keep), rhs);
    bool clamped = false;
    for (size_t k = 0; k < keep.size(); ++k) {
      const long v = keep[k];
      if (sign[v] * zr[k] < 0.0) {
        fixed[v] = true;
        clamped = true;
      }
    }
    z.setZero();
    for (size_t k = 0; k < keep.size(); ++k) z[keep[k]] = fixed[keep[k]] ? 0.0 : zr[k];
    if (clamped) continue;
    // release fixed variables whose gradient points into the allowed side
    Vec grad = A.transpose() * (A * z - rhs);
    bool released = false;
    for (long k = 0; k < nv; ++k) {
      if (fixed[k] && -sign[k] * grad[k] > 1e-12 * std::max(1.0, rhs.norm())) {
        fixed[k] = false;
        released = true;
      }
    }
    if (!released) break;
  }
  return z;
}

// Unit-norm z minimizing |A z| with the sign pattern, by inverse iteration.
Vec smallest_signed_vector(const Sparse& A, const std::vector<int>& sign) {
  const long nv = A.cols();
  std::vector<bool> fixed(nv, false);
  Vec z = Vec::Zero(nv);
  for (int outer = 0; outer < 10; ++outer) {
    std::vector<long> keep;
    for (long k = 0; k < nv; ++k)
      if (!fixed[k]) keep.push_back(k);
    if (keep.empty()) break;
    Sparse Ar = select_columns(A, keep);
    Vec scale(Ar.cols());
    for (long k = 0; k < Ar.cols(); ++k) {
      const double s = Ar.col(k).norm();
      scale[k] = s > 0.0 ? 1.0 / s : 1.0;
    }
    Ar = Ar * scale.asDiagonal();
    Sparse N = Ar.transpose() * Ar;
    Sparse I(N.rows(), N.cols());
    I.setIdentity();
    N += 1e-13 * I;
    Eigen::SimplicialLDLT<Sparse> ldlt(N);
    if (ldlt.info() != Eigen::Success) throw Error(Errc::NoCertificate, "inverse iteration failed");
    Vec v(Ar.cols());
    for (long k = 0; k < v.size(); ++k) v[k] = 1.0 + 0.5 * std::sin(1.0 + k);
    v.normalize();
    for (int it = 0; it < 60; ++it) {
      Vec w = ldlt.solve(v);
      w.normalize();
      const double change = std::min((w - v).norm(), (w + v).norm());
      v = w;
      if (change < 1e-14) break;
    }
    v = scale.asDiagonal() * v;
    double orient = 0.0;
    for (size_t k = 0; k < keep.size(); ++k) orient += sign[keep[k]] * v[k];
    if (orient < 0.0) v = -v;
    bool clamped = false;
    z.setZero();
    for (size_t k = 0; k < keep.size(); ++k) {
      if (sign[keep[k]] * v[k] < 0.0) {
        fixed[keep[k]] = true;
        clamped = true;
      } else {
        z[keep[k]] = v[k];
      }
    }
    if (!clamped) break;
  }
  return z;
}

OptimalityCertificate decode(const DiscreteProblem& dp, const ControlPath& c,
                             const SweepTrajectory& tr, const Unknowns& U, const Vec& z,
                             double lambda, const std::vector<bool>& exact) {
  const SweepingProblem& P = dp.problem;
  const int n = P.n, m = P.m, nu = U.nu;
  OptimalityCertificate cert = zero_certificate(dp, tr);
  cert.exact_norm = exact;
  cert.lambda = lambda;
  for (int k = 0; k <= nu; ++k) {
    for (int a = 0; a < n; ++a) cert.px[k][a] = z[U.px(k, a)];
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < n; ++a) cert.pa[k](i, a) = z[U.pa(k, i, a)];
      cert.pb[k][i] = z[U.pb(k, i)];
      if (U.band[k][i] >= 0) cert.band[k][i] = z[U.band[k][i]];
    }
  }
  for (int j = 0; j < nu; ++j)
    for (int i = 0; i < m; ++i)
      if (U.gamma[j][i] >= 0) cert.gamma[j][i] = z[U.gamma[j][i]];
  for (int i = 0; i < m; ++i)
    if (U.eta_end[i] >= 0) cert.eta_end[i] = z[U.eta_end[i]];
  for (int j = 0; j < nu; ++j) {
    const double h = dp.mesh.h(j);
    const auto& cu = U.cu[j];
    for (int g = 0; g < cu.G.cols(); ++g) cert.psi_u[j] += h * z[cu.first + g] * cu.G.col(g);
  }
  // The rate normals are defined by the link to p^a, p^b, so any misfit shows
  // up as distance to the rate-set normal cones rather than in the link.
  const auto data = interval_data(P, c);
  for (int j = 0; j < nu; ++j) {
    cert.psi_a[j] = cert.pa[j + 1] - lambda * data[j].rg.va;
    cert.psi_b[j] = cert.pb[j + 1] - lambda * data[j].rg.vb;
  }
  return cert;
}

FitResult fit_mode(const DiscreteProblem& dp, const ControlPath& c, const SweepTrajectory& tr,
                   bool normal) {
  const std::vector<bool> exact = exact_norm_facets(dp.problem, c);
  Built B = build_system(dp, c, tr, exact);
  Vec z = normal ? signed_least_squares(B.A, -B.lam, B.u.sign)
                 : smallest_signed_vector(B.A, B.u.sign);
  FitResult out;
  out.cert = decode(dp, c, tr, B.u, z, normal ? 1.0 : 0.0, exact);
  const double s = out.cert.normalization();
  if (s > 0.0) out.cert.scale(1.0 / s);
  out.report = residuals(dp, c, tr, out.cert);
  return out;
}

}  // namespace

FitResult fit_and_check(const DiscreteProblem& dp, const ControlPath& c,
                        const SweepTrajectory& traj, LambdaMode mode) {
  if (c.mesh.nu() != dp.mesh.nu() || traj.mesh.nu() != dp.mesh.nu())
    throw Error(Errc::InvalidInput, "candidate mesh does not match the discrete problem");
  if (mode == LambdaMode::Normal) return fit_mode(dp, c, traj, true);
  if (mode == LambdaMode::Abnormal) return fit_mode(dp, c, traj, false);
  FitResult nr = fit_mode(dp, c, traj, true);
  if (nr.report.passed()) return nr;
  FitResult ab = fit_mode(dp, c, traj, false);
  if (ab.report.passed()) return ab;
  return ab.report.max() < nr.report.max() ? ab : nr;
}

OptimalityCertificate fit_certificate(const DiscreteProblem& dp, const ControlPath& c,
                                      const SweepTrajectory& traj, LambdaMode mode) {
  FitResult r = fit_and_check(dp, c, traj, mode);
  if (!r.report.passed()) {
    std::string groups;
    for (const auto& g : r.report.failing()) groups += (groups.empty() ? "" : ", ") + g;
    throw Error(Errc::NoCertificate, "residuals above tolerance in: " + groups);
  }
  return r.cert;
}

json certificate_to_json(const OptimalityCertificate& cert) {
  json j;
  j["lambda"] = cert.lambda;
  auto vecs = [](const std::vector<Vec>& v) {
    json a = json::array();
    for (const Vec& x : v) a.push_back(to_json(x));
    return a;
  };
  auto mats = [](const std::vector<Mat>& v) {
    json a = json::array();
    for (const Mat& x : v) a.push_back(to_json(x));
    return a;
  };
  j["px"] = vecs(cert.px);
  j["pa"] = mats(cert.pa);
  j["pb"] = vecs(cert.pb);
  j["gamma"] = vecs(cert.gamma);
  j["eta_end"] = to_json(cert.eta_end);
  j["band"] = vecs(cert.band);
  j["psi_u"] = vecs(cert.psi_u);
  j["psi_a"] = mats(cert.psi_a);
  j["psi_b"] = vecs(cert.psi_b);
  j["normalization"] = cert.normalization();
  return j;
}

}  // namespace sweep
