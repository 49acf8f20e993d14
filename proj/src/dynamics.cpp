#include "sweep/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

Mesh Mesh::uniform(double T, int nu) {
  if (nu < 1) throw Error(Errc::BadMesh, "need at least one interval");
  if (!(T > 0.0)) throw Error(Errc::BadMesh, "horizon must be positive");
  Mesh m;
  m.T = T;
  m.t.resize(nu + 1);
  for (int j = 0; j <= nu; ++j) m.t[j] = T * static_cast<double>(j) / nu;
  m.t[nu] = T;
  return m;
}

double Mesh::max_step() const {
  double hm = 0.0;
  for (int j = 0; j < nu(); ++j) hm = std::max(hm, h(j));
  return hm;
}

void Mesh::validate() const {
  if (t.size() < 2) throw Error(Errc::BadMesh, "mesh has no interval");
  if (t.front() != 0.0 || std::abs(t.back() - T) > 1e-14 * std::max(1.0, T))
    throw Error(Errc::BadMesh, "mesh must span [0, T]");
  for (int j = 0; j < nu(); ++j)
    if (!(h(j) > 0.0)) throw Error(Errc::BadMesh, "nonpositive step at " + std::to_string(j));
}

Vec Perturbation::operator()(const Vec& x, const Vec& u) const {
  Vec out = c;
  if (G.size()) out.noalias() += G * x;
  if (H.size() && u.size()) out.noalias() += H * u;
  return out;
}

double CostModel::phi(const Vec& x) const {
  double v = phi_lin.size() ? phi_lin.dot(x) : 0.0;
  if (phi_quad.size()) v += 0.5 * x.dot(phi_quad * x);
  return v;
}

Vec CostModel::grad_phi(const Vec& x) const {
  Vec g = phi_lin.size() ? phi_lin : Vec::Zero(x.size());
  if (phi_quad.size()) g += 0.5 * (phi_quad + phi_quad.transpose()) * x;
  return g;
}

double CostModel::running(const Vec& u, const Mat& alpha, const Vec& beta) const {
  double v = 0.0;
  if (R.size() && u.size()) v += 0.5 * u.dot(R * u);
  if (r.size() && u.size()) v += r.dot(u);
  for (int i = 0; i < wa.size(); ++i) v += 0.5 * wa[i] * alpha.row(i).squaredNorm();
  for (int i = 0; i < wb.size(); ++i) v += 0.5 * wb[i] * beta[i] * beta[i];
  return v;
}

RunningGrad CostModel::running_grad(const Vec& u, const Mat& alpha, const Vec& beta, int n) const {
  const int m = static_cast<int>(beta.size());
  RunningGrad g;
  g.wx = Vec::Zero(n);
  g.vx = Vec::Zero(n);
  g.wb = Vec::Zero(m);
  g.vb = Vec::Zero(m);
  g.wa = Mat::Zero(m, n);
  g.va = Mat::Zero(m, n);
  g.wu = Vec::Zero(u.size());
  if (R.size() && u.size()) g.wu += 0.5 * (R + R.transpose()) * u;
  if (r.size() && u.size()) g.wu += r;
  for (int i = 0; i < wa.size(); ++i) g.va.row(i) = wa[i] * alpha.row(i);
  for (int i = 0; i < wb.size(); ++i) g.vb[i] = wb[i] * beta[i];
  return g;
}

void SweepingProblem::validate() const {
  auto bad = [](const std::string& s) { throw Error(Errc::InvalidInput, s); };
  if (n <= 0) bad("state dimension must be positive");
  if (x0.size() != n) bad("x0 has wrong size");
  if (a0.rows() != m || a0.cols() != n) bad("facet normals have wrong shape");
  if (b0.size() != m) bad("facet offsets have wrong size");
  if (U.dim() != d) bad("U has wrong dimension");
  if (static_cast<int>(A.size()) != m || static_cast<int>(B.size()) != m)
    bad("need one rate set per facet");
  for (int i = 0; i < m; ++i) {
    if (A[i].dim() != n) bad("rate set for a has wrong dimension");
    if (B[i].dim() != 1) bad("rate set for b must be one dimensional");
  }
  if (g.c.size() != n) bad("perturbation offset has wrong size");
  if (g.G.size() && (g.G.rows() != n || g.G.cols() != n)) bad("perturbation G has wrong shape");
  if (g.H.size() && (g.H.rows() != n || g.H.cols() != d)) bad("perturbation H has wrong shape");
  for (int i = 0; i < m; ++i)
    if (std::abs(a0.row(i).norm() - 1.0) > tol.norm) bad("initial normal is not unit");
  Vec s = a0 * x0 - b0;
  if (m > 0 && s.maxCoeff() > tol.feas)
    throw Error(Errc::InfeasiblePoint, "x0 is outside C(a0, b0)");
  if (!is_nonempty(a0, b0)) throw Error(Errc::EmptyPolyhedron, "initial polyhedron is empty");
}

double band_epsilon(int nu) { return std::max(1e-9, 1.0 / (static_cast<double>(nu) * nu)); }

void validate_controls(const SweepingProblem& P, const ControlPath& c, double tol) {
  auto bad = [](const std::string& s) { throw Error(Errc::InvalidInput, s); };
  c.mesh.validate();
  const int nu = c.mesh.nu();
  if (static_cast<int>(c.u.size()) != nu) bad("u needs one value per interval");
  if (static_cast<int>(c.a.size()) != nu + 1 || static_cast<int>(c.b.size()) != nu + 1)
    bad("a and b need one value per node");
  const double eps = band_epsilon(nu);
  for (int j = 0; j < nu; ++j) {
    if (c.u[j].size() != P.d) bad("u has wrong size");
    if (!P.U.contains(c.u[j], tol)) bad("u outside U at interval " + std::to_string(j));
  }
  for (int j = 0; j <= nu; ++j) {
    if (c.a[j].rows() != P.m || c.a[j].cols() != P.n || c.b[j].size() != P.m)
      bad("a or b has wrong shape");
    for (int i = 0; i < P.m; ++i) {
      const double nr = c.a[j].row(i).norm();
      if (nr < 1.0 - eps - tol || nr > 1.0 + eps + tol)
        bad("normal leaves the norm band at node " + std::to_string(j));
    }
  }
  // rates are difference quotients; allow for rounding in the differencing
  const double rtol = std::max(tol, 1e-12 / c.mesh.max_step());
  for (int j = 0; j < nu; ++j) {
    for (int i = 0; i < P.m; ++i) {
      if (!P.A[i].contains(c.alpha(i, j), rtol))
        bad("a-rate outside its set at interval " + std::to_string(j));
      Vec bb(1);
      bb[0] = c.beta(i, j);
      if (!P.B[i].contains(bb, rtol)) bad("b-rate outside its set at interval " + std::to_string(j));
    }
  }
}

SweepTrajectory catch_up(const SweepingProblem& P, const ControlPath& c,
                         const CatchUpOptions& opts) {
  if (opts.validate) validate_controls(P, c);
  const int nu = c.mesh.nu();
  const Tolerances& tol = P.tol;
  SweepTrajectory tr;
  tr.mesh = c.mesh;
  tr.x.resize(nu + 1);
  tr.eta.resize(nu);
  tr.slack.resize(nu + 1);
  tr.cone_residual.assign(nu, 0.0);
  tr.x[0] = P.x0;
  tr.slack[0] = c.a[0] * P.x0 - c.b[0];
  if (P.m > 0 && tr.slack[0].maxCoeff() > tol.feas)
    throw Error(Errc::InfeasiblePoint, "x0 outside C at t = 0");

  for (int j = 0; j < nu; ++j) {
    const double h = c.mesh.h(j);
    Vec y = tr.x[j] + h * P.g(tr.x[j], c.u[j]);
    Polyhedron C = Polyhedron::unchecked(c.a[j + 1], c.b[j + 1]);
    Projection pr;
    try {
      pr = project(C, y);
    } catch (const Error& e) {
      if (!is_nonempty(c.a[j + 1], c.b[j + 1]))
        throw Error(Errc::EmptyPolyhedron, "C empty at node " + std::to_string(j + 1));
      throw Error(Errc::SimulationFailed, std::string(e.what()) + " at node " +
                                              std::to_string(j + 1));
    }
    tr.x[j + 1] = pr.x;
    Vec w = (y - pr.x) / h;
    if (w.squaredNorm() == 0.0) {
      tr.eta[j] = Vec::Zero(P.m);
    } else {
      ConeFit f = cone_fit(C, pr.x, w, tol.active);
      if (f.residual > tol.cone)
        throw Error(Errc::ConeResidual, "multiplier residual " + std::to_string(f.residual) +
                                            " at interval " + std::to_string(j));
      tr.eta[j] = f.eta;
      tr.cone_residual[j] = f.residual;
    }
    tr.slack[j + 1] = C.slacks(pr.x);
  }

  for (int i = 0; i < P.m; ++i) {
    for (int j = 0; j < nu; ++j) {
      const double s0 = tr.slack[j][i], s1 = tr.slack[j + 1][i];
      if (s0 < -tol.active && s1 >= -tol.active) {
        HitEvent ev;
        ev.facet = i;
        ev.interval = j;
        const double frac = (-tol.active - s0) / (s1 - s0);
        ev.time = c.mesh.t[j] + frac * c.mesh.h(j);
        tr.hits.push_back(ev);
      }
    }
  }
  std::sort(tr.hits.begin(), tr.hits.end(),
            [](const HitEvent& p, const HitEvent& q) { return p.time < q.time; });
  return tr;
}

std::optional<double> hitting_time(const SweepTrajectory& traj, int facet, double active_tol) {
  if (traj.slack.empty() || facet < 0 || facet >= traj.slack[0].size()) return std::nullopt;
  if (traj.slack[0][facet] >= -active_tol) return 0.0;
  for (int j = 0; j + 1 < static_cast<int>(traj.slack.size()); ++j) {
    const double s0 = traj.slack[j][facet], s1 = traj.slack[j + 1][facet];
    if (s0 < -active_tol && s1 >= -active_tol) {
      const double frac = (-active_tol - s0) / (s1 - s0);
      return traj.mesh.t[j] + frac * traj.mesh.h(j);
    }
  }
  return std::nullopt;
}

double cost(const SweepingProblem& P, const ControlPath& c, const SweepTrajectory& traj) {
  const int nu = c.mesh.nu();
  double J = P.cost.phi(traj.x[nu]);
  Mat alpha(P.m, P.n);
  Vec beta(P.m);
  for (int j = 0; j < nu; ++j) {
    for (int i = 0; i < P.m; ++i) {
      alpha.row(i) = c.alpha(i, j).transpose();
      beta[i] = c.beta(i, j);
    }
    J += c.mesh.h(j) * P.cost.running(c.u[j], alpha, beta);
  }
  return J;
}

ControlPath constant_controls(const SweepingProblem& P, const Mesh& mesh, const Vec& u) {
  ControlPath c;
  c.mesh = mesh;
  c.u.assign(mesh.nu(), u);
  c.a.assign(mesh.nu() + 1, P.a0);
  c.b.assign(mesh.nu() + 1, P.b0);
  return c;
}

}  // namespace sweep
