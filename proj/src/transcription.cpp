#include "sweep/transcription.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

DiscreteProblem assemble(const SweepingProblem& P, const Mesh& mesh, const Reference* ref,
                         double epsilon) {
  if (mesh.nu() < 2) throw Error(Errc::BadMesh, "need at least two intervals");
  mesh.validate();
  DiscreteProblem dp;
  dp.problem = P;
  dp.mesh = mesh;
  dp.epsilon = epsilon;
  dp.band_eps = band_epsilon(mesh.nu());
  Layout& L = dp.layout;
  L.n = P.n;
  L.m = P.m;
  L.d = P.d;
  L.nu = mesh.nu();
  const long nodes = L.nu + 1;
  L.x_off = 0;
  L.a_off = nodes * L.n;
  L.b_off = L.a_off + nodes * L.m * L.n;
  L.u_off = L.b_off + nodes * L.m;
  L.size = L.u_off + static_cast<long>(L.nu) * L.d;
  if (ref) {
    if (ref->controls.mesh.nu() != L.nu)
      throw Error(Errc::InvalidInput, "reference lives on a different mesh");
    dp.reference = *ref;
  }
  auto& cc = dp.constraint_counts;
  cc["dynamics"] = L.nu;
  cc["endpoint"] = L.m;
  cc["initial"] = L.n + L.m * L.n + L.m + (ref ? L.d : 0);
  cc["control_set"] = L.nu;
  cc["rate_a"] = static_cast<long>(L.nu) * L.m;
  cc["rate_b"] = static_cast<long>(L.nu) * L.m;
  cc["a_band"] = nodes * L.m;
  cc["proximity"] = ref ? 2 : 0;
  return dp;
}

DiscreteProblem assemble(const SweepingProblem& P, int nu, const Reference* ref, double epsilon) {
  if (nu < 2) throw Error(Errc::BadMesh, "need at least two intervals");
  return assemble(P, Mesh::uniform(P.T, nu), ref, epsilon);
}

json DiscreteProblem::summary() const {
  const Layout& L = layout;
  json j;
  j["name"] = problem.name;
  j["dimensions"] = {{"n", L.n}, {"m", L.m}, {"d", L.d}, {"nu", L.nu}};
  j["T"] = mesh.T;
  j["max_step"] = mesh.max_step();
  j["layout"] = {{"size", L.size},  {"x_offset", L.x_off}, {"a_offset", L.a_off},
                 {"b_offset", L.b_off}, {"u_offset", L.u_off}};
  j["constraints"] = constraint_counts;
  j["band_epsilon"] = band_eps;
  j["proximity"] = {{"reference", reference.has_value()}, {"epsilon", epsilon}};
  return j;
}

Vec pack(const DiscreteProblem& dp, const ControlPath& c, const SweepTrajectory& tr) {
  const Layout& L = dp.layout;
  if (c.mesh.nu() != L.nu || tr.mesh.nu() != L.nu)
    throw Error(Errc::InvalidInput, "candidate mesh does not match the layout");
  Vec z(L.size);
  for (int j = 0; j <= L.nu; ++j) {
    z.segment(L.x(j), L.n) = tr.x[j];
    for (int i = 0; i < L.m; ++i) {
      z.segment(L.a(j, i), L.n) = c.a[j].row(i).transpose();
      z[L.b(j, i)] = c.b[j][i];
    }
  }
  for (int j = 0; j < L.nu; ++j) z.segment(L.u(j), L.d) = c.u[j];
  return z;
}

void unpack(const DiscreteProblem& dp, const Vec& z, ControlPath* c, std::vector<Vec>* x) {
  const Layout& L = dp.layout;
  if (z.size() != L.size) throw Error(Errc::InvalidInput, "decision vector has wrong size");
  c->mesh = dp.mesh;
  c->u.assign(L.nu, Vec(L.d));
  c->a.assign(L.nu + 1, Mat(L.m, L.n));
  c->b.assign(L.nu + 1, Vec(L.m));
  x->assign(L.nu + 1, Vec(L.n));
  for (int j = 0; j <= L.nu; ++j) {
    (*x)[j] = z.segment(L.x(j), L.n);
    for (int i = 0; i < L.m; ++i) {
      c->a[j].row(i) = z.segment(L.a(j, i), L.n).transpose();
      c->b[j][i] = z[L.b(j, i)];
    }
  }
  for (int j = 0; j < L.nu; ++j) c->u[j] = z.segment(L.u(j), L.d);
}

double FeasibilityReport::max() const {
  double v = 0.0;
  for (const auto& [k, r] : groups) v = std::max(v, r);
  return v;
}

json FeasibilityReport::to_json() const { return groups; }

namespace {

// sum_j h_j |node_j - ref_j|^2 and sum_j h_j |rate_j - ref rate_j|^2
void proximity_sums(const DiscreteProblem& dp, const ControlPath& c, const std::vector<Vec>& x,
                    double* kappa, double* velo) {
  *kappa = 0.0;
  *velo = 0.0;
  if (!dp.reference) return;
  const ControlPath& rc = dp.reference->controls;
  const std::vector<Vec>& rx = dp.reference->traj.x;
  const int m = dp.layout.m;
  for (int j = 0; j < dp.layout.nu; ++j) {
    const double h = dp.mesh.h(j);
    double node = (x[j] - rx[j]).squaredNorm() + (c.a[j] - rc.a[j]).squaredNorm() +
                  (c.b[j] - rc.b[j]).squaredNorm() + (c.u[j] - rc.u[j]).squaredNorm();
    double rate = ((x[j + 1] - x[j]) - (rx[j + 1] - rx[j])).squaredNorm() / (h * h) +
                  (c.u[j] - rc.u[j]).squaredNorm();
    for (int i = 0; i < m; ++i) {
      rate += (c.alpha(i, j) - rc.alpha(i, j)).squaredNorm();
      const double db = c.beta(i, j) - rc.beta(i, j);
      rate += db * db;
    }
    *kappa += h * node;
    *velo += h * rate;
  }
}

}  // namespace

FeasibilityReport feasibility_residual(const DiscreteProblem& dp, const Vec& z) {
  const SweepingProblem& P = dp.problem;
  const Layout& L = dp.layout;
  ControlPath c;
  std::vector<Vec> x;
  unpack(dp, z, &c, &x);
  FeasibilityReport rep;
  double dyn = 0.0, ctl = 0.0, ra = 0.0, rb = 0.0, band = 0.0, endp = 0.0;
  for (int j = 0; j < L.nu; ++j) {
    const double h = dp.mesh.h(j);
    Vec w = -(x[j + 1] - x[j]) / h + P.g(x[j], c.u[j]);
    Polyhedron C = Polyhedron::unchecked(c.a[j + 1], c.b[j + 1]);
    Vec s = C.slacks(x[j + 1]);
    const double viol = L.m ? std::max(0.0, s.maxCoeff()) : 0.0;
    dyn = std::max({dyn, viol, cone_fit(C, x[j + 1], w, P.tol.active).residual});
    ctl = std::max(ctl, P.U.distance(c.u[j]));
    for (int i = 0; i < L.m; ++i) {
      ra = std::max(ra, P.A[i].distance(c.alpha(i, j)));
      Vec bb = Vec::Constant(1, c.beta(i, j));
      rb = std::max(rb, P.B[i].distance(bb));
    }
  }
  for (int j = 0; j <= L.nu; ++j)
    for (int i = 0; i < L.m; ++i)
      band = std::max(band, std::abs(c.a[j].row(i).norm() - 1.0) - dp.band_eps);
  if (L.m) endp = std::max(0.0, (c.a[L.nu] * x[L.nu] - c.b[L.nu]).maxCoeff());
  double init = (x[0] - P.x0).cwiseAbs().maxCoeff();
  if (L.m) {
    init = std::max(init, (c.a[0] - P.a0).cwiseAbs().maxCoeff());
    init = std::max(init, (c.b[0] - P.b0).cwiseAbs().maxCoeff());
  }
  if (dp.reference && L.d) init = std::max(init, (c.u[0] - dp.reference->controls.u[0]).cwiseAbs().maxCoeff());
  double kappa, velo;
  proximity_sums(dp, c, x, &kappa, &velo);
  rep.groups["dynamics"] = dyn;
  rep.groups["initial"] = init;
  rep.groups["endpoint"] = endp;
  rep.groups["control_set"] = ctl;
  rep.groups["rate_a"] = ra;
  rep.groups["rate_b"] = rb;
  rep.groups["a_band"] = std::max(0.0, band);
  rep.groups["proximity_state"] = std::max(0.0, kappa - dp.epsilon / 2);
  rep.groups["proximity_velocity"] = std::max(0.0, velo - dp.epsilon / 2);
  return rep;
}

double discrete_cost(const DiscreteProblem& dp, const Vec& z) {
  const SweepingProblem& P = dp.problem;
  const Layout& L = dp.layout;
  ControlPath c;
  std::vector<Vec> x;
  unpack(dp, z, &c, &x);
  double J = P.cost.phi(x[L.nu]);
  Mat alpha(L.m, L.n);
  Vec beta(L.m);
  for (int j = 0; j < L.nu; ++j) {
    for (int i = 0; i < L.m; ++i) {
      alpha.row(i) = c.alpha(i, j).transpose();
      beta[i] = c.beta(i, j);
    }
    J += dp.mesh.h(j) * P.cost.running(c.u[j], alpha, beta);
  }
  double kappa, velo;
  proximity_sums(dp, c, x, &kappa, &velo);
  return J + 0.5 * velo;
}

}  // namespace sweep
