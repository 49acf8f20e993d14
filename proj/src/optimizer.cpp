#include "sweep/optimizer.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sweep {

namespace {

void param_box(const ConstraintSet& s, Vec* lo, Vec* hi) { s.bounds(lo, hi); }

// First crossing of the contact facet under the given controls.
std::optional<double> contact_time(const SweepingProblem& P, const ControlPath& c, int facet) {
  CatchUpOptions o;
  o.validate = false;
  SweepTrajectory tr = catch_up(P, c, o);
  return hitting_time(tr, facet, P.tol.active);
}

double ramp(double t, double ts, double r0, double r1) {
  return r0 * std::min(t, ts) + r1 * std::max(t - ts, 0.0);
}

}  // namespace

Parameterization piecewise_constant_u(const SweepingProblem& P, int segments) {
  if (segments < 1) throw Error(Errc::InvalidInput, "need at least one segment");
  if (P.d == 0) throw Error(Errc::InvalidInput, "problem has no u-controls");
  Parameterization pz;
  pz.kind = "piecewise_constant_u";
  Vec ulo, uhi;
  param_box(P.U, &ulo, &uhi);
  const int d = P.d;
  pz.lo.resize(segments * d);
  pz.hi.resize(segments * d);
  for (int s = 0; s < segments; ++s) {
    pz.lo.segment(s * d, d) = ulo;
    pz.hi.segment(s * d, d) = uhi;
    for (int k = 0; k < d; ++k)
      pz.names.push_back("u" + std::to_string(k + 1) + (segments > 1 ? "_" + std::to_string(s) : ""));
  }
  SweepingProblem prob = P;
  pz.decode = [prob, segments, d](const Mesh& mesh, const Vec& p) {
    Decoded out;
    out.path = constant_controls(prob, mesh, Vec::Zero(d));
    for (int j = 0; j < mesh.nu(); ++j) {
      const double mid = 0.5 * (mesh.t[j] + mesh.t[j + 1]);
      const int s = std::min(segments - 1, static_cast<int>(segments * mid / mesh.T));
      out.path.u[j] = prob.U.project(p.segment(s * d, d));
    }
    return out;
  };
  return pz;
}

Parameterization constant_rate_b(const SweepingProblem& P, int facet) {
  if (facet < 0 || facet >= P.m) throw Error(Errc::InvalidInput, "facet index out of range");
  Parameterization pz;
  pz.kind = "constant_rate_b";
  param_box(P.B[facet], &pz.lo, &pz.hi);
  pz.names = {"bdot"};
  SweepingProblem prob = P;
  pz.decode = [prob, facet](const Mesh& mesh, const Vec& p) {
    Decoded out;
    Vec u0 = prob.d ? prob.U.project(Vec::Zero(prob.d)) : Vec(0);
    out.path = constant_controls(prob, mesh, u0);
    const double r = prob.B[facet].project(p)[0];
    for (int j = 0; j <= mesh.nu(); ++j) out.path.b[j][facet] = prob.b0[facet] + r * mesh.t[j];
    return out;
  };
  return pz;
}

Parameterization two_phase_rate_b(const SweepingProblem& P, int facet, int contact_facet) {
  if (facet < 0 || facet >= P.m || contact_facet < 0 || contact_facet >= P.m)
    throw Error(Errc::InvalidInput, "facet index out of range");
  Parameterization pz;
  pz.kind = "two_phase_rate_b";
  Vec lo1, hi1;
  param_box(P.B[facet], &lo1, &hi1);
  pz.lo = Vec(2);
  pz.hi = Vec(2);
  pz.lo << lo1[0], lo1[0];
  pz.hi << hi1[0], hi1[0];
  pz.names = {"bdot0", "bdot1"};
  SweepingProblem prob = P;
  pz.decode = [prob, facet, contact_facet](const Mesh& mesh, const Vec& p) {
    Decoded out;
    Vec u0 = prob.d ? prob.U.project(Vec::Zero(prob.d)) : Vec(0);
    const double r0 = prob.B[facet].project(p.segment(0, 1))[0];
    const double r1 = prob.B[facet].project(p.segment(1, 1))[0];
    ControlPath c = constant_controls(prob, mesh, u0);
    for (int j = 0; j <= mesh.nu(); ++j) c.b[j][facet] = prob.b0[facet] + r0 * mesh.t[j];
    std::optional<double> ts = contact_time(prob, c, contact_facet);
    const double s = ts.value_or(mesh.T);
    for (int j = 0; j <= mesh.nu(); ++j)
      c.b[j][facet] = prob.b0[facet] + ramp(mesh.t[j], s, r0, r1);
    out.path = std::move(c);
    out.switch_time = ts;
    return out;
  };
  return pz;
}

Parameterization two_phase_angle(const SweepingProblem& P, int facet, double theta0,
                                 int contact_facet) {
  if (P.n != 2) throw Error(Errc::InvalidInput, "angle parameterization needs n = 2");
  if (facet < 0 || facet >= P.m || contact_facet < 0 || contact_facet >= P.m)
    throw Error(Errc::InvalidInput, "facet index out of range");
  const ConstraintSet& A = P.A[facet];
  double rmax = 0.0;
  if (A.kind() == ConstraintSet::Kind::Ball) {
    rmax = A.radius() - A.center().norm();
  } else {
    Vec lo, hi;
    A.bounds(&lo, &hi);
    rmax = std::min(-lo.maxCoeff(), hi.minCoeff());
  }
  if (rmax < 0.0) throw Error(Errc::InvalidInput, "rate set does not contain a centred disc");
  Parameterization pz;
  pz.kind = "two_phase_angle";
  pz.lo = Vec::Constant(2, -rmax);
  pz.hi = Vec::Constant(2, rmax);
  pz.names = {"thetadot0", "thetadot1"};
  SweepingProblem prob = P;
  pz.decode = [prob, facet, theta0, contact_facet, rmax](const Mesh& mesh, const Vec& p) {
    Decoded out;
    Vec u0 = prob.d ? prob.U.project(Vec::Zero(prob.d)) : Vec(0);
    const double r0 = std::clamp(p[0], -rmax, rmax);
    const double r1 = std::clamp(p[1], -rmax, rmax);
    ControlPath c = constant_controls(prob, mesh, u0);
    auto set_angles = [&](double s) {
      for (int j = 0; j <= mesh.nu(); ++j) {
        const double th = theta0 + ramp(mesh.t[j], s, r0, r1);
        c.a[j](facet, 0) = std::cos(th);
        c.a[j](facet, 1) = std::sin(th);
      }
    };
    set_angles(mesh.T);
    std::optional<double> ts = contact_time(prob, c, contact_facet);
    set_angles(ts.value_or(mesh.T));
    out.path = std::move(c);
    out.switch_time = ts;
    return out;
  };
  return pz;
}

GridResult grid_refine(const Objective& f, const Vec& lo0, const Vec& hi0, int levels,
                       int points_per_axis) {
  const int k = static_cast<int>(lo0.size());
  if (k == 0 || k > 4) throw Error(Errc::InvalidInput, "grid search supports 1 to 4 parameters");
  if (levels < 1 || points_per_axis < 2) throw Error(Errc::InvalidInput, "bad grid settings");
  GridResult res;
  res.min = std::numeric_limits<double>::infinity();
  Vec lo = lo0, hi = hi0;
  for (int level = 0; level < levels; ++level) {
    std::vector<int> idx(k, 0);
    bool done = false;
    while (!done) {
      Vec p(k);
      for (int a = 0; a < k; ++a) {
        const double w = hi[a] - lo[a];
        p[a] = w > 0.0 ? lo[a] + w * idx[a] / (points_per_axis - 1) : lo[a];
      }
      const double v = f(p);
      ++res.evaluations;
      // lexicographic visiting order + strict improvement gives the tie-break
      if (v < res.min) {
        res.min = v;
        res.argmin = p;
      }
      int a = k - 1;
      while (a >= 0) {
        const int top = hi[a] > lo[a] ? points_per_axis : 1;
        if (++idx[a] < top) break;
        idx[a] = 0;
        --a;
      }
      done = a < 0;
    }
    for (int a = 0; a < k; ++a) {
      const double w = (hi[a] - lo[a]) / points_per_axis;
      double nl = res.argmin[a] - 0.5 * w, nh = res.argmin[a] + 0.5 * w;
      if (nl < lo0[a]) {
        nh += lo0[a] - nl;
        nl = lo0[a];
      }
      if (nh > hi0[a]) {
        nl -= nh - hi0[a];
        nh = hi0[a];
      }
      lo[a] = std::max(nl, lo0[a]);
      hi[a] = std::min(nh, hi0[a]);
    }
  }
  return res;
}

Vec fd_gradient(const Objective& f, const Vec& p, const Vec& lo, const Vec& hi, double fd_h,
                int* evaluations) {
  const int k = static_cast<int>(p.size());
  Vec g(k);
  for (int a = 0; a < k; ++a) {
    const double h = fd_h * (1.0 + std::abs(p[a]));
    Vec pp = p, pm = p;
    pp[a] = std::min(p[a] + h, hi[a]);
    pm[a] = std::max(p[a] - h, lo[a]);
    const double den = pp[a] - pm[a];
    if (den <= 0.0) {
      g[a] = 0.0;
      continue;
    }
    g[a] = (f(pp) - f(pm)) / den;
    if (evaluations) *evaluations += 2;
  }
  return g;
}

DescentResult projected_descent(const Objective& f, const Vec& start, const Vec& lo, const Vec& hi,
                                const SolveOptions& opts) {
  auto clamp = [&](const Vec& p) -> Vec { return p.cwiseMax(lo).cwiseMin(hi); };
  DescentResult r;
  r.p = clamp(start);
  r.f = f(r.p);
  ++r.evaluations;
  r.trail.push_back(r.p);
  r.costs.push_back(r.f);
  double step = 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Vec g = fd_gradient(f, r.p, lo, hi, opts.fd_h, &r.evaluations);
    Vec gm = r.p - clamp(r.p - g);
    r.iterations = it + 1;
    if (gm.norm() <= opts.g_tol) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-14) {
      Vec q = clamp(r.p - step * g);
      const double d2 = (q - r.p).squaredNorm();
      if (d2 == 0.0) break;
      const double fq = f(q);
      ++r.evaluations;
      if (fq <= r.f - 1e-4 * d2 / step) {
        r.p = q;
        r.f = fq;
        accepted = true;
        step = std::min(step * 2.0, 1e6);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled, typically at a kink
    r.trail.push_back(r.p);
    r.costs.push_back(r.f);
  }
  return r;
}

namespace {

struct PolishCtx {
  const Objective* f;
  const Vec* lo;
  const Vec* hi;
  int evals = 0;
};

double polish_eval(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<PolishCtx*>(params);
  Vec p(v->size);
  for (size_t a = 0; a < v->size; ++a) p[a] = gsl_vector_get(v, a);
  p = p.cwiseMax(*ctx->lo).cwiseMin(*ctx->hi);
  ++ctx->evals;
  return (*ctx->f)(p);
}

}  // namespace

DescentResult simplex_polish(const Objective& f, const Vec& start, const Vec& lo, const Vec& hi,
                             double step, int max_iter) {
  const size_t k = start.size();
  PolishCtx ctx{&f, &lo, &hi};
  DescentResult r;
  r.p = start.cwiseMax(lo).cwiseMin(hi);
  r.f = f(r.p);
  ++r.evaluations;
  // a restart from the incumbent recovers from simplex collapse
  for (int round = 0; round < 3; ++round) {
    gsl_multimin_function fn{&polish_eval, k, &ctx};
    gsl_vector* x = gsl_vector_alloc(k);
    gsl_vector* ss = gsl_vector_alloc(k);
    for (size_t a = 0; a < k; ++a) {
      gsl_vector_set(x, a, r.p[a]);
      gsl_vector_set(ss, a, step);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, k);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    int it = 0;
    for (; it < max_iter; ++it) {
      if (gsl_multimin_fminimizer_iterate(s)) break;
      if (gsl_multimin_fminimizer_size(s) < 1e-14) break;
    }
    r.iterations += it;
    Vec best(k);
    for (size_t a = 0; a < k; ++a) best[a] = gsl_vector_get(s->x, a);
    best = best.cwiseMax(lo).cwiseMin(hi);
    const double fb = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(x);
    gsl_vector_free(ss);
    if (fb < r.f) {
      const bool moved = (best - r.p).norm() > 1e-15;
      r.p = best;
      r.f = fb;
      r.trail.push_back(r.p);
      r.costs.push_back(r.f);
      if (!moved) break;
    } else {
      break;
    }
    step = std::max(step * 1e-2, 1e-9);
  }
  r.evaluations += ctx.evals;
  r.converged = true;
  return r;
}

SolveResult solve(const SweepingProblem& P, const Parameterization& param, const Mesh& mesh,
                  const SolveOptions& opts) {
  int evals = 0;
  Objective f = [&](const Vec& p) {
    ++evals;
    Decoded dec = param.decode(mesh, param.clamp(p));
    CatchUpOptions o;
    o.validate = false;
    SweepTrajectory tr = catch_up(P, dec.path, o);
    return cost(P, dec.path, tr);
  };
  SolveResult res;
  std::vector<Vec> starts;
  const int k = param.dim();
  if (opts.levels > 0 && k <= 4) {
    GridResult g = grid_refine(f, param.lo, param.hi, opts.levels, opts.points_per_axis);
    starts.push_back(g.argmin);
    res.param_trail.push_back(g.argmin);
    res.cost_trail.push_back(g.min);
  } else {
    starts.push_back(0.5 * (param.lo + param.hi));
    for (long mask = 0; mask < (1L << std::min(k, 20)) &&
                        static_cast<int>(starts.size()) < std::max(1, opts.seeds);
         ++mask) {
      Vec c(k);
      for (int a = 0; a < k; ++a) c[a] = (mask >> a) & 1 ? param.hi[a] : param.lo[a];
      starts.push_back(c);
    }
  }
  DescentResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const Vec& s : starts) {
    DescentResult d = projected_descent(f, s, param.lo, param.hi, opts);
    res.iterations += d.iterations;
    if (d.f < best.f) best = d;
  }
  for (size_t t = 0; t < best.trail.size(); ++t) {
    if (!res.cost_trail.empty() && best.costs[t] > res.cost_trail.back()) continue;
    res.param_trail.push_back(best.trail[t]);
    res.cost_trail.push_back(best.costs[t]);
  }
  res.converged = best.converged;
  if (opts.polish) {
    const double width = (param.hi - param.lo).maxCoeff();
    const double step = std::max(1e-3 * width, 10.0 * opts.fd_h);
    DescentResult pol = simplex_polish(f, best.p, param.lo, param.hi, step);
    res.iterations += pol.iterations;
    if (pol.f < best.f) {
      best.p = pol.p;
      best.f = pol.f;
      res.param_trail.push_back(pol.p);
      res.cost_trail.push_back(pol.f);
    }
  }
  res.params = param.clamp(best.p);
  Decoded dec = param.decode(mesh, res.params);
  res.controls = dec.path;
  res.switch_time = dec.switch_time;
  res.traj = catch_up(P, res.controls);
  res.cost = cost(P, res.controls, res.traj);
  res.evaluations = evals;
  return res;
}

}  // namespace sweep
