#include "sweep/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

namespace sweep {

json to_json(const Vec& v) {
  json j = json::array();
  for (int k = 0; k < v.size(); ++k) j.push_back(v[k]);
  return j;
}

json to_json(const Mat& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r) j.push_back(to_json(Vec(m.row(r).transpose())));
  return j;
}

Vec vec_from_json(const json& j) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  Vec v(j.size());
  for (size_t k = 0; k < j.size(); ++k) v[k] = j[k].get<double>();
  return v;
}

Mat mat_from_json(const json& j) {
  if (j.empty()) return Mat();
  const size_t rows = j.size(), cols = j[0].size();
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw Error(Errc::InvalidInput, "ragged matrix in JSON");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json set_to_json(const ConstraintSet& s) {
  switch (s.kind()) {
    case ConstraintSet::Kind::Box:
      return {{"type", "box"}, {"lo", to_json(s.lo())}, {"hi", to_json(s.hi())}};
    case ConstraintSet::Kind::Ball:
      return {{"type", "ball"}, {"center", to_json(s.center())}, {"radius", s.radius()}};
    case ConstraintSet::Kind::Halfspaces:
      return {{"type", "halfspaces"}, {"G", to_json(s.G())}, {"h", to_json(s.h())}};
  }
  return {};
}

ConstraintSet set_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "box") return ConstraintSet::box(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
  if (type == "ball")
    return ConstraintSet::ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
  if (type == "halfspaces")
    return ConstraintSet::halfspaces(mat_from_json(j.at("G")), vec_from_json(j.at("h")));
  if (type == "point") return ConstraintSet::point(vec_from_json(j.at("value")));
  throw Error(Errc::InvalidInput, "unknown set type '" + type + "'");
}

json problem_to_json(const SweepingProblem& P) {
  json j;
  j["name"] = P.name;
  j["n"] = P.n;
  j["m"] = P.m;
  j["d"] = P.d;
  j["T"] = P.T;
  j["x0"] = to_json(P.x0);
  j["facets"] = json::array();
  for (int i = 0; i < P.m; ++i) {
    j["facets"].push_back({{"a", to_json(Vec(P.a0.row(i).transpose()))},
                           {"b", P.b0[i]},
                           {"rate_a", set_to_json(P.A[i])},
                           {"rate_b", set_to_json(P.B[i])}});
  }
  j["U"] = set_to_json(P.U);
  j["g"] = {{"type", "affine"}, {"G", to_json(P.g.G)}, {"H", to_json(P.g.H)}, {"c", to_json(P.g.c)}};
  j["cost"]["terminal"] = {{"linear", to_json(P.cost.phi_lin)},
                           {"quadratic", to_json(P.cost.phi_quad)}};
  j["cost"]["running"] = {{"R", to_json(P.cost.R)},
                          {"r", to_json(P.cost.r)},
                          {"wa", to_json(P.cost.wa)},
                          {"wb", to_json(P.cost.wb)}};
  j["lipschitz_g"] = P.lipschitz_g;
  j["assumptions"] = P.assumptions;
  j["tolerances"] = {{"norm", P.tol.norm},     {"active", P.tol.active}, {"feas", P.tol.feas},
                     {"cone", P.tol.cone},     {"fit", P.tol.fit},       {"comp", P.tol.comp}};
  return j;
}

SweepingProblem problem_from_json(const json& j) {
  SweepingProblem P;
  P.name = j.value("name", std::string("problem"));
  P.T = j.value("T", 1.0);
  P.x0 = vec_from_json(j.at("x0"));
  P.n = static_cast<int>(P.x0.size());
  const json& facets = j.at("facets");
  P.m = static_cast<int>(facets.size());
  P.a0 = Mat(P.m, P.n);
  P.b0 = Vec(P.m);
  for (int i = 0; i < P.m; ++i) {
    const json& f = facets[i];
    P.a0.row(i) = vec_from_json(f.at("a")).transpose();
    P.b0[i] = f.at("b").get<double>();
    P.A.push_back(f.contains("rate_a") ? set_from_json(f["rate_a"])
                                       : ConstraintSet::point(Vec::Zero(P.n)));
    P.B.push_back(f.contains("rate_b") ? set_from_json(f["rate_b"])
                                       : ConstraintSet::point(Vec::Zero(1)));
  }
  if (j.contains("U")) {
    P.U = set_from_json(j["U"]);
    P.d = P.U.dim();
  } else {
    P.d = 0;
    P.U = ConstraintSet::box(Vec(0), Vec(0));
  }
  const json& g = j.at("g");
  const std::string gt = g.value("type", std::string("affine"));
  P.g.c = g.contains("c") ? vec_from_json(g["c"]) : Vec::Zero(P.n);
  if (gt == "affine") {
    if (g.contains("G")) P.g.G = mat_from_json(g["G"]);
    if (g.contains("H")) P.g.H = mat_from_json(g["H"]);
  } else if (gt != "constant") {
    throw Error(Errc::InvalidInput, "unknown perturbation type '" + gt + "'");
  }
  if (j.contains("cost")) {
    const json& c = j["cost"];
    if (c.contains("terminal")) {
      const json& t = c["terminal"];
      if (t.contains("linear")) P.cost.phi_lin = vec_from_json(t["linear"]);
      if (t.contains("quadratic")) P.cost.phi_quad = mat_from_json(t["quadratic"]);
    }
    if (c.contains("running")) {
      const json& r = c["running"];
      if (r.contains("R")) P.cost.R = mat_from_json(r["R"]);
      if (r.contains("r")) P.cost.r = vec_from_json(r["r"]);
      if (r.contains("wa")) P.cost.wa = vec_from_json(r["wa"]);
      if (r.contains("wb")) P.cost.wb = vec_from_json(r["wb"]);
    }
  }
  P.lipschitz_g = j.value("lipschitz_g", 0.0);
  if (P.lipschitz_g == 0.0 && P.g.G.size()) P.lipschitz_g = P.g.G.norm();
  if (j.contains("assumptions")) P.assumptions = j["assumptions"].get<std::map<std::string, bool>>();
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    P.tol.norm = t.value("norm", P.tol.norm);
    P.tol.active = t.value("active", P.tol.active);
    P.tol.feas = t.value("feas", P.tol.feas);
    P.tol.cone = t.value("cone", P.tol.cone);
    P.tol.fit = t.value("fit", P.tol.fit);
    P.tol.comp = t.value("comp", P.tol.comp);
  }
  P.validate();
  return P;
}

SweepingProblem load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

json mesh_to_json(const Mesh& m) {
  // uniform meshes are stored compactly
  const int nu = m.nu();
  bool uniform = true;
  for (int j = 0; j <= nu && uniform; ++j)
    uniform = std::abs(m.t[j] - m.T * j / nu) <= 1e-15 * std::max(1.0, m.T);
  if (uniform) return {{"T", m.T}, {"nu", nu}};
  return {{"T", m.T}, {"nodes", m.t}};
}

Mesh mesh_from_json(const json& j) {
  if (j.contains("nodes")) {
    Mesh m;
    m.t = j["nodes"].get<std::vector<double>>();
    m.T = j.value("T", m.t.back());
    m.validate();
    return m;
  }
  return Mesh::uniform(j.value("T", 1.0), j.at("nu").get<int>());
}

json control_path_to_json(const ControlPath& c) {
  json j;
  j["mesh"] = mesh_to_json(c.mesh);
  j["u"] = json::array();
  for (const Vec& u : c.u) j["u"].push_back(to_json(u));
  j["a"] = json::array();
  for (const Mat& a : c.a) j["a"].push_back(to_json(a));
  j["b"] = json::array();
  for (const Vec& b : c.b) j["b"].push_back(to_json(b));
  return j;
}

ControlPath control_path_from_json(const json& j) {
  ControlPath c;
  c.mesh = mesh_from_json(j.at("mesh"));
  for (const json& u : j.at("u")) c.u.push_back(vec_from_json(u));
  for (const json& a : j.at("a")) c.a.push_back(mat_from_json(a));
  for (const json& b : j.at("b")) c.b.push_back(vec_from_json(b));
  // d = 0 problems serialize u as empty arrays
  for (Vec& u : c.u)
    if (u.size() == 0) u = Vec(0);
  return c;
}

void write_trajectory_csv(std::ostream& os, const SweepTrajectory& tr) {
  const int nu = tr.mesh.nu();
  const int n = static_cast<int>(tr.x[0].size());
  const int m = static_cast<int>(tr.slack[0].size());
  os << "t";
  for (int k = 0; k < n; ++k) os << ",x" << k + 1;
  for (int i = 0; i < m; ++i) os << ",eta" << i + 1;
  for (int i = 0; i < m; ++i) os << ",slack" << i + 1;
  os << "\n" << std::setprecision(17);
  for (int j = 0; j <= nu; ++j) {
    os << tr.mesh.t[j];
    for (int k = 0; k < n; ++k) os << "," << tr.x[j][k];
    const Vec& eta = tr.eta[std::min(j, nu - 1)];
    for (int i = 0; i < m; ++i) os << "," << eta[i];
    for (int i = 0; i < m; ++i) os << "," << tr.slack[j][i];
    os << "\n";
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidInput, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::InvalidInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace sweep
