// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the sweepkit package.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sweep/bench.hpp"

namespace py = pybind11;
using namespace sweep;

namespace {

json load(const std::string& target) {
  for (const auto& n : example_names())
    if (n == target) return example_problem_json(n);
  return json::parse(target);
}

SolveOptions options(int levels, int ppa, double fd_h, double g_tol, int max_iter, int seeds) {
  SolveOptions o;
  o.levels = levels;
  o.points_per_axis = ppa;
  o.fd_h = fd_h;
  o.g_tol = g_tol;
  o.max_iter = max_iter;
  o.seeds = seeds;
  return o;
}

json trajectory_json(const SweepingProblem& P, const ControlPath& c, const SweepTrajectory& tr) {
  json j;
  j["t"] = tr.mesh.t;
  j["x"] = json::array();
  j["slack"] = json::array();
  for (size_t k = 0; k < tr.x.size(); ++k) {
    j["x"].push_back(to_json(tr.x[k]));
    j["slack"].push_back(to_json(tr.slack[k]));
  }
  j["eta"] = json::array();
  for (const Vec& e : tr.eta) j["eta"].push_back(to_json(e));
  j["cost"] = cost(P, c, tr);
  j["hits"] = json::array();
  for (const auto& h : tr.hits) j["hits"].push_back({{"facet", h.facet}, {"time", h.time}});
  return j;
}

std::string simulate(const std::string& target, int nu, const std::vector<double>& params) {
  json pj = load(target);
  SweepingProblem P = problem_from_json(pj);
  json fam = pj.contains("family") ? pj["family"] : default_family(P);
  Parameterization pz = make_parameterization(P, fam);
  if (static_cast<int>(params.size()) != pz.dim())
    throw Error(Errc::InvalidInput, "expected " + std::to_string(pz.dim()) + " parameters");
  Vec p = Eigen::Map<const Vec>(params.data(), params.size());
  Decoded d = pz.decode(Mesh::uniform(P.T, nu), pz.clamp(p));
  SweepTrajectory tr = catch_up(P, d.path);
  json j = trajectory_json(P, d.path, tr);
  j["switch_time"] = d.switch_time ? json(*d.switch_time) : json(nullptr);
  return j.dump();
}

std::string run(const std::string& name, int nu, int levels, int ppa, double fd_h, double g_tol,
                int max_iter, int seeds) {
  ExampleReport r = run_example(name, nu, options(levels, ppa, fd_h, g_tol, max_iter, seeds));
  return r.report.dump();
}

std::string converge_table(const std::string& name, const std::vector<int>& nus) {
  return converge_to_json(converge(name, nus)).dump();
}

py::tuple projection(const Mat& A, const Vec& b, const Vec& y) {
  Projection p = project(Polyhedron(A, b), y);
  return py::make_tuple(p.x, p.multipliers);
}

}  // namespace

PYBIND11_MODULE(_sweepkit, m) {
  m.doc() = "Controlled sweeping processes over moving polyhedra";

  py::register_exception<Error>(m, "SweepError");

  m.def("example_names", &example_names);
  m.def("example_problem", [](const std::string& n) { return example_problem_json(n).dump(); });
  m.def("simulate", &simulate, py::arg("problem"), py::arg("nu"), py::arg("params"));
  m.def("run_example", &run, py::arg("name"), py::arg("nu") = 2000, py::arg("levels") = 4,
        py::arg("ppa") = 11, py::arg("fd_h") = 1e-6, py::arg("g_tol") = 1e-8,
        py::arg("max_iter") = 500, py::arg("seeds") = 5);
  m.def("converge", &converge_table, py::arg("name"), py::arg("nus"));
  m.def("project", &projection, py::arg("normals"), py::arg("offsets"), py::arg("y"));
  m.def("analytic_cost_ex1", &analytic_cost_ex1);
  m.def("analytic_cost_ex3", &analytic_cost_ex3);
  m.def("analytic_switch_ex3", &analytic_switch_ex3);
}
