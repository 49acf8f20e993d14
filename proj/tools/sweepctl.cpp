// sweepctl: command-line front end for the sweeping-process toolkit.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sweep/bench.hpp"

using namespace sweep;

namespace {

constexpr int kOk = 0;
constexpr int kTolerance = 2;
constexpr int kInfeasible = 3;

bool is_example(const std::string& s) {
  for (const auto& n : example_names())
    if (n == s) return true;
  return false;
}

// Problem plus the optimizer family, from an example name or a JSON file.
std::pair<SweepingProblem, json> load_target(const std::string& target) {
  json j = is_example(target) ? example_problem_json(target) : read_json_file(target);
  SweepingProblem P = problem_from_json(j);
  json fam = j.contains("family") ? j["family"] : default_family(P);
  return {P, fam};
}

std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

ControlPath candidate_controls(const json& cand) {
  return control_path_from_json(cand.contains("controls") ? cand["controls"] : cand);
}

int cmd_simulate(const std::string& problem, int nu, const std::string& out,
                 const std::string& controls, const std::string& params) {
  auto [P, fam] = load_target(problem);
  ControlPath c;
  if (!controls.empty()) {
    c = candidate_controls(read_json_file(controls));
  } else {
    Mesh mesh = Mesh::uniform(P.T, nu);
    if (!params.empty()) {
      Parameterization pz = make_parameterization(P, fam);
      std::vector<double> p = parse_list(params);
      if (static_cast<int>(p.size()) != pz.dim())
        throw Error(Errc::InvalidInput, "expected " + std::to_string(pz.dim()) + " parameters");
      c = pz.decode(mesh, Eigen::Map<Vec>(p.data(), p.size())).path;
    } else {
      c = constant_controls(P, mesh, P.d ? P.U.project(Vec::Zero(P.d)) : Vec(0));
    }
  }
  SweepTrajectory tr = catch_up(P, c);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw Error(Errc::InvalidInput, "cannot write " + out);
    write_trajectory_csv(os, tr);
  } else {
    write_trajectory_csv(std::cout, tr);
    return kOk;
  }
  json s;
  s["nu"] = c.mesh.nu();
  s["cost"] = cost(P, c, tr);
  s["x_final"] = to_json(tr.x.back());
  s["hits"] = json::array();
  for (const auto& e : tr.hits) s["hits"].push_back({{"facet", e.facet}, {"time", e.time}});
  s["max_cone_residual"] =
      tr.cone_residual.empty() ? 0.0 : *std::max_element(tr.cone_residual.begin(), tr.cone_residual.end());
  std::cout << s.dump(2) << "\n";
  return kOk;
}

int cmd_solve(const std::string& target, int nu, const SolveOptions& opts, const std::string& out) {
  auto [P, fam] = load_target(target);
  Mesh mesh = Mesh::uniform(P.T, nu);
  Parameterization pz = make_parameterization(P, fam);
  SolveResult s = solve(P, pz, mesh, opts);
  DiscreteProblem dp = assemble(P, mesh);
  json r;
  r["problem"] = P.name;
  r["family"] = fam;
  r["parameters"] = json::object();
  for (int k = 0; k < pz.dim(); ++k) r["parameters"][pz.names[k]] = s.params[k];
  r["cost"] = s.cost;
  r["switch_time"] = s.switch_time ? json(*s.switch_time) : json(nullptr);
  r["iterations"] = s.iterations;
  r["evaluations"] = s.evaluations;
  r["converged"] = s.converged;
  r["discrete_problem"] = dp.summary();
  r["feasibility"] = feasibility_residual(dp, pack(dp, s.controls, s.traj)).to_json();
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const auto base = std::filesystem::path(out);
    write_json_file((base / "candidate.json").string(),
                    {{"parameters", r["parameters"]}, {"controls", control_path_to_json(s.controls)}});
    std::ofstream csv(base / "traj.csv");
    write_trajectory_csv(csv, s.traj);
  }
  std::cout << r.dump(2) << "\n";
  std::cerr << "cost " << fixed6(s.cost) << "\n";
  return kOk;
}

int cmd_certify(const std::string& problem, const std::string& candidate, const std::string& mode,
                const std::string& out, bool as_json) {
  auto [P, fam] = load_target(problem);
  ControlPath c = candidate_controls(read_json_file(candidate));
  SweepTrajectory tr = catch_up(P, c);
  DiscreteProblem dp = assemble(P, c.mesh);
  FitResult f = fit_and_check(dp, c, tr, lambda_mode_from_string(mode));
  if (!out.empty())
    write_json_file(out, {{"report", f.report.to_json()}, {"certificate", certificate_to_json(f.cert)}});
  if (as_json)
    std::cout << f.report.to_json().dump(2) << "\n";
  else
    std::cout << f.report.table();
  return f.report.passed() ? kOk : kTolerance;
}

int cmd_converge(const std::string& name, const std::string& nus_s, bool as_json) {
  std::vector<int> nus;
  for (double v : parse_list(nus_s)) nus.push_back(static_cast<int>(v));
  auto rows = converge(name, nus);
  if (as_json) {
    std::cout << converge_to_json(rows).dump(2) << "\n";
    return kOk;
  }
  std::cout << std::setw(8) << "nu" << std::setw(12) << "cost" << std::setw(16) << "sup error"
            << std::setw(10) << "order" << "\n";
  for (const auto& r : rows) {
    std::cout << std::setw(8) << r.nu << std::setw(12) << fixed6(r.cost) << std::setw(16)
              << std::scientific << std::setprecision(4) << r.error << std::defaultfloat
              << std::setw(10);
    if (r.order)
      std::cout << std::fixed << std::setprecision(3) << *r.order << std::defaultfloat;
    else
      std::cout << "-";
    std::cout << "\n";
  }
  return kOk;
}

int cmd_example(const std::string& name, int nu, const SolveOptions& opts, const std::string& out,
                const std::string& write_problem) {
  if (!write_problem.empty()) {
    write_json_file(write_problem, example_problem_json(name));
    return kOk;
  }
  ExampleReport r = run_example(name, nu, opts, out);
  const json& j = r.report;
  std::cout << j.dump(2) << "\n";
  std::cerr << name << ": cost " << fixed6(j["cost"].get<double>()) << " (reference "
            << fixed6(j["reference"]["cost"].get<double>()) << "), switch "
            << fixed6(j["switch_time"].get<double>()) << ", "
            << (r.passed ? "all checks passed" : "some checks failed") << ", " << std::fixed
            << std::setprecision(2) << r.seconds << " s\n";
  return r.passed ? kOk : kTolerance;
}

void add_solver_flags(CLI::App* app, SolveOptions* o) {
  app->add_option("--levels", o->levels, "grid refinement levels (0 disables the grid)");
  app->add_option("--ppa", o->points_per_axis, "grid points per axis");
  app->add_option("--fd-h", o->fd_h, "relative finite-difference step");
  app->add_option("--g-tol", o->g_tol, "projected-gradient stopping tolerance");
  app->add_option("--max-iter", o->max_iter, "descent iteration cap");
  app->add_option("--seeds", o->seeds, "descent starts when the grid is off");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, optimize and certify controlled sweeping processes"};
  app.require_subcommand(1);

  std::string problem, candidate, target, out, controls, params, mode = "auto", nus = "250,500,1000,2000";
  std::string write_problem;
  int nu = 2000;
  bool as_json = false;
  SolveOptions sopts;

  auto* sim = app.add_subcommand("simulate", "run the catch-up scheme and write the trajectory CSV");
  sim->add_option("problem", problem, "problem JSON or example name")->required();
  sim->add_option("--nu", nu, "number of mesh intervals");
  sim->add_option("--out", out, "CSV output path (stdout if omitted)");
  sim->add_option("--controls", controls, "control path JSON");
  sim->add_option("--params", params, "comma-separated family parameters");

  auto* sol = app.add_subcommand("solve", "optimize over the problem's control family");
  sol->add_option("target", target, "example name or problem JSON")->required();
  sol->add_option("--nu", nu, "number of mesh intervals");
  sol->add_option("--out", out, "directory for candidate.json and traj.csv");
  add_solver_flags(sol, &sopts);

  auto* cer = app.add_subcommand("certify", "fit and check optimality multipliers");
  cer->add_option("problem", problem, "problem JSON or example name")->required();
  cer->add_option("candidate", candidate, "candidate JSON (control path)")->required();
  cer->add_option("--lambda-mode", mode, "normal, abnormal or auto");
  cer->add_option("--out", out, "write report and certificate JSON here");
  cer->add_flag("--json", as_json, "print the report as JSON");

  auto* con = app.add_subcommand("converge", "self-convergence study at fixed reference controls");
  con->add_option("example", target, "example name")->required();
  con->add_option("--nus", nus, "comma-separated increasing mesh sizes");
  con->add_flag("--json", as_json, "print JSON");

  auto* exa = app.add_subcommand("example", "reproduce one of the built-in examples");
  exa->add_option("name", target, "ex1, ex2 or ex3")->required()->check(CLI::IsMember(example_names()));
  exa->add_option("--nu", nu, "number of mesh intervals");
  exa->add_option("--out-dir", out, "write CSV and JSON outputs here");
  exa->add_option("--write-problem", write_problem, "only write the problem JSON to this path");
  add_solver_flags(exa, &sopts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(problem, nu, out, controls, params);
    if (*sol) return cmd_solve(target, nu, sopts, out);
    if (*cer) return cmd_certify(problem, candidate, mode, out, as_json);
    if (*con) return cmd_converge(target, nus, as_json);
    if (*exa) return cmd_example(target, nu, sopts, out, write_problem);
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::InfeasiblePoint:
      case Errc::EmptyPolyhedron:
        return kInfeasible;
      case Errc::NoCertificate:
      case Errc::ConeResidual:
        return kTolerance;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
