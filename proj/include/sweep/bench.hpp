#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sweep/certificates.hpp"
#include "sweep/io.hpp"
#include "sweep/optimizer.hpp"

namespace sweep {

struct ExampleSpec {
  std::string name;
  std::string title;
  SweepingProblem problem;
  json family;  // parameterization descriptor, see make_parameterization
  double ref_cost = 0.0;
  Vec ref_params;
  double ref_switch = 0.0;
  double cost_tol = 0.0, param_tol = 0.0, switch_tol = 0.0;
  LambdaMode lambda_mode = LambdaMode::Auto;
};

const std::vector<std::string>& example_names();
ExampleSpec make_example(const std::string& name);

// Problem JSON plus the "family" key understood by the CLI.
json example_problem_json(const std::string& name);

// kinds: piecewise_constant_u {segments}, constant_rate_b {facet},
// two_phase_rate_b {facet, contact_facet}, two_phase_angle {facet, theta0, contact_facet}
Parameterization make_parameterization(const SweepingProblem& P, const json& family);
json default_family(const SweepingProblem& P);

// Two-phase cost with first-phase control (u10, u20) and sliding-phase control (u1s, u2s).
double analytic_cost_ex1(double u10, double u20, double u1s, double u2s);
// Hitting time of the first phase, clamped to [0, 1].
double analytic_hitting_time_ex1(double u10, double u20);
double analytic_cost_ex3(double bdot0, double bdot1);
double analytic_switch_ex3(double bdot0);
// Sliding-phase multiplier; x_star is the state at the switch time t_star.
double analytic_eta_ex2(double t, double thetadot1, double t_star, double theta_star,
                        const Vec& x_star);

struct ExampleReport {
  json report;            // deterministic content only
  SolveResult solution;
  FitResult certificate;
  bool passed = false;
  double seconds = 0.0;   // wall time, kept out of `report`
};

// Solve, simulate, certify and compare against the references. When out_dir
// is non-empty, writes <name>_traj.csv, <name>_controls.json, <name>_report.json.
ExampleReport run_example(const std::string& name, int nu, const SolveOptions& opts,
                          const std::string& out_dir = "");

struct ConvergeRow {
  int nu = 0;
  double cost = 0.0;
  double error = 0.0;  // sup-norm distance to the 2 nu run at shared nodes
  std::optional<double> order;
};

// Fixed reference controls of the example, refined meshes.
std::vector<ConvergeRow> converge(const std::string& name, const std::vector<int>& nus);
std::vector<ConvergeRow> converge(const SweepingProblem& P, const Parameterization& param,
                                 const Vec& params, const std::vector<int>& nus);
json converge_to_json(const std::vector<ConvergeRow>& rows);

}  // namespace sweep
