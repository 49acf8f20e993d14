#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "sweep/dynamics.hpp"

namespace sweep {

using json = nlohmann::json;

json to_json(const Vec& v);
json to_json(const Mat& m);
Vec vec_from_json(const json& j);
Mat mat_from_json(const json& j);

json set_to_json(const ConstraintSet& s);
ConstraintSet set_from_json(const json& j);

json problem_to_json(const SweepingProblem& P);
SweepingProblem problem_from_json(const json& j);
SweepingProblem load_problem(const std::string& path);

json mesh_to_json(const Mesh& m);
Mesh mesh_from_json(const json& j);

json control_path_to_json(const ControlPath& c);
ControlPath control_path_from_json(const json& j);

// Columns: t, x1..xn, eta1..etam, slack1..slackm. eta on the last node is
// the endpoint value carried over from the final interval.
void write_trajectory_csv(std::ostream& os, const SweepTrajectory& tr);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace sweep
