#pragma once

#include <map>
#include <string>
#include <vector>

#include "sweep/io.hpp"
#include "sweep/transcription.hpp"

namespace sweep {

enum class LambdaMode { Normal, Abnormal, Auto };

LambdaMode lambda_mode_from_string(const std::string& s);
std::string to_string(LambdaMode m);

// Dual elements along a candidate. gamma[j] and psi_*[j] belong to interval j;
// gamma[j] is the atom at node j + 1 where the catch-up step lands.
struct OptimalityCertificate {
  double lambda = 0.0;
  std::vector<Vec> px;    // nu + 1
  std::vector<Mat> pa;    // nu + 1, m x n
  std::vector<Vec> pb;    // nu + 1
  std::vector<Vec> gamma; // nu
  std::vector<Vec> eta;   // nu, copied from the candidate trajectory
  Vec eta_end;            // endpoint multipliers, one per facet
  std::vector<Vec> band;  // nu + 1, combined norm-band multipliers per facet
  std::vector<Vec> psi_u; // nu
  std::vector<Mat> psi_a; // nu, m x n
  std::vector<Vec> psi_b; // nu
  std::vector<bool> exact_norm;  // facets whose unit norm is an equality

  // p^x_{j+1} - lambda v^x_j, the vector paired with facet normals.
  Vec y(const SweepingProblem& P, const ControlPath& c, int j) const;
  double normalization() const;
  void scale(double s);
  bool abnormal() const { return lambda == 0.0; }
};

// Same shape, all zeros.
OptimalityCertificate zero_certificate(const DiscreteProblem& dp, const SweepTrajectory& traj);

struct ResidualReport {
  std::map<std::string, double> groups;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> margins;
  std::vector<std::string> skipped;
  double lambda = 0.0;
  bool abnormal = false;
  std::string mode;

  double max() const;
  bool passed() const;
  std::vector<std::string> failing() const;
  json to_json() const;
  std::string table() const;
};

ResidualReport residuals(const DiscreteProblem& dp, const ControlPath& c,
                         const SweepTrajectory& traj, const OptimalityCertificate& cert);

struct FitResult {
  OptimalityCertificate cert;
  ResidualReport report;
};

// Returns the best certificate found in the requested mode, passing or not.
FitResult fit_and_check(const DiscreteProblem& dp, const ControlPath& c,
                        const SweepTrajectory& traj, LambdaMode mode);

// Throws NoCertificate when no mode meets the tolerances.
OptimalityCertificate fit_certificate(const DiscreteProblem& dp, const ControlPath& c,
                                      const SweepTrajectory& traj, LambdaMode mode);

json certificate_to_json(const OptimalityCertificate& cert);

}  // namespace sweep
