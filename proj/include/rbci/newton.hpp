#pragma once

// Trust-region Newton-Raphson maximization of the retained norm over the
// cross-block rotation generators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rbci/ci_tensor.hpp"
#include "rbci/derivatives.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"
#include "rbci/trust_region.hpp"

namespace rbci {

enum class Status { converged, max_iter, oscillation_detected };

inline std::string_view to_string(Status status) {
  switch (status) {
    case Status::converged: return "converged";
    case Status::max_iter: return "max_iter";
    case Status::oscillation_detected: return "oscillation_detected";
  }
  return "unknown";
}

inline Status parse_status(std::string_view token) {
  if (token == "converged") return Status::converged;
  if (token == "max_iter") return Status::max_iter;
  if (token == "oscillation_detected") return Status::oscillation_detected;
  throw std::invalid_argument("unknown status token '" + std::string(token) + "'");
}

struct NewtonOptions {
  double gradient_tol = 1.5e-8;  ///< sqrt(machine epsilon)
  int max_iter = 200;
  double initial_radius = 0.1;
  double max_radius = 1.0;
  double shrink_below = 0.25;  ///< ratio under which the radius shrinks
  double grow_above = 0.75;    ///< ratio over which a boundary step grows it
  double shrink_factor = 0.25;
  double grow_factor = 2.0;
  /// Changes of the retained norm below this are rounding noise; such steps
  /// are accepted unless they lose more than this amount.
  double noise_floor = 1e-14;
};

struct IterationRecord {
  double retained_norm = 0.0;  ///< value after the iteration
  double gradient_norm = 0.0;  ///< at the start of the iteration
  double trust_radius = 0.0;   ///< radius used for the step
  double step_norm = 0.0;
  bool accepted = false;
};

struct OptimizationReport {
  Eigen::MatrixXd rotation;  ///< final U; its first m columns span the kept space
  double initial_norm = 0.0;
  double retained_norm = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
  Status status = Status::max_iter;
  double gradient_norm = 0.0;
  /// Most positive Hessian eigenvalue at the final point (-inf when there are
  /// no free parameters).
  double hessian_max_eigenvalue = -std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> history;
};

inline double max_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// Fills gradient norm and Hessian definiteness of `report` at its final rotation.
inline void finalize_report(const CITensor& t, int kept, OptimizationReport& report) {
  const CITensor work = rotate_tensor(t, report.rotation);
  const TruncatedRDM1 gamma = truncated_rdm1(work, kept);
  report.gradient_norm = gradient_from_rdm(gamma).norm();
  report.hessian_max_eigenvalue = max_eigenvalue(hessian_from_rdm(work, gamma));
}

inline OptimizationReport newton_trust_region(const CITensor& t, int kept, const Eigen::MatrixXd& start,
                                              const NewtonOptions& options = {}) {
  require_partition(t, kept);
  require_orthogonal(start, t.num_orbitals());
  const CrossBlock block{t.num_orbitals(), kept};

  OptimizationReport report;
  report.rotation = start;
  CITensor work = rotate_tensor(t, start);
  double value = kept_norm(work, kept);
  report.initial_norm = value;
  double radius = options.initial_radius;
  report.status = Status::max_iter;

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const TruncatedRDM1 gamma = truncated_rdm1(work, kept);
    const Eigen::VectorXd g = gradient_from_rdm(gamma);
    const double gnorm = g.norm();
    report.gradient_norm = gnorm;
    if (gnorm < options.gradient_tol) {
      report.status = Status::converged;
      break;
    }
    if (iter == options.max_iter) break;

    const Eigen::MatrixXd H = hessian_from_rdm(work, gamma);
    const TrustRegionStep step = solve_trust_region_subproblem(g, H, radius);
    const Eigen::MatrixXd trial =
        report.rotation * exp_antisymmetric(cross_block_generator(block, step.step));
    const double trial_value = reduced_norm(t, trial, kept);
    const double actual = trial_value - value;
    const double predicted = step.predicted_increase;

    bool accepted = false;
    double ratio = 0.0;
    if (predicted <= options.noise_floor) {
      accepted = actual > -options.noise_floor;
      ratio = accepted ? 1.0 : 0.0;
    } else {
      ratio = actual / predicted;
      accepted = ratio > 0.0;
    }
    const double step_norm = step.step.norm();
    const double used_radius = radius;
    if (ratio < options.shrink_below) {
      radius *= options.shrink_factor;
    } else if (ratio > options.grow_above && step.on_boundary) {
      radius = std::min(options.grow_factor * radius, options.max_radius);
    }
    if (accepted) {
      report.rotation = trial;
      work = rotate_tensor(t, trial);
      value = kept_norm(work, kept);
      ++report.accepted_steps;
    }
    ++report.iterations;
    report.history.push_back({value, gnorm, used_radius, step_norm, accepted});
  }

  report.retained_norm = value;
  report.hessian_max_eigenvalue = max_eigenvalue(hessian(work, kept));
  return report;
}

}  // namespace rbci
