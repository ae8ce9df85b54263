#pragma once

// Naive fixed-point iteration: start from the most occupied natural orbitals,
// then repeatedly diagonalize the full M x M gamma^(m) of the current basis
// and keep its m most occupied eigenvectors. Convergence is not guaranteed;
// the iteration can settle into a cycle, which is reported.

#include <Eigen/Dense>

#include <cmath>
#include <deque>

#include "rbci/ci_tensor.hpp"
#include "rbci/guess.hpp"
#include "rbci/newton.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"

namespace rbci {

struct FixedPointOptions {
  double tol = 1e-12;        ///< |change of N| that counts as converged
  int max_iter = 500;
  double cycle_tol = 1e-12;  ///< two values this close are the same state
  int cycle_window = 8;      ///< how many past values are searched for a repeat
};

inline OptimizationReport naive_fixed_point(const CITensor& t, int kept,
                                            const FixedPointOptions& options = {}) {
  require_partition(t, kept);
  OptimizationReport report;
  report.rotation = highest_no_guess(t, kept);
  double value = reduced_norm(t, report.rotation, kept);
  report.initial_norm = value;
  report.status = Status::max_iter;
  std::deque<double> recent{value};

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const CITensor work = rotate_tensor(t, report.rotation);
    const NaturalBasis basis = natural_basis(truncated_rdm1(work, kept).matrix);
    report.rotation = proper_rotation(report.rotation * basis.orbitals);
    const double next = reduced_norm(t, report.rotation, kept);
    ++report.iterations;
    ++report.accepted_steps;
    report.history.push_back({next, 0.0, 0.0, 0.0, true});

    if (std::abs(next - value) < options.tol) {
      value = next;
      report.status = Status::converged;
      break;
    }
    // a repeat of an older value (not the previous one) means a cycle
    bool cycle = false;
    for (std::size_t i = 0; i + 1 < recent.size(); ++i) {
      if (std::abs(recent[i] - next) < options.cycle_tol) cycle = true;
    }
    value = next;
    if (cycle) {
      report.status = Status::oscillation_detected;
      break;
    }
    recent.push_back(next);
    if (static_cast<int>(recent.size()) > options.cycle_window) recent.pop_front();
  }

  report.retained_norm = value;
  finalize_report(t, kept, report);
  return report;
}

}  // namespace rbci
