#pragma once

// Starting orbitals for the retained-norm optimization, and the closed-form
// special cases (two particles; removal of a single orbital).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rbci/ci_tensor.hpp"
#include "rbci/newton.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"

namespace rbci {

/// Flips the sign of the last column if needed so that det U = +1. The sign
/// of a single orbital never changes a retained norm.
inline Eigen::MatrixXd proper_rotation(Eigen::MatrixXd U) {
  if (U.cols() > 0 && U.determinant() < 0) U.col(U.cols() - 1) *= -1.0;
  return U;
}

/// Natural orbitals by descending occupation; the first m are kept.
inline Eigen::MatrixXd highest_no_guess(const CITensor& t, int kept) {
  require_partition(t, kept);
  return proper_rotation(natural_orbitals(t).orbitals);
}

/// Removes orbitals one at a time. At retained size i the truncated 1-RDM
/// gamma^(i), with both its indices and its internal sums limited to the i
/// retained orbitals, is diagonalized and its least occupied eigenvector is
/// dropped. Each step is the optimal single-orbital removal for the current
/// subspace.
inline Eigen::MatrixXd one_by_one_elimination(const CITensor& t, int kept) {
  require_partition(t, kept);
  const int M = t.num_orbitals();
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(M, M);
  CITensor work = t;
  for (int retained = M; retained > kept; --retained) {
    const TruncatedRDM1 gamma = truncated_rdm1(work, retained);
    const NaturalBasis basis = natural_basis(gamma.matrix.topLeftCorner(retained, retained));
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(M, M);
    step.topLeftCorner(retained, retained) = basis.orbitals;
    U = U * step;
    work = rotate_tensor(t, U);
  }
  return proper_rotation(U);
}

struct TwoParticleSolution {
  Eigen::MatrixXd rotation;
  double retained_norm = 0.0;
  Eigen::VectorXd occupations;  ///< descending, paired
};

/// Optimal orbitals for N = 2.
///
/// The coefficient matrix C (C_ij = d_ij / sqrt 2, antisymmetric) has
/// gamma = 2 C C^T, so its natural orbitals come in degenerate pairs. Inside
/// each degenerate eigenspace the basis is rebuilt as pairs (v, C v / sigma),
/// which brings C to 2x2-block canonical form; then gamma^(m) is diagonal for
/// every m. The retained norm is (1/2) sum of the kept occupations when m is
/// even; for odd m the last kept orbital has lost its partner and adds nothing.
inline TwoParticleSolution two_particle_optimal(const CITensor& t, int kept) {
  if (t.num_particles() != 2) throw std::invalid_argument("two_particle_optimal: needs N = 2");
  require_partition(t, kept);
  const int M = t.num_orbitals();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(M, M);
  for (int j = 1; j < M; ++j) {
    for (int i = 0; i < j; ++i) {
      const int pair[2] = {i, j};
      const double value = t.coefficient(pair) / std::sqrt(2.0);
      C(i, j) = value;
      C(j, i) = -value;
    }
  }
  const NaturalBasis nb = natural_basis(2.0 * C * C.transpose());

  Eigen::MatrixXd U(M, M);
  Eigen::Index filled = 0;
  Eigen::Index start = 0;
  constexpr double zero_sigma = 1e-8;
  while (start < M) {
    Eigen::Index stop = start + 1;
    while (stop < M && nb.occupations(stop - 1) - nb.occupations(stop) < kDegeneracyTolerance) ++stop;
    const double sigma = std::sqrt(std::max(0.0, nb.occupations(start)) / 2.0);
    std::vector<Eigen::VectorXd> remaining;
    for (Eigen::Index c = start; c < stop; ++c) remaining.push_back(nb.orbitals.col(c));
    // close eigenvalues leave the solver's vectors slightly mixed, so every
    // new column is orthogonalized against all columns placed so far
    auto place = [&](Eigen::VectorXd v) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index c = 0; c < filled; ++c) v -= U.col(c).dot(v) * U.col(c);
      }
      const double norm = v.norm();
      if (norm < 0.5) return false;
      U.col(filled++) = v / norm;
      return true;
    };
    if (sigma <= zero_sigma) {
      for (const auto& v : remaining) {
        if (!place(v)) throw std::runtime_error("two_particle_optimal: degenerate basis");
      }
    } else {
      while (!remaining.empty()) {
        if (!place(remaining.front())) throw std::runtime_error("two_particle_optimal: degenerate basis");
        remaining.erase(remaining.begin());
        const Eigen::VectorXd v = U.col(filled - 1);
        if (filled >= M || !place(C.transpose() * v / sigma)) continue;  // unpaired leftover
        const Eigen::VectorXd w = U.col(filled - 1);
        std::vector<Eigen::VectorXd> next;
        for (auto u : remaining) {
          u -= v.dot(u) * v + w.dot(u) * w;
          for (const auto& q : next) u -= q.dot(u) * q;
          if (u.norm() > 1e-6) next.push_back(u.normalized());
        }
        remaining = std::move(next);
      }
    }
    start = stop;
  }
  if (filled != M) throw std::runtime_error("two_particle_optimal: lost orbitals while pairing");
  U = proper_rotation(U);

  return {U, reduced_norm(t, U, kept), nb.occupations};
}

struct SingleRemovalCheck {
  double max_cross_entry = 0.0;  ///< max_a |gamma^(M-1)_{M,a}| in the natural basis
  int accepted_steps = 0;        ///< Newton steps taken from the natural basis
  double retained_norm = 0.0;
  Status status = Status::max_iter;
};

/// Confirms that dropping the least occupied natural orbital is stationary
/// for m = M - 1 and that Newton refinement does not move from it.
inline SingleRemovalCheck verify_single_removal_optimality(const CITensor& t,
                                                           const NewtonOptions& options = {}) {
  const int M = t.num_orbitals();
  if (M - 1 < t.num_particles()) {
    throw std::invalid_argument("verify_single_removal_optimality: needs M > N");
  }
  const Eigen::MatrixXd U = natural_orbitals(t).orbitals;
  const CITensor work = rotate_tensor(t, U);
  const TruncatedRDM1 gamma = truncated_rdm1(work, M - 1);
  SingleRemovalCheck check;
  check.max_cross_entry = gamma.matrix.row(M - 1).head(M - 1).cwiseAbs().maxCoeff();
  const OptimizationReport report = newton_trust_region(t, M - 1, U, options);
  check.accepted_steps = report.accepted_steps;
  check.retained_norm = report.retained_norm;
  check.status = report.status;
  return check;
}

}  // namespace rbci
