#pragma once

// Orbital rotations U = exp(X) and their action on CI coefficients.
//
// Columns of U are the new orbitals expanded in the old ones, so the rotated
// coefficients are d'_L = sum_K d_K det(U[K, L]) with rows K and columns L.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "rbci/ci_tensor.hpp"
#include "rbci/combinatorics.hpp"

namespace rbci {

/// Layout of the non-redundant rotation generators X_{kl}, k < m <= l.
/// Parameter (k, l) sits at k * (M - m) + (l - m).
struct CrossBlock {
  int num_orbitals = 0;
  int kept = 0;

  int removed() const { return num_orbitals - kept; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(kept) * removed(); }
  Eigen::Index index(int k, int l) const {
    return static_cast<Eigen::Index>(k) * removed() + (l - kept);
  }
};

/// Antisymmetric generator with X(k, l) = x_(k,l) and X(l, k) = -x_(k,l).
inline Eigen::MatrixXd cross_block_generator(const CrossBlock& block, const Eigen::VectorXd& params) {
  if (params.size() != block.size()) {
    throw std::invalid_argument("cross_block_generator: parameter vector has wrong length");
  }
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(block.num_orbitals, block.num_orbitals);
  for (int k = 0; k < block.kept; ++k) {
    for (int l = block.kept; l < block.num_orbitals; ++l) {
      const double x = params(block.index(k, l));
      X(k, l) = x;
      X(l, k) = -x;
    }
  }
  return X;
}

inline double orthogonality_defect(const Eigen::MatrixXd& U) {
  return (U.transpose() * U - Eigen::MatrixXd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

inline void require_orthogonal(const Eigen::MatrixXd& U, int dimension, double tol = 1e-10) {
  if (U.rows() != dimension || U.cols() != dimension) {
    throw std::invalid_argument("rotation must be " + std::to_string(dimension) + "x" +
                                std::to_string(dimension));
  }
  if (!(orthogonality_defect(U) <= tol)) throw std::invalid_argument("rotation is not orthogonal");
}

/// exp(X) for real antisymmetric X (scaling and squaring with Pade approximants).
inline Eigen::MatrixXd exp_antisymmetric(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("exp_antisymmetric: matrix not square");
  if (X.size() == 0) return X;
  if ((X + X.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("exp_antisymmetric: matrix not antisymmetric");
  }
  const Eigen::MatrixXd A = 0.5 * (X - X.transpose());
  return A.exp();
}

/// Rotated coefficients d'_L for the columns L inside {0, ..., column_bound-1},
/// in colex order (length C(column_bound, N)).
///
/// The determinants are expanded by Laplace along the columns of L in
/// increasing order. Level j holds the mixed quantity
///   Y_j[R][C] = sum over row sets K = R + {r_1..r_j} of d_K * (signed minor of U on (r, C))
/// with |R| = N - j original orbitals left and |C| = j rotated orbitals placed;
/// Y_0 = d and Y_N[{}][L] = d'_L.
inline Eigen::VectorXd rotated_coefficients(const CITensor& t, const Eigen::MatrixXd& U,
                                            int column_bound) {
  const int M = t.num_orbitals();
  const int N = t.num_particles();
  require_orthogonal(U, M);
  if (column_bound < N || column_bound > M) throw std::invalid_argument("rotation: bad column bound");

  Eigen::MatrixXd level = t.coefficients();
  for (int j = 1; j <= N; ++j) {
    const SubsetTable& rows = subsets(M, N - j + 1);
    const SubsetTable& cols = subsets(column_bound, j - 1);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(binomial(M, N - j)),
                                                 static_cast<Eigen::Index>(binomial(column_bound, j)));
    for (std::size_t kr = 0; kr < rows.size(); ++kr) {
      const auto K = rows[kr];
      for (std::size_t i = 0; i < K.size(); ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        const auto rr = static_cast<Eigen::Index>(colex_rank_without(K, i));
        const int r = K[i];
        for (std::size_t cc = 0; cc < cols.size(); ++cc) {
          const double y = level(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(cc));
          if (y == 0.0) continue;
          const double sy = sign * y;
          const int first = (j == 1) ? 0 : cols[cc].back() + 1;
          for (int c = first; c < column_bound; ++c) {
            const auto col = static_cast<Eigen::Index>(cc + binomial(c, j));
            next(rr, col) += sy * U(r, c);
          }
        }
      }
    }
    level = std::move(next);
  }
  return level.row(0).transpose();
}

/// Coefficients of t expressed in the orbitals given by the columns of U.
inline CITensor rotate_tensor(const CITensor& t, const Eigen::MatrixXd& U) {
  return CITensor(t.num_orbitals(), t.num_particles(),
                  rotated_coefficients(t, U, t.num_orbitals()));
}

/// Squared norm retained when the first m columns of U are kept.
inline double reduced_norm(const CITensor& t, const Eigen::MatrixXd& U, int kept) {
  require_partition(t, kept);
  return rotated_coefficients(t, U, kept).squaredNorm();
}

/// Retained norm of a tensor already expressed in the working basis.
inline double kept_norm(const CITensor& t, int kept) {
  require_partition(t, kept);
  return t.coefficients().head(static_cast<Eigen::Index>(binomial(kept, t.num_particles()))).squaredNorm();
}

}  // namespace rbci
