#pragma once

// Truncated reduced density matrices and natural orbitals.
//
//   gamma^(m)_{kl}   = N      sum_{i_2..i_N < m}  c_{k i_2..i_N} c_{l i_2..i_N}
//   Gamma^(m)_{klba} = N(N-1) sum_{i_3..i_N < m}  c_{k l i_3..i_N} c_{a b i_3..i_N}
//
// Only the internal summation indices are restricted to the kept orbitals;
// the free indices run over all M orbitals. In determinant storage the
// factorials cancel and gamma^(m) = V^T V, where row J of V (J a kept
// (N-1)-subset) holds sign(p, J) d_{J+p} in column p.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbci/ci_tensor.hpp"
#include "rbci/combinatorics.hpp"

namespace rbci {

struct TruncatedRDM1 {
  int kept = 0;
  Eigen::MatrixXd matrix;  ///< M x M, symmetric
};

/// Truncated 2-RDM over all index blocks, stored as an M^2 x M^2 matrix
/// G((p, q), (s, r)) = Gamma_{pqrs}.
struct TruncatedRDM2 {
  int num_orbitals = 0;
  int kept = 0;
  Eigen::MatrixXd pairs;

  double operator()(int p, int q, int r, int s) const {
    return pairs(static_cast<Eigen::Index>(p) * num_orbitals + q,
                 static_cast<Eigen::Index>(s) * num_orbitals + r);
  }
};

namespace detail {

/// Largest orbital of K once the entry at `skip` is removed (-1 if none left).
inline int max_without(std::span<const int> K, std::size_t skip) {
  if (K.size() <= 1) return -1;
  return skip + 1 == K.size() ? K[K.size() - 2] : K.back();
}

}  // namespace detail

inline TruncatedRDM1 truncated_rdm1(const CITensor& t, int kept) {
  require_partition(t, kept);
  const int M = t.num_orbitals();
  const int N = t.num_particles();
  const SubsetTable& dets = subsets(M, N);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(binomial(kept, N - 1)), M);
  const Eigen::VectorXd& d = t.coefficients();
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const double value = d(static_cast<Eigen::Index>(k));
    if (value == 0.0) continue;
    const auto K = dets[k];
    for (std::size_t i = 0; i < K.size(); ++i) {
      if (detail::max_without(K, i) >= kept) continue;
      V(static_cast<Eigen::Index>(colex_rank_without(K, i)), K[i]) = (i % 2 == 0) ? value : -value;
    }
  }
  TruncatedRDM1 result{kept, Eigen::MatrixXd(M, M)};
  result.matrix.noalias() = V.transpose() * V;
  return result;
}

/// N_m = (1/N) sum_{k < m} gamma^(m)_{kk}.
inline double kept_trace_norm(const TruncatedRDM1& gamma, int num_particles) {
  return gamma.matrix.diagonal().head(gamma.kept).sum() / num_particles;
}

inline TruncatedRDM2 truncated_rdm2(const CITensor& t, int kept) {
  require_partition(t, kept);
  const int M = t.num_orbitals();
  const int N = t.num_particles();
  if (N < 2) throw std::invalid_argument("truncated_rdm2: needs at least two particles");
  const SubsetTable& dets = subsets(M, N);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(binomial(kept, N - 2)),
                                            static_cast<Eigen::Index>(M) * M);
  const Eigen::VectorXd& d = t.coefficients();
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const double value = d(static_cast<Eigen::Index>(k));
    if (value == 0.0) continue;
    const auto K = dets[k];
    for (std::size_t i = 0; i < K.size(); ++i) {
      for (std::size_t j = i + 1; j < K.size(); ++j) {
        int rest_max = -1;
        for (std::size_t s = 0; s < K.size(); ++s) {
          if (s != i && s != j) rest_max = K[s];
        }
        if (rest_max >= kept) continue;
        // sorting (K_i, K_j, rest...) back to K takes i + j - 1 transpositions
        const double signed_value = ((i + j - 1) % 2 == 0) ? value : -value;
        const auto row = static_cast<Eigen::Index>(colex_rank_without(K, i, j));
        W(row, static_cast<Eigen::Index>(K[i]) * M + K[j]) = signed_value;
        W(row, static_cast<Eigen::Index>(K[j]) * M + K[i]) = -signed_value;
      }
    }
  }
  TruncatedRDM2 result{M, kept, Eigen::MatrixXd(static_cast<Eigen::Index>(M) * M,
                                                static_cast<Eigen::Index>(M) * M)};
  result.pairs.noalias() = W.transpose() * W;
  return result;
}

/// Eigenvectors of a symmetric matrix, sorted by descending eigenvalue.
struct NaturalBasis {
  Eigen::VectorXd occupations;
  Eigen::MatrixXd orbitals;  ///< columns are the eigenvectors
};

inline constexpr double kDegeneracyTolerance = 1e-10;

/// Diagonalizes a symmetric matrix with a deterministic basis choice.
///
/// Eigenvalues closer than kDegeneracyTolerance form a cluster. A single
/// eigenvector is signed so its largest-magnitude component (lowest index on
/// ties) is positive. A degenerate cluster is replaced by a canonical basis of
/// the same eigenspace: pivoted Gram-Schmidt on the columns of its projector,
/// always taking the unit vector with the largest remaining projection (lowest
/// index on ties). The result depends only on the eigenspace, not on the
/// basis the solver happened to return.
inline NaturalBasis natural_basis(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw std::invalid_argument("natural_basis: not square");
  const Eigen::Index n = symmetric.rows();
  NaturalBasis result{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  if (n == 0) return result;
  const Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("natural_basis: eigensolver failed");
  for (Eigen::Index i = 0; i < n; ++i) {
    result.occupations(i) = solver.eigenvalues()(n - 1 - i);
    result.orbitals.col(i) = solver.eigenvectors().col(n - 1 - i);
  }

  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && result.occupations(stop - 1) - result.occupations(stop) < kDegeneracyTolerance) {
      ++stop;
    }
    const Eigen::Index width = stop - start;
    if (width == 1) {
      auto v = result.orbitals.col(start);
      Eigen::Index pivot = 0;
      for (Eigen::Index r = 1; r < n; ++r) {
        if (std::abs(v(r)) > std::abs(v(pivot))) pivot = r;
      }
      if (v(pivot) < 0) v = -v;
    } else {
      const Eigen::MatrixXd Q = result.orbitals.middleCols(start, width);
      Eigen::MatrixXd residual = Q * Q.transpose();  // projector columns
      for (Eigen::Index c = 0; c < width; ++c) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double norm = residual.col(r).norm();
          if (norm > best + 1e-12) {
            best = norm;
            pivot = r;
          }
        }
        const Eigen::VectorXd q = residual.col(pivot) / best;
        result.orbitals.col(start + c) = q;
        residual -= q * (q.transpose() * residual);
      }
      // the cluster shares one eigenvalue up to the tolerance; use the mean
      const double mean = result.occupations.segment(start, width).mean();
      result.occupations.segment(start, width).setConstant(mean);
    }
    start = stop;
  }
  return result;
}

/// Natural orbitals and occupation numbers of t (eigenpairs of gamma^(M)).
inline NaturalBasis natural_orbitals(const CITensor& t) {
  return natural_basis(truncated_rdm1(t, t.num_orbitals()).matrix);
}

/// S = -(1/N) sum_k n_k ln n_k with 0 ln 0 = 0.
inline double correlation_entropy(std::span<const double> occupations, int num_particles) {
  constexpr double tol = 1e-10;
  if (num_particles < 1) throw std::invalid_argument("correlation_entropy: need N >= 1");
  double sum = 0.0;
  for (double n : occupations) {
    if (!(n >= -tol && n <= 1.0 + tol)) {
      throw std::domain_error("correlation_entropy: occupation " + std::to_string(n) +
                              " outside [0, 1]");
    }
    if (n > 0.0 && n < 1.0) sum -= n * std::log(n);
  }
  return sum / num_particles;
}

inline double correlation_entropy(const Eigen::VectorXd& occupations, int num_particles) {
  return correlation_entropy(std::span<const double>(occupations.data(),
                                                     static_cast<std::size_t>(occupations.size())),
                             num_particles);
}

/// Norm carried by each pattern of a chosen orbital set.
///
/// values[mask] sums d_K^2 over determinants K whose intersection with
/// `orbitals` is exactly {orbitals[b] : bit b of mask set}.
struct SubsetContributions {
  std::vector<int> orbitals;
  std::vector<double> values;
};

inline SubsetContributions subset_contributions(const CITensor& t, std::span<const int> orbitals) {
  if (orbitals.size() > 24) throw std::invalid_argument("subset_contributions: set too large");
  std::vector<int> position(static_cast<std::size_t>(t.num_orbitals()), -1);
  for (std::size_t b = 0; b < orbitals.size(); ++b) {
    const int o = orbitals[b];
    if (o < 0 || o >= t.num_orbitals()) throw std::out_of_range("subset_contributions: bad orbital");
    if (position[static_cast<std::size_t>(o)] >= 0) {
      throw std::invalid_argument("subset_contributions: repeated orbital");
    }
    position[static_cast<std::size_t>(o)] = static_cast<int>(b);
  }
  SubsetContributions result{{orbitals.begin(), orbitals.end()},
                             std::vector<double>(std::size_t{1} << orbitals.size(), 0.0)};
  const SubsetTable& dets = subsets(t.num_orbitals(), t.num_particles());
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const double value = t.coefficients()(static_cast<Eigen::Index>(k));
    if (value == 0.0) continue;
    std::size_t mask = 0;
    for (int o : dets[k]) {
      const int b = position[static_cast<std::size_t>(o)];
      if (b >= 0) mask |= std::size_t{1} << b;
    }
    result.values[mask] += value * value;
  }
  return result;
}

}  // namespace rbci
