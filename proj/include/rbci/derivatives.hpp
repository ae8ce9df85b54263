#pragma once

// First and second derivatives of the retained norm N(X) = reduced_norm(t, exp(X), m)
// at X = 0 with respect to the cross-block generators x_(k,l) = X_{kl} = -X_{lk},
// k < m <= l. The tensor must already be expressed in the working basis.
//
//   dN/dx_(k,l)             = -2 gamma^(m)_{kl}
//   d2N/dx_(k,l) dx_(a,b)   = 2 (Gamma_{kabl} + Gamma_{kbal} + delta_{ak} gamma_{lb} - delta_{bl} gamma_{ka})
//
// The gradient factor -2 is the value measured against central finite
// differences (see tests/derivatives_test.cpp).

#include <Eigen/Dense>

#include <cstddef>

#include "rbci/ci_tensor.hpp"
#include "rbci/combinatorics.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"

namespace rbci {

inline constexpr double kGradientScale = -2.0;

/// Gradient over the cross block from an already computed gamma^(m).
inline Eigen::VectorXd gradient_from_rdm(const TruncatedRDM1& gamma) {
  const CrossBlock block{static_cast<int>(gamma.matrix.rows()), gamma.kept};
  Eigen::VectorXd g(block.size());
  for (int k = 0; k < block.kept; ++k) {
    for (int l = block.kept; l < block.num_orbitals; ++l) {
      g(block.index(k, l)) = kGradientScale * gamma.matrix(k, l);
    }
  }
  return g;
}

inline Eigen::VectorXd gradient(const CITensor& t, int kept) {
  return gradient_from_rdm(truncated_rdm1(t, kept));
}

/// Hessian over the cross block.
///
/// Only the 2-RDM blocks the formula touches are formed: for every kept
/// (N-2)-subset J the pair amplitudes v_J[p, q] = sign(p, q, J) d_{J+p+q} are
/// split into kept-kept (A), removed-removed (B) and kept-removed (P) parts, so
///   Gamma_{kabl} = sum_J A_J[k, a] B_J[l, b],   Gamma_{kbal} = -sum_J P_J[k, b] P_J[a, l].
/// For a single particle both 2-RDM terms vanish identically.
inline Eigen::MatrixXd hessian_from_rdm(const CITensor& t, const TruncatedRDM1& gamma) {
  const int M = t.num_orbitals();
  const int N = t.num_particles();
  const int m = gamma.kept;
  const int r = M - m;
  const CrossBlock block{M, m};
  const Eigen::Index dim = block.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  if (dim == 0) return H;

  if (N >= 2) {
    const auto pairs = static_cast<Eigen::Index>(binomial(m, N - 2));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(pairs, static_cast<Eigen::Index>(m) * m);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(pairs, static_cast<Eigen::Index>(r) * r);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(pairs, dim);
    const SubsetTable& dets = subsets(M, N);
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
          if (rest_max >= m) continue;
          const double v = ((i + j - 1) % 2 == 0) ? value : -value;
          const auto row = static_cast<Eigen::Index>(colex_rank_without(K, i, j));
          const int p = K[i];
          const int q = K[j];  // p < q
          if (q < m) {
            A(row, static_cast<Eigen::Index>(p) * m + q) = v;
            A(row, static_cast<Eigen::Index>(q) * m + p) = -v;
          } else if (p >= m) {
            B(row, static_cast<Eigen::Index>(p - m) * r + (q - m)) = v;
            B(row, static_cast<Eigen::Index>(q - m) * r + (p - m)) = -v;
          } else {
            P(row, block.index(p, q)) = v;
          }
        }
      }
    }
    const Eigen::MatrixXd AB = A.transpose() * B;  // (k, a) x (l, b)
    const Eigen::MatrixXd PP = P.transpose() * P;  // (k, b) x (a, l)
    for (int k = 0; k < m; ++k) {
      for (int l = m; l < M; ++l) {
        const Eigen::Index row = block.index(k, l);
        for (int a = 0; a < m; ++a) {
          for (int b = m; b < M; ++b) {
            const double gamma_kabl = AB(static_cast<Eigen::Index>(k) * m + a,
                                         static_cast<Eigen::Index>(l - m) * r + (b - m));
            const double gamma_kbal = -PP(block.index(k, b), block.index(a, l));
            H(row, block.index(a, b)) = 2.0 * (gamma_kabl + gamma_kbal);
          }
        }
      }
    }
  }

  for (int k = 0; k < m; ++k) {
    for (int l = m; l < M; ++l) {
      const Eigen::Index row = block.index(k, l);
      for (int b = m; b < M; ++b) H(row, block.index(k, b)) += 2.0 * gamma.matrix(l, b);
      for (int a = 0; a < m; ++a) H(row, block.index(a, l)) -= 2.0 * gamma.matrix(k, a);
    }
  }
  return 0.5 * (H + H.transpose());
}

inline Eigen::MatrixXd hessian(const CITensor& t, int kept) {
  return hessian_from_rdm(t, truncated_rdm1(t, kept));
}

/// Hessian assembled entry by entry from the full truncated 2-RDM. Slower
/// than hessian(); kept as a cross-check of the block contraction.
inline Eigen::MatrixXd hessian_from_full_rdm2(const TruncatedRDM1& gamma, const TruncatedRDM2& Gamma) {
  const int M = Gamma.num_orbitals;
  const int m = gamma.kept;
  const CrossBlock block{M, m};
  Eigen::MatrixXd H(block.size(), block.size());
  for (int k = 0; k < m; ++k) {
    for (int l = m; l < M; ++l) {
      for (int a = 0; a < m; ++a) {
        for (int b = m; b < M; ++b) {
          double value = Gamma(k, a, b, l) + Gamma(k, b, a, l);
          if (a == k) value += gamma.matrix(l, b);
          if (b == l) value -= gamma.matrix(k, a);
          H(block.index(k, l), block.index(a, b)) = 2.0 * value;
        }
      }
    }
  }
  return H;
}

}  // namespace rbci
