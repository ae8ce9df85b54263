#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

#include "rbci/ci_tensor.hpp"
#include "rbci/rotation.hpp"

namespace testing_support {

// (1,2) in 1-based notation is {0, 1} here.
inline rbci::CITensor single_determinant(int M = 3) { return rbci::make_tensor(M, 2, {{{0, 1}, 1.0}}); }

inline rbci::CITensor t3() {
  return rbci::make_tensor(4, 2, {{{0, 1}, std::sqrt(0.5)}, {{2, 3}, std::sqrt(0.5)}});
}

inline rbci::CITensor t5() { return rbci::make_tensor(3, 2, {{{0, 1}, 0.8}, {{1, 2}, 0.6}}); }

inline rbci::CITensor random_ci(int M, int N, std::uint64_t index, std::uint64_t master = 2024) {
  return rbci::random_tensor(M, N, rbci::Seed{master, index});
}

// Haar-like random orthogonal matrix with det +1.
inline Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = normal(engine);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

// reduced norm after applying exp of the cross-block generator with `params`
inline double norm_at(const rbci::CITensor& t, int m, const Eigen::VectorXd& params) {
  const rbci::CrossBlock block{t.num_orbitals(), m};
  return rbci::reduced_norm(t, rbci::exp_antisymmetric(rbci::cross_block_generator(block, params)), m);
}

inline Eigen::VectorXd fd_gradient(const rbci::CITensor& t, int m, double h) {
  const rbci::CrossBlock block{t.num_orbitals(), m};
  Eigen::VectorXd g(block.size());
  for (Eigen::Index i = 0; i < block.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(block.size());
    e(i) = h;
    g(i) = (norm_at(t, m, e) - norm_at(t, m, -e)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const rbci::CITensor& t, int m, double h) {
  const rbci::CrossBlock block{t.num_orbitals(), m};
  const Eigen::Index n = block.size();
  Eigen::MatrixXd H(n, n);
  const double centre = norm_at(t, m, Eigen::VectorXd::Zero(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
    ei(i) = h;
    H(i, i) = (norm_at(t, m, ei) - 2.0 * centre + norm_at(t, m, -ei)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
      ej(j) = h;
      const double v = (norm_at(t, m, ei + ej) - norm_at(t, m, ei - ej) - norm_at(t, m, ej - ei) +
                        norm_at(t, m, -ei - ej)) /
                       (4.0 * h * h);
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

}  // namespace testing_support
