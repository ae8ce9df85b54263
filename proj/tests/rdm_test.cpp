#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dense_oracle.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"
#include "test_support.hpp"

using namespace rbci;
using testing_support::random_ci;
using testing_support::t3;
using testing_support::t5;

TEST(TruncatedRDM1, T5FullBasis) {
  const Eigen::MatrixXd g = truncated_rdm1(t5(), 3).matrix;
  Eigen::MatrixXd expected(3, 3);
  expected << 0.64, 0, -0.48, 0, 1.0, 0, -0.48, 0, 0.36;
  EXPECT_LT((g - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TruncatedRDM1, T5KeepTwoMatchesOracle) {
  const Eigen::MatrixXd g = truncated_rdm1(t5(), 2).matrix;
  const Eigen::MatrixXd reference = oracle::rdm1(oracle::densify(t5()), 2);
  EXPECT_LT((g - reference).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(g(0, 0), 0.64, 1e-15);
  EXPECT_NEAR(g(1, 1), 0.64, 1e-15);
  EXPECT_NEAR(g(2, 0), -0.48, 1e-15);
  EXPECT_NEAR(g(2, 2), 0.36, 1e-15);
}

TEST(TruncatedRDM1, SingleDeterminantIsIdempotent) {
  const CITensor t = make_tensor(5, 2, {{{0, 1}, 1.0}});
  for (int m = 2; m <= 5; ++m) {
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
    expected(0, 0) = expected(1, 1) = 1.0;
    EXPECT_EQ(truncated_rdm1(t, m).matrix, expected);
  }
}

TEST(TruncatedRDMs, MatchDenseOracle) {
  for (int M = 3; M <= 6; ++M) {
    for (int N = 1; N <= 3; ++N) {
      const CITensor t = random_ci(M, N, static_cast<std::uint64_t>(M * 7 + N));
      const auto dense = oracle::densify(t);
      for (int m = N; m <= M; ++m) {
        EXPECT_LT((truncated_rdm1(t, m).matrix - oracle::rdm1(dense, m)).cwiseAbs().maxCoeff(), 1e-13);
        if (N < 2) continue;
        const TruncatedRDM2 G = truncated_rdm2(t, m);
        for (int k = 0; k < M; ++k)
          for (int l = 0; l < M; ++l)
            for (int b = 0; b < M; ++b)
              for (int a = 0; a < M; ++a)
                ASSERT_NEAR(G(k, l, b, a), oracle::rdm2(dense, m, k, l, b, a), 1e-13);
      }
    }
  }
}

TEST(TruncatedRDM2, TwoParticlesHaveNoInternalSum) {
  const CITensor t = t5();
  const auto dense = oracle::densify(t);
  const TruncatedRDM2 G = truncated_rdm2(t, 2);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          const int kl[] = {k, l};
          const int ab[] = {a, b};
          EXPECT_NEAR(G(k, l, b, a), 2.0 * tensor_element(t, kl) * tensor_element(t, ab), 1e-15);
        }
}

TEST(TruncatedRDM2, SingleDeterminantLeavesUnoccupiedOrbitalOut) {
  const TruncatedRDM2 G = truncated_rdm2(make_tensor(3, 2, {{{0, 1}, 1.0}}), 3);
  EXPECT_NEAR(G(0, 1, 1, 0), 1.0, 1e-15);
  EXPECT_NEAR(G(0, 1, 0, 1), -1.0, 1e-15);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) {
        EXPECT_EQ(G(2, x, y, z), 0.0);
        EXPECT_EQ(G(x, 2, y, z), 0.0);
        EXPECT_EQ(G(x, y, 2, z), 0.0);
        EXPECT_EQ(G(x, y, z, 2), 0.0);
      }
}

TEST(TruncatedRDM2, RejectsSingleParticle) {
  EXPECT_THROW(truncated_rdm2(random_ci(4, 1, 0), 2), std::invalid_argument);
}

TEST(RDMProperty, TraceAndPartialTrace) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const int M = 5 + static_cast<int>(s % 4);
    const int N = 3 + static_cast<int>(s % 2);
    const CITensor t = random_ci(M, N, s);
    EXPECT_NEAR(truncated_rdm1(t, M).matrix.trace(), N, 1e-12);
    for (int m = N; m <= M; ++m) {
      const TruncatedRDM1 g = truncated_rdm1(t, m);
      EXPECT_LE(g.matrix.trace(), N + 1e-12);
      EXPECT_NEAR(kept_trace_norm(g, N), kept_norm(t, m), 1e-12);
      const TruncatedRDM2 G = truncated_rdm2(t, m);
      for (int k = 0; k < M; ++k)
        for (int a = 0; a < M; ++a) {
          double sum = 0.0;
          for (int l = 0; l < m; ++l) sum += G(k, l, l, a);
          EXPECT_NEAR(sum, (N - 1) * g.matrix(k, a), 1e-12);
        }
    }
  }
}

TEST(NaturalBasis, OccupationsOfReferenceTensors) {
  const NaturalBasis a = natural_orbitals(t5());
  EXPECT_LT((a.occupations - Eigen::Vector3d(1, 1, 0)).cwiseAbs().maxCoeff(), 1e-14);
  const NaturalBasis b = natural_orbitals(t3());
  EXPECT_LT((b.occupations - Eigen::Vector4d::Constant(0.5)).cwiseAbs().maxCoeff(), 1e-14);
  const NaturalBasis c = natural_orbitals(make_tensor(4, 2, {{{1, 3}, 1.0}}));
  EXPECT_LT((c.occupations - Eigen::Vector4d(1, 1, 0, 0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NaturalBasis, DiagonalizesAndIsDescending) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const CITensor t = random_ci(8, 3, s);
    const NaturalBasis nb = natural_orbitals(t);
    const Eigen::MatrixXd g = truncated_rdm1(t, 8).matrix;
    const Eigen::MatrixXd D = nb.orbitals.transpose() * g * nb.orbitals;
    EXPECT_LT((D - Eigen::MatrixXd(nb.occupations.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 1; i < nb.occupations.size(); ++i) {
      EXPECT_GE(nb.occupations(i - 1), nb.occupations(i));
    }
  }
}

TEST(NaturalBasis, DegenerateChoiceIgnoresInputBasis) {
  // the same degenerate spectrum presented in two rotated bases yields the same vectors
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(5, 5);
  D.diagonal() << 0.9, 0.5, 0.5, 0.5, 0.1;
  const Eigen::MatrixXd V = testing_support::random_orthogonal(5, 3);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(5, 5);
  R.block(1, 1, 3, 3) = testing_support::random_orthogonal(3, 4);
  const NaturalBasis a = natural_basis(V * D * V.transpose());
  const Eigen::MatrixXd W = V * R;
  const NaturalBasis b = natural_basis(W * D * W.transpose());
  EXPECT_LT((a.orbitals - b.orbitals).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.occupations - b.occupations).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Entropy, ReferenceValues) {
  const NaturalBasis single = natural_orbitals(make_tensor(4, 2, {{{0, 1}, 1.0}}));
  EXPECT_EQ(correlation_entropy(single.occupations, 2), 0.0);
  EXPECT_NEAR(correlation_entropy(natural_orbitals(t3()).occupations, 2), std::log(2.0), 1e-12);
  EXPECT_THROW(correlation_entropy(Eigen::Vector2d(1.5, 0.0), 1), std::domain_error);
}

TEST(SubsetContributions, ReferenceTensors) {
  const int two[] = {0, 1};
  const auto a = subset_contributions(t3(), two);
  EXPECT_NEAR(a.values[0b00], 0.5, 1e-15);
  EXPECT_NEAR(a.values[0b11], 0.5, 1e-15);
  EXPECT_EQ(a.values[0b01], 0.0);
  EXPECT_EQ(a.values[0b10], 0.0);
  const auto b = subset_contributions(t5(), two);
  EXPECT_NEAR(b.values[0b11], 0.64, 1e-15);
  EXPECT_NEAR(b.values[0b10], 0.36, 1e-15);
  EXPECT_EQ(b.values[0b00] + b.values[0b01], 0.0);
  const int three[] = {0, 1, 2};
  const auto c = subset_contributions(make_tensor(3, 2, {{{0, 1}, 1.0}}), three);
  EXPECT_EQ(c.values[0b011], 1.0);
  EXPECT_EQ(std::accumulate(c.values.begin(), c.values.end(), 0.0), 1.0);
}
