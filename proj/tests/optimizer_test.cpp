#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbci/fixed_point.hpp"
#include "rbci/guess.hpp"
#include "rbci/newton.hpp"
#include "rbci/trust_region.hpp"
#include "test_support.hpp"

using namespace rbci;
using testing_support::random_ci;
using testing_support::random_orthogonal;

namespace {

double model(const Eigen::VectorXd& g, const Eigen::MatrixXd& H, const Eigen::VectorXd& s) {
  return g.dot(s) + 0.5 * s.dot(H * s);
}

}  // namespace

TEST(TrustRegion, InteriorNewtonStep) {
  Eigen::MatrixXd H(2, 2);
  H << -2, 0, 0, -4;
  const Eigen::Vector2d g(0.1, 0.2);
  const TrustRegionStep s = solve_trust_region_subproblem(g, H, 1.0);
  EXPECT_FALSE(s.on_boundary);
  EXPECT_LT((s.step - Eigen::Vector2d(0.05, 0.05)).norm(), 1e-15);
  EXPECT_NEAR(s.predicted_increase, model(g, H, s.step), 1e-15);
}

TEST(TrustRegion, ClippedToBoundary) {
  Eigen::MatrixXd H(2, 2);
  H << -1, 0, 0, -1;
  const Eigen::Vector2d g(3.0, 4.0);
  const TrustRegionStep s = solve_trust_region_subproblem(g, H, 0.5);
  EXPECT_TRUE(s.on_boundary);
  EXPECT_NEAR(s.step.norm(), 0.5, 1e-12);
  EXPECT_LT((s.step - 0.1 * g).norm(), 1e-12);
}

TEST(TrustRegion, HardCaseUsesCurvatureDirection) {
  Eigen::MatrixXd H(2, 2);
  H << 1, 0, 0, -1;
  const Eigen::Vector2d g(0.0, 0.0);
  const TrustRegionStep s = solve_trust_region_subproblem(g, H, 0.3);
  EXPECT_TRUE(s.on_boundary);
  EXPECT_NEAR(std::abs(s.step(0)), 0.3, 1e-12);
  EXPECT_NEAR(s.predicted_increase, 0.5 * 0.09, 1e-12);
}

TEST(TrustRegion, FlatDirectionsWithoutGradientAreLeftAlone) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 3);
  H(0, 0) = -2.0;
  const Eigen::Vector3d g(0.2, 0.0, 0.0);
  const TrustRegionStep s = solve_trust_region_subproblem(g, H, 1.0);
  EXPECT_LT((s.step - Eigen::Vector3d(0.1, 0, 0)).norm(), 1e-15);
}

TEST(TrustRegion, GlobalOptimumOnTheBallProperty) {
  std::mt19937_64 engine(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      g(i) = normal(engine);
      for (int j = 0; j < n; ++j) A(i, j) = normal(engine);
    }
    const Eigen::MatrixXd H = A + A.transpose();
    const double radius = 0.05 + std::abs(normal(engine));
    const TrustRegionStep s = solve_trust_region_subproblem(g, H, radius);
    ASSERT_LE(s.step.norm(), radius * (1 + 1e-10));
    const double best = model(g, H, s.step);
    for (int k = 0; k < 500; ++k) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = normal(engine);
      x *= radius * std::pow(std::uniform_real_distribution<double>(0, 1)(engine), 1.0 / n) / x.norm();
      ASSERT_LE(model(g, H, x), best + 1e-10) << "trial " << trial;
    }
  }
}

TEST(Newton, T5FromIdentityReachesExactRepresentation) {
  const OptimizationReport r = newton_trust_region(testing_support::t5(), 2, Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(r.status, Status::converged);
  EXPECT_NEAR(r.retained_norm, 1.0, 1e-12);
  EXPECT_LT(r.gradient_norm, 1.5e-8);
  EXPECT_NEAR(r.initial_norm, 0.64, 1e-15);
}

TEST(Newton, T3IsAlreadyStationary) {
  const OptimizationReport r = newton_trust_region(testing_support::t3(), 2, Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(r.status, Status::converged);
  EXPECT_EQ(r.accepted_steps, 0);
  EXPECT_NEAR(r.retained_norm, 0.5, 1e-15);
}

TEST(Newton, SingleDeterminantFromAnyStart) {
  const CITensor t = make_tensor(6, 3, {{{0, 2, 4}, 1.0}});
  for (std::uint64_t s = 0; s < 5; ++s) {
    const OptimizationReport r = newton_trust_region(t, 3, random_orthogonal(6, s));
    EXPECT_EQ(r.status, Status::converged);
    EXPECT_NEAR(r.retained_norm, 1.0, 1e-10);
  }
}

TEST(NewtonProperty, MonotoneAndStationaryAtConvergence) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const CITensor t = random_ci(7, 3, s);
    const int m = 3 + static_cast<int>(s % 3);
    const OptimizationReport r = newton_trust_region(t, m, random_orthogonal(7, s + 5));
    double previous = r.initial_norm;
    for (const auto& it : r.history) {
      EXPECT_GE(it.retained_norm, previous - 1e-12);
      previous = it.retained_norm;
    }
    ASSERT_EQ(r.status, Status::converged);
    EXPECT_NEAR(r.retained_norm, reduced_norm(t, r.rotation, m), 1e-13);
    const Eigen::MatrixXd gamma = truncated_rdm1(rotate_tensor(t, r.rotation), m).matrix;
    EXPECT_LT(gamma.block(0, m, m, 7 - m).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LT(r.hessian_max_eigenvalue, 1e-8);
  }
}

TEST(Newton, RespectsIterationLimit) {
  NewtonOptions options;
  options.max_iter = 1;
  const OptimizationReport r = newton_trust_region(random_ci(8, 3, 2), 4, Eigen::MatrixXd::Identity(8, 8), options);
  EXPECT_EQ(r.status, Status::max_iter);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Newton, NoFreeParametersAtFullBasis) {
  const OptimizationReport r = newton_trust_region(random_ci(5, 2, 0), 5, Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(r.status, Status::converged);
  EXPECT_NEAR(r.retained_norm, 1.0, 1e-14);
  EXPECT_EQ(r.hessian_max_eigenvalue, -std::numeric_limits<double>::infinity());
}

TEST(Status, TokensRoundTrip) {
  for (Status s : {Status::converged, Status::max_iter, Status::oscillation_detected}) {
    EXPECT_EQ(parse_status(to_string(s)), s);
  }
  EXPECT_THROW(parse_status("done"), std::invalid_argument);
}

TEST(FixedPoint, T5Converges) {
  const OptimizationReport r = naive_fixed_point(testing_support::t5(), 2);
  EXPECT_EQ(r.status, Status::converged);
  EXPECT_NEAR(r.retained_norm, 1.0, 1e-12);
}

TEST(FixedPoint, SingleDeterminantConvergesInOneIteration) {
  const OptimizationReport r = naive_fixed_point(make_tensor(6, 3, {{{1, 3, 5}, 1.0}}), 3);
  EXPECT_EQ(r.status, Status::converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(r.retained_norm, 1.0, 1e-14);
}

// M = 8, N = 4, master seed 1, sample 2, m = 6: the fixed point alternates
// between two bases whose retained norms differ in the third digit.
TEST(FixedPoint, PinnedTwoCycleIsReported) {
  const CITensor t = random_tensor(8, 4, Seed{1, 2});
  const OptimizationReport r = naive_fixed_point(t, 6);
  EXPECT_EQ(r.status, Status::oscillation_detected);
  ASSERT_GE(r.history.size(), 3u);
  const auto n = r.history.size();
  EXPECT_GT(std::abs(r.history[n - 1].retained_norm - r.history[n - 2].retained_norm), 1e-3);
  EXPECT_LT(std::abs(r.history[n - 1].retained_norm - r.history[n - 3].retained_norm), 1e-12);
  const OptimizationReport again = naive_fixed_point(t, 6);
  EXPECT_EQ(again.iterations, r.iterations);
  EXPECT_EQ(again.retained_norm, r.retained_norm);
  // Newton from the natural orbitals reaches at least the better of the two values
  const OptimizationReport newton = newton_trust_region(t, 6, highest_no_guess(t, 6));
  EXPECT_EQ(newton.status, Status::converged);
  EXPECT_GE(newton.retained_norm, std::max(r.history[n - 1].retained_norm, r.history[n - 2].retained_norm) - 1e-12);
}
