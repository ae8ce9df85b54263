#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbci {

struct TrustRegionStep {
  Eigen::VectorXd step;
  double predicted_increase = 0.0;  ///< g.s + s.H.s / 2
  bool on_boundary = false;
};

/// Maximizes the quadratic model g.s + s.H.s / 2 subject to |s| <= radius.
///
/// Works in the eigenbasis of B = -H (Moré-Sorensen): s(lambda) = (B + lambda I)^-1 g
/// with lambda >= max(0, -mu_min) chosen so that either lambda = 0 and the
/// Newton step fits, or |s(lambda)| = radius. Directions of zero curvature
/// with no gradient component are left untouched (minimum-norm step); the
/// hard case adds a multiple of the most negative curvature direction.
inline TrustRegionStep solve_trust_region_subproblem(const Eigen::VectorXd& g, const Eigen::MatrixXd& H,
                                                     double radius) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n) throw std::invalid_argument("trust region: dimension mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("trust region: radius must be positive");
  TrustRegionStep result{Eigen::VectorXd::Zero(n), 0.0, false};
  if (n == 0) return result;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-0.5 * (H + H.transpose()));
  const Eigen::VectorXd& mu = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& Q = solver.eigenvectors();
  const Eigen::VectorXd alpha = Q.transpose() * g;
  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  const double curvature_tol = 1e-12 * scale;
  const double gradient_tol = 1e-14 * std::max(1.0, g.norm());

  auto step_for = [&](double lambda, bool skip_flat) {
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom = mu(i) + lambda;
      if (skip_flat && denom <= curvature_tol) continue;
      coeff(i) = alpha(i) / denom;
    }
    return coeff;
  };
  auto finish = [&](const Eigen::VectorXd& coeff, bool boundary) {
    result.step = Q * coeff;
    result.predicted_increase = g.dot(result.step) + 0.5 * result.step.dot(H * result.step);
    result.on_boundary = boundary;
    return result;
  };

  const double mu_min = mu(0);
  // directions where B + lambda_low I is singular
  const double lambda_low = std::max(0.0, -mu_min);
  bool flat_has_gradient = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) + lambda_low <= curvature_tol && std::abs(alpha(i)) > gradient_tol) flat_has_gradient = true;
  }

  if (mu_min >= -curvature_tol && !flat_has_gradient) {
    // convex (possibly singular) model: try the minimum-norm Newton step
    const Eigen::VectorXd coeff = step_for(0.0, true);
    if (coeff.norm() <= radius) return finish(coeff, false);
  }

  if (!flat_has_gradient) {
    const Eigen::VectorXd coeff = step_for(lambda_low, true);
    const double inner = coeff.norm();
    if (inner <= radius) {
      if (mu_min >= -curvature_tol) return finish(coeff, false);
      // hard case: move along the most negative curvature direction to the boundary
      Eigen::VectorXd hard = coeff;
      const double tau = std::sqrt(std::max(0.0, radius * radius - inner * inner));
      hard(0) += (alpha(0) >= 0.0 ? tau : -tau);
      return finish(hard, true);
    }
  }

  // |s(lambda)| = radius for some lambda in (lambda_low, lambda_high]
  double lo = lambda_low;
  double hi = lambda_low + g.norm() / radius + curvature_tol;
  while (step_for(hi, false).norm() > radius) hi = 2.0 * hi + 1.0;
  double lambda = hi;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd coeff = step_for(lambda, false);
    const double norm = coeff.norm();
    if (std::abs(norm - radius) <= 1e-12 * radius) break;
    if (norm > radius) lo = lambda; else hi = lambda;
    // Newton update on 1/radius - 1/|s|, which is nearly linear in lambda
    double dnorm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom = mu(i) + lambda;
      dnorm -= alpha(i) * alpha(i) / (denom * denom * denom);
    }
    dnorm /= norm;
    double candidate = lambda - (1.0 / radius - 1.0 / norm) * norm * norm / dnorm;
    if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    lambda = candidate;
  }
  return finish(step_for(lambda, false), true);
}

}  // namespace rbci
