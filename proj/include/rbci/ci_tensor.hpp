#pragma once

// Antisymmetric CI coefficient tensors stored on ordered orbital tuples.
//
// A tensor over M orbitals and N particles keeps one real coefficient d_K per
// determinant K = (k_1 < ... < k_N), with sum_K d_K^2 = 1. The fully
// antisymmetric tensor c_{i_1...i_N} used in contraction formulas is
// c = sign(pi) d_{sort(i)} / sqrt(N!), which vanishes on repeated indices.
// Orbitals are 0-based throughout the library; files and the CLI are 1-based.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbci/combinatorics.hpp"
#include "rbci/seed.hpp"

namespace rbci {

/// Relative deviation of the squared norm from one that is left untouched by
/// the constructor, so already-normalized data round-trips bit for bit.
inline constexpr double kNormalizationSlack = 1e-14;

class CITensor {
 public:
  /// `coefficients` are indexed by colex rank and must have length C(M, N).
  CITensor(int num_orbitals, int num_particles, Eigen::VectorXd coefficients)
      : num_orbitals_(num_orbitals), num_particles_(num_particles),
        coefficients_(std::move(coefficients)) {
    if (num_particles < 1 || num_orbitals < 1) {
      throw std::invalid_argument("CITensor: need at least one orbital and one particle");
    }
    if (num_particles > num_orbitals) {
      throw std::invalid_argument("CITensor: more particles (" + std::to_string(num_particles) +
                                  ") than orbitals (" + std::to_string(num_orbitals) + ")");
    }
    if (num_orbitals > kMaxOrbitals) throw std::invalid_argument("CITensor: too many orbitals");
    if (static_cast<std::uint64_t>(coefficients_.size()) != binomial(num_orbitals, num_particles)) {
      throw std::invalid_argument("CITensor: coefficient vector has wrong length");
    }
    if (!coefficients_.allFinite()) throw std::invalid_argument("CITensor: non-finite coefficient");
    const double norm2 = coefficients_.squaredNorm();
    if (norm2 == 0.0) throw std::invalid_argument("CITensor: all coefficients are zero");
    if (std::abs(norm2 - 1.0) > kNormalizationSlack) coefficients_ /= std::sqrt(norm2);
  }

  int num_orbitals() const { return num_orbitals_; }
  int num_particles() const { return num_particles_; }
  std::size_t num_determinants() const { return static_cast<std::size_t>(coefficients_.size()); }

  /// Coefficients in colex order.
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// d_K for a strictly increasing tuple K.
  double coefficient(std::span<const int> orbitals) const {
    return coefficients_(static_cast<Eigen::Index>(colex_rank(orbitals)));
  }

  friend bool operator==(const CITensor& a, const CITensor& b) {
    return a.num_orbitals_ == b.num_orbitals_ && a.num_particles_ == b.num_particles_ &&
           a.coefficients_ == b.coefficients_;
  }

 private:
  int num_orbitals_;
  int num_particles_;
  Eigen::VectorXd coefficients_;
};

/// Number of kept orbitals m; the kept orbitals are 0..m-1 of the working basis.
struct OrbitalPartition {
  int kept = 0;
};

inline void require_partition(const CITensor& t, int kept) {
  if (kept < t.num_particles() || kept > t.num_orbitals()) {
    throw std::invalid_argument("kept orbital count " + std::to_string(kept) +
                                " outside [" + std::to_string(t.num_particles()) + ", " +
                                std::to_string(t.num_orbitals()) + "]");
  }
}

struct TensorEntry {
  std::vector<int> orbitals;
  double value = 0.0;
};

/// Builds a normalized tensor from explicit determinant entries.
inline CITensor make_tensor(int num_orbitals, int num_particles,
                            std::span<const TensorEntry> entries) {
  if (num_particles < 1 || num_orbitals < 1 || num_particles > num_orbitals) {
    throw std::invalid_argument("make_tensor: need 1 <= N <= M");
  }
  if (num_orbitals > kMaxOrbitals) throw std::invalid_argument("make_tensor: too many orbitals");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(binomial(num_orbitals, num_particles)));
  std::vector<bool> seen(static_cast<std::size_t>(coeffs.size()), false);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& orbs = entries[e].orbitals;
    const std::string where = "make_tensor: entry " + std::to_string(e) + ": ";
    if (static_cast<int>(orbs.size()) != num_particles) {
      throw std::invalid_argument(where + "expected " + std::to_string(num_particles) +
                                  " orbitals");
    }
    for (std::size_t p = 0; p < orbs.size(); ++p) {
      if (orbs[p] < 0 || orbs[p] >= num_orbitals) {
        throw std::invalid_argument(where + "orbital index out of range");
      }
      if (p > 0 && orbs[p] == orbs[p - 1]) {
        throw std::invalid_argument(where + "repeated orbital index");
      }
      if (p > 0 && orbs[p] < orbs[p - 1]) {
        throw std::invalid_argument(where + "orbital tuple not strictly increasing");
      }
    }
    const std::size_t rank = colex_rank(orbs);
    if (seen[rank]) throw std::invalid_argument(where + "duplicate determinant");
    seen[rank] = true;
    coeffs(static_cast<Eigen::Index>(rank)) = entries[e].value;
  }
  return CITensor(num_orbitals, num_particles, std::move(coeffs));
}

inline CITensor make_tensor(int num_orbitals, int num_particles,
                            std::initializer_list<TensorEntry> entries) {
  return make_tensor(num_orbitals, num_particles,
                     std::span<const TensorEntry>(entries.begin(), entries.size()));
}

/// c_{idx} = sign(pi) d_{sort(idx)} / sqrt(N!) for an arbitrary index tuple.
inline double tensor_element(const CITensor& t, std::span<const int> idx) {
  if (static_cast<int>(idx.size()) != t.num_particles()) {
    throw std::invalid_argument("tensor_element: wrong number of indices");
  }
  std::vector<int> sorted(idx.begin(), idx.end());
  for (int i : sorted) {
    if (i < 0 || i >= t.num_orbitals()) throw std::out_of_range("tensor_element: index out of range");
  }
  // insertion sort, counting transpositions for the permutation sign
  int swaps = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    for (std::size_t j = i; j > 0 && sorted[j - 1] > sorted[j]; --j) {
      std::swap(sorted[j - 1], sorted[j]);
      ++swaps;
    }
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) return 0.0;
  }
  double factorial = 1.0;
  for (int k = 2; k <= t.num_particles(); ++k) factorial *= k;
  const double value = t.coefficient(sorted) / std::sqrt(factorial);
  return (swaps % 2 == 0) ? value : -value;
}

/// Random tensor with every coefficient set to (r1 - r2) / (r3 - r4), the r_i
/// uniform on [0, 1) and drawn tuple by tuple in lexicographic tuple order.
/// A zero denominator redraws all four numbers for that tuple.
inline CITensor random_tensor(int num_orbitals, int num_particles, const Seed& seed) {
  if (num_particles < 1 || num_orbitals < 1 || num_particles > num_orbitals) {
    throw std::invalid_argument("random_tensor: need 1 <= N <= M");
  }
  if (num_orbitals > kMaxOrbitals) throw std::invalid_argument("random_tensor: too many orbitals");
  UniformSource uniform(seed);
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(binomial(num_orbitals, num_particles)));
  for_each_subset_lex(num_orbitals, num_particles, [&](std::span<const int> subset) {
    double value = 0.0;
    while (true) {
      const double r1 = uniform.next();
      const double r2 = uniform.next();
      const double r3 = uniform.next();
      const double r4 = uniform.next();
      if (r3 != r4) {
        value = (r1 - r2) / (r3 - r4);
        break;
      }
    }
    coeffs(static_cast<Eigen::Index>(colex_rank(subset))) = value;
  });
  return CITensor(num_orbitals, num_particles, std::move(coeffs));
}

struct Truncation {
  CITensor tensor;        ///< renormalized coefficients over the kept orbitals
  double retained_norm;   ///< sum of squared kept coefficients; equals (1 - lambda)^2
};

/// Projects onto determinants built only from orbitals 0..m-1 and renormalizes.
/// The optimal reduced-basis coefficients are the kept coefficients up to the
/// global factor 1/sqrt(retained_norm).
inline Truncation truncate_and_renormalize(const CITensor& t, OrbitalPartition partition) {
  require_partition(t, partition.kept);
  const auto kept_count =
      static_cast<Eigen::Index>(binomial(partition.kept, t.num_particles()));
  Eigen::VectorXd kept = t.coefficients().head(kept_count);
  const double retained = kept.squaredNorm();
  if (retained == 0.0) {
    throw std::domain_error("truncate_and_renormalize: no determinant survives truncation");
  }
  kept /= std::sqrt(retained);
  return {CITensor(partition.kept, t.num_particles(), std::move(kept)), retained};
}

/// ||Psi - Phi||^2 = 2 - 2 sqrt(N) for the optimally scaled truncation.
inline double distance_from_norm(double retained_norm) {
  constexpr double tol = 1e-12;
  if (!(retained_norm >= -tol && retained_norm <= 1.0 + tol)) {
    throw std::domain_error("distance_from_norm: retained norm outside [0, 1]");
  }
  return 2.0 - 2.0 * std::sqrt(std::clamp(retained_norm, 0.0, 1.0));
}

}  // namespace rbci
