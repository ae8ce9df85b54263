#pragma once

// Ranking of k-subsets of {0, ..., n-1}.
//
// Determinants are addressed by the colexicographic rank of their sorted
// orbital tuple: rank(c_0 < c_1 < ... < c_{k-1}) = sum_t C(c_t, t + 1).
// Colex order has the property that all subsets of {0, ..., m-1} come first
// and keep their rank when n grows, so the kept-orbital block of a tensor is
// always the prefix of length C(m, k).

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rbci {

inline constexpr int kMaxOrbitals = 62;

namespace detail {

struct BinomialTable {
  std::array<std::array<std::uint64_t, kMaxOrbitals + 2>, kMaxOrbitals + 2> values{};

  constexpr BinomialTable() {
    for (int n = 0; n <= kMaxOrbitals + 1; ++n) {
      values[n][0] = 1;
      for (int k = 1; k <= n; ++k) {
        values[n][k] = values[n - 1][k - 1] + (k <= n - 1 ? values[n - 1][k] : 0);
      }
    }
  }
};

inline constexpr BinomialTable kBinomials{};

}  // namespace detail

/// C(n, k); zero when k < 0 or k > n.
constexpr std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (n > kMaxOrbitals + 1) throw std::out_of_range("binomial: n too large");
  return detail::kBinomials.values[n][k];
}

/// Colex rank of a strictly increasing tuple.
inline std::size_t colex_rank(std::span<const int> subset) {
  std::size_t rank = 0;
  for (std::size_t t = 0; t < subset.size(); ++t) {
    rank += binomial(subset[t], static_cast<int>(t) + 1);
  }
  return rank;
}

/// Colex rank of `subset` with the entry at position `skip` removed.
inline std::size_t colex_rank_without(std::span<const int> subset, std::size_t skip) {
  std::size_t rank = 0;
  for (std::size_t t = 0; t < subset.size(); ++t) {
    if (t == skip) continue;
    const int pos = static_cast<int>(t < skip ? t : t - 1);
    rank += binomial(subset[t], pos + 1);
  }
  return rank;
}

/// Colex rank of `subset` with the entries at positions `skip_a < skip_b` removed.
inline std::size_t colex_rank_without(std::span<const int> subset, std::size_t skip_a,
                                      std::size_t skip_b) {
  std::size_t rank = 0;
  for (std::size_t t = 0; t < subset.size(); ++t) {
    if (t == skip_a || t == skip_b) continue;
    int pos = static_cast<int>(t);
    if (t > skip_a) --pos;
    if (t > skip_b) --pos;
    rank += binomial(subset[t], pos + 1);
  }
  return rank;
}

/// Inverse of colex_rank for subsets of size k.
inline std::vector<int> colex_unrank(std::size_t rank, int k) {
  std::vector<int> subset(static_cast<std::size_t>(k));
  for (int t = k; t >= 1; --t) {
    int c = t - 1;
    while (binomial(c + 1, t) <= rank) ++c;
    subset[static_cast<std::size_t>(t - 1)] = c;
    rank -= binomial(c, t);
  }
  return subset;
}

/// All k-subsets of {0, ..., n-1}, stored flat in colex order.
class SubsetTable {
 public:
  SubsetTable(int n, int k) : n_(n), k_(k) {
    if (n < 0 || k < 0 || n > kMaxOrbitals) throw std::invalid_argument("SubsetTable: bad size");
    const std::size_t count = binomial(n, k);
    data_.reserve(count * static_cast<std::size_t>(k));
    if (count == 0) return;
    std::vector<int> current(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) current[static_cast<std::size_t>(t)] = t;
    for (std::size_t r = 0; r < count; ++r) {
      data_.insert(data_.end(), current.begin(), current.end());
      // advance to the next subset in colex order
      int t = 0;
      while (t < k) {
        const int limit = (t + 1 < k) ? current[static_cast<std::size_t>(t + 1)] : n;
        if (current[static_cast<std::size_t>(t)] + 1 < limit) break;
        ++t;
      }
      if (t == k) break;
      ++current[static_cast<std::size_t>(t)];
      for (int s = 0; s < t; ++s) current[static_cast<std::size_t>(s)] = s;
    }
  }

  int universe() const { return n_; }
  int arity() const { return k_; }
  std::size_t size() const { return k_ == 0 ? 1 : data_.size() / static_cast<std::size_t>(k_); }

  std::span<const int> operator[](std::size_t rank) const {
    return {data_.data() + rank * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }

 private:
  int n_;
  int k_;
  std::vector<int> data_;
};

/// Per-thread cache of subset tables; contraction kernels call this in loops.
inline const SubsetTable& subsets(int n, int k) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<SubsetTable>> cache;
  auto& slot = cache[{n, k}];
  if (!slot) slot = std::make_unique<SubsetTable>(n, k);
  return *slot;
}

/// Visits every k-subset of {0, ..., n-1} in lexicographic order.
template <typename Visitor>
void for_each_subset_lex(int n, int k, Visitor&& visit) {
  if (k < 0 || k > n) return;
  std::vector<int> current(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) current[static_cast<std::size_t>(t)] = t;
  while (true) {
    visit(std::span<const int>(current));
    int t = k - 1;
    while (t >= 0 && current[static_cast<std::size_t>(t)] == n - k + t) --t;
    if (t < 0) return;
    ++current[static_cast<std::size_t>(t)];
    for (int s = t + 1; s < k; ++s) {
      current[static_cast<std::size_t>(s)] = current[static_cast<std::size_t>(s - 1)] + 1;
    }
  }
}

}  // namespace rbci
