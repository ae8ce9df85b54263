#pragma once

#include <cstdint>
#include <random>

namespace rbci {

/// Identifies one random draw in an ensemble: the run-wide seed plus the
/// sample's position. Sub-seeds depend on both and nothing else, so a sample
/// is reproducible no matter which worker generates it.
struct Seed {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t sub_seed(const Seed& seed) {
  return splitmix64(splitmix64(seed.master_seed) ^ splitmix64(~seed.sample_index));
}

/// Uniform doubles on [0, 1) from a 64-bit Mersenne twister. The conversion
/// takes the top 53 bits, so the stream is identical on every platform.
class UniformSource {
 public:
  explicit UniformSource(const Seed& seed) : engine_(sub_seed(seed)) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rbci
