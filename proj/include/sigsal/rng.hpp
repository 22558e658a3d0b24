#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace sigsal {

struct Seed {
  std::uint64_t value = 0;
};

// splitmix64 finalizer; also used to expand seeds and derive sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Sub-seed for stream `index` of a parent seed (trial i, layer k, ...).
Seed derive_seed(Seed parent, std::uint64_t index);

// xoshiro256** seeded through splitmix64. Normals use the Box-Muller pair
// (cos branch first, sin branch cached for the next call).
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound);
  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  // +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> cached_normal_;
};

}  // namespace sigsal
