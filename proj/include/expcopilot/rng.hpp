#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace expcopilot {

// Seeded generator with platform-stable draws. std::mt19937_64 output is fully
// specified by the standard, the distributions are not, so the bounded and
// real draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent sub-stream derived from a root seed and a stream name
  // ("ingest", "elicit", "suggest", "eval", ...).
  static Rng stream(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform in [0, 1).
  double uniform01();

  // First `count` entries of a uniformly shuffled 0..n-1 (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace expcopilot
