#pragma once

#include <cstdint>
#include <random>

namespace drape {

// splitmix64 finalizer; used to derive independent stream seeds from
// (session seed, iteration) pairs so that no RNG state has to be carried
// across pause/resume or checkpoints.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Thin wrapper over mt19937_64 with a portable [0,1) double draw. The
// standard distributions are implementation-defined, which would make
// output files differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace drape
