#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace nordic {

// Named purposes for seed derivation. Each (base seed, replication, purpose)
// triple maps to an independent mt19937_64 stream.
enum class Stream : std::uint64_t {
  kTrain = 1,
  kTune = 2,
  kTest = 3,
  kSplit = 4,
  kProbe = 5,
  kOracle = 6,
};

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, Stream purpose);

// Seedable generator with platform-independent variate algorithms. The
// standard <random> distributions are implementation defined, so uniform,
// normal and integer draws are computed here from the raw 64-bit engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal();

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nordic
