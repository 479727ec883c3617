#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stfe {

// Counter-based random numbers. Every draw is a pure function of a 64-bit
// seed plus a handful of integer coordinates, so ensembles can be evaluated
// in any order (or in parallel) and still produce bit-identical streams.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; full-avalanche mix of one word.
inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fold(std::uint64_t h, std::uint64_t w) {
  return mix(h ^ (w + kGolden + (h << 6) + (h >> 2)));
}

// Stream domains keep unrelated consumers of the same seed independent.
enum class Stream : std::uint64_t {
  BrownianBase = 1,
  BrownianBridge = 2,
  NoiseAdhoc = 3,
  MaxregCoeff = 4,
  MaxregForcing = 5,
  CaccInit = 6,
  CaccCube = 7,
  Corpus = 8,
};

struct Key {
  std::uint64_t seed = 0;
  Stream stream = Stream::NoiseAdhoc;
  std::uint64_t a = 0, b = 0, c = 0, d = 0;

  std::uint64_t state() const {
    std::uint64_t h = mix(seed ^ kGolden);
    h = fold(h, static_cast<std::uint64_t>(stream));
    h = fold(h, a);
    h = fold(h, b);
    h = fold(h, c);
    h = fold(h, d);
    return h;
  }
};

// Uniform in (0,1]; never returns 0 so log() below is safe.
inline double uniform(const Key& k) {
  const std::uint64_t h = k.state();
  return static_cast<double>((h >> 11) + 1) * 0x1p-53;
}

// Uniform in [lo, hi).
inline double uniform(const Key& k, double lo, double hi) {
  const std::uint64_t h = k.state();
  return lo + (hi - lo) * (static_cast<double>(h >> 11) * 0x1p-53);
}

// Standard normal via Box-Muller (cosine branch).
inline double normal(const Key& k) {
  const std::uint64_t h = k.state();
  const double u1 = static_cast<double>((h >> 11) + 1) * 0x1p-53;
  const double u2 = static_cast<double>(mix(h ^ kGolden) >> 11) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

// Brownian increments of one scalar driver on the dyadic refinement of a
// base time grid. Level 0 splits [0, T] into `base_steps` intervals of
// length dt0; level l halves each interval l times. Increments at level l+1
// are obtained from level l by the Brownian bridge, so two half-increments
// sum to their parent (up to one rounding error) and refining the step size
// keeps the driving path fixed.
class BrownianTree {
 public:
  BrownianTree(std::uint64_t seed, std::uint32_t path, std::uint32_t mode,
               double dt0)
      : seed_(seed), path_(path), mode_(mode), dt0_(dt0) {}

  // Increment of W over the dyadic interval [j, j+1] * dt0 / 2^level.
  double increment(int level, std::uint64_t index) const {
    if (level == 0) {
      rng::Key k{seed_, rng::Stream::BrownianBase,
                 path_, mode_, 0, index};
      return std::sqrt(dt0_) * rng::normal(k);
    }
    const double parent = increment(level - 1, index >> 1);
    const double half = 0.5 * std::sqrt(dt0_ / double(1ull << (level - 1)));
    rng::Key k{seed_, rng::Stream::BrownianBridge,
               path_, mode_, static_cast<std::uint64_t>(level), index >> 1};
    const double left = 0.5 * parent + half * rng::normal(k);
    return (index & 1u) ? parent - left : left;
  }

 private:
  std::uint64_t seed_;
  std::uint32_t path_, mode_;
  double dt0_;
};

}  // namespace stfe
