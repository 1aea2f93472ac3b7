#ifndef SPIN_RNG_HPP_
#define SPIN_RNG_HPP_

#include <cstdint>

namespace spin {

// Inverse of the standard normal CDF (Wichura's AS241, double precision).
// Accurate to full double precision for p in (0,1); returns +-inf at 1/0.
double normal_quantile(double p);

// Seedable, portable random stream: xoshiro256++ state seeded through
// splitmix64. Every draw is a pure arithmetic function of the integer
// stream, so sequences are identical across platforms for a given seed.
//
// Substreams: child i of a stream with root seed s is a fresh stream whose
// root seed is a splitmix64-style hash of (s, i). Children with distinct
// indices are statistically independent; identical (seed, index) lineage
// reproduces identical output.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Deterministic child derivation; does not disturb this stream's state.
  RngStream substream(std::uint64_t index) const;
  // The seed a substream(index) would be constructed from.
  std::uint64_t child_seed(std::uint64_t index) const;
  std::uint64_t root_seed() const { return root_; }

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform01();
  // Uniform on the open interval (0,1); safe for inverse-CDF transforms.
  double uniform_open();
  // Uniform integer in [0, bound). Multiply-shift range reduction
  // (bias < bound * 2^-64, far below Monte Carlo resolution).
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal via normal_quantile(uniform_open()): one draw consumed.
  double normal();
  // Exponential with mean 1.
  double exponential();
  // Gamma(shape, scale 1), shape > 0. Marsaglia-Tsang squeeze for
  // shape >= 1; boosted by a power of a uniform below 1.
  double gamma(double shape);

 private:
  std::uint64_t s_[4];
  std::uint64_t root_;
};

}  // namespace spin

#endif  // SPIN_RNG_HPP_
