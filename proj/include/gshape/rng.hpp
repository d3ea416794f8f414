#pragma once

#include <cstdint>
#include <initializer_list>

namespace gshape {

/// SplitMix64 finaliser; used for seeding and for deriving sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic child seed from a parent seed and a list of stream indices.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// xoshiro256** with Marsaglia polar normals. The bit stream and the normal
/// transform are fully specified here, so draws are identical on every
/// platform (unlike std::normal_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gshape
