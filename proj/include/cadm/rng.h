#ifndef CADM_RNG_H_
#define CADM_RNG_H_

#include <cstdint>
#include <random>

namespace cadm {

// Seeded random source with platform-independent output.
//
// std::mt19937_64 is fully specified by the standard, but the std::*
// distributions are not, so the conversions to uniform reals, bounded
// integers and normals are done here. Two Rng objects with the same seed
// produce the same stream on every conforming implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t uniform_int(uint64_t bound);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stateless mixing of a base seed with a stream index; used to derive
// independent per-frame and per-cell streams.
uint64_t derive_seed(uint64_t base, uint64_t stream);

}  // namespace cadm

#endif  // CADM_RNG_H_
