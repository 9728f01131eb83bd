#ifndef ATTACKLAB_RNG_HPP
#define ATTACKLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace attacklab {

// Counter-based splittable generator.  A stream is (key, counter); each output
// is a strong 64-bit hash of key + counter, so streams can be split by key
// derivation without coordinating counters.  Every random quantity in the lab
// flows from one root seed through child() calls, which keeps per-trial and
// per-iteration sub-streams reproducible bit for bit regardless of how much
// randomness sibling streams consume.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x5851F42D4C957F2DULL)) {}

  std::uint64_t next_u64() {
    ctr_ += 0x9E3779B97F4A7C15ULL;
    return mix(key_ ^ ctr_);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Independent child stream; depends only on this stream's key and the tag,
  // never on how far this stream has advanced.
  Rng child(std::uint64_t tag) const {
    Rng c(0);
    c.key_ = mix(key_ ^ mix(tag + 0x632BE59BD9B4E019ULL));
    c.ctr_ = 0;
    c.has_spare_ = false;
    return c;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace attacklab

#endif
