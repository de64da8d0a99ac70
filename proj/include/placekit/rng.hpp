#pragma once

#include <cmath>
#include <cstdint>

#include "placekit/numerics.hpp"

namespace placekit {

// Counter-based generator: output k of stream s is mix(key(seed, s) + k*GAMMA),
// the SplitMix64 construction.  Streams are independent, random-access, and
// cheap to fork per path, which makes parallel simulation deterministic.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(derive(seed, stream)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++ctr_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on the open interval (0, 1)
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return num::normal_quantile(next_uniform()); }

  double next_exponential(double rate) {
    return -std::log(next_uniform()) / rate;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
    return z ^ (z >> 33);
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed ^ 0x6A09E667F3BCC909ull) ^
               (stream * 0x9E3779B97F4A7C15ull + 0xBB67AE8584CAA73Bull));
  }
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace placekit
