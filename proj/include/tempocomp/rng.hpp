#pragma once

#include <cstdint>
#include <random>

namespace tempocomp {

// splitmix64 step; whitens (seed, purpose, channel, frame) tuples into
// mt19937_64 seeds so every noise substream is statistically independent.
uint64_t splitmix64(uint64_t x);

uint64_t mix_keys(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

// mt19937_64 output is pinned by the standard; std::normal_distribution is
// not, so the gaussian is an explicit Box-Muller. Keeps artifacts
// byte-identical across toolchains.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  double uniform();   // [0,1)
  double gaussian();  // N(0,1)

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tempocomp
