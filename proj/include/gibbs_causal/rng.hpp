#pragma once
#include <cstdint>
#include <random>

namespace gc {

// splitmix64: cheap, well-mixed stream splitter. Used to derive independent
// engine seeds from (master seed, replicate index) so replicates can run in
// any order / on any worker and still draw identical streams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  // two rounds so (master, index) and (master+1, index-ish) collisions are a non-issue
  return splitmix64(splitmix64(master) ^ splitmix64(0x51ab3cfedULL + index));
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t master, uint64_t index) { return Rng(derive_seed(master, index)); }

inline double runif(Rng& g) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}
inline double rnorm(Rng& g) {
  return std::normal_distribution<double>(0.0, 1.0)(g);
}
inline double rexp(Rng& g) {
  return std::exponential_distribution<double>(1.0)(g);
}

}  // namespace gc
