#include "mbisac/rng.hpp"

#include <cmath>

namespace mbisac {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng substream(std::uint64_t masterSeed, Domain domain, std::uint64_t index, Purpose purpose) {
  std::uint64_t h = splitmix64(masterSeed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(domain));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

cdouble complexNormal(Rng& rng, double variance) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(0.5 * variance);
  const double re = normal(rng);
  const double im = normal(rng);
  return {scale * re, scale * im};
}

double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

}  // namespace mbisac
