#ifndef RANDSEC_RNG_HPP_
#define RANDSEC_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace randsec {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed split: the seed of a unit of work is a pure function of
// the master seed and the unit's coordinates (p, ensemble, trial, ...), so
// results never depend on how the work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace randsec

#endif  // RANDSEC_RNG_HPP_
