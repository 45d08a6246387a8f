#ifndef RANDSEC_BASIS_CACHE_HPP_
#define RANDSEC_BASIS_CACHE_HPP_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>

#include "randsec/bergman_space.hpp"

namespace randsec {

// Key of a basis: weight hash, p, n_p and the quadrature spec.
std::uint64_t basis_cache_key(const WeightSequence& ws, int p, const QuadratureSpec& spec);

// Binary layout (little endian):
//   char[4] "RSBK", u64 key, u64 d_p, u64 p, f64 origin re, f64 origin im,
//   then d_p * d_p complex doubles of B in row-major order (re, im).
void save_basis(const BergmanBasis& b, std::uint64_t key, const std::filesystem::path& file);

// Reads a file written by save_basis. The effective weight is not stored and
// must be supplied. Throws CacheError on a malformed file or key mismatch.
BergmanBasis load_basis(const std::filesystem::path& file, std::uint64_t expected_key,
                        const Weight& level_weight);

// Directory-backed cache; an empty directory disables it.
class BasisCache {
 public:
  BasisCache() = default;
  explicit BasisCache(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& directory() const { return dir_; }

  // Loads the basis if a valid entry exists, otherwise builds and stores it.
  BergmanBasis get_or_build(const WeightSequence& ws, int p, const Quadrature& q,
                            const BasisBuildOptions& options = {});

  int hits() const { return hits_; }
  int misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  int hits_ = 0;
  int misses_ = 0;
};

}  // namespace randsec

#endif  // RANDSEC_BASIS_CACHE_HPP_
