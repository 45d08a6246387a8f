#include "randsec/basis_cache.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "randsec/error.hpp"

namespace randsec {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'B', 'K'};

static_assert(std::endian::native == std::endian::little,
              "basis cache files are written in little-endian byte order");

class Fnv1a {
 public:
  template <class T>
  void add(const T& v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CacheError("basis cache file truncated");
  return v;
}

}  // namespace

std::uint64_t basis_cache_key(const WeightSequence& ws, int p, const QuadratureSpec& spec) {
  Fnv1a h;
  h.add(effective_weight(ws, p).hash());
  h.add(static_cast<std::int64_t>(p));
  h.add(static_cast<std::int64_t>(ws.regularizer_count(p)));
  h.add(static_cast<std::int64_t>(spec.radial_nodes));
  h.add(static_cast<std::int64_t>(spec.angular_nodes));
  h.add(spec.origin.real());
  h.add(spec.origin.imag());
  h.add(spec.angular_phase);
  return h.value();
}

void save_basis(const BergmanBasis& b, std::uint64_t key, const std::filesystem::path& file) {
  const CMatrix coeffs = b.monomial_coeffs();
  if (!coeffs.allFinite()) {
    throw CacheError("basis coefficients overflow double precision; not cached");
  }
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CacheError("cannot write " + tmp.string());
    os.write(kMagic, 4);
    put<std::uint64_t>(os, key);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(b.dimension()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(b.p()));
    put<double>(os, b.origin().real());
    put<double>(os, b.origin().imag());
    for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
      for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
        put<double>(os, coeffs(j, k).real());
        put<double>(os, coeffs(j, k).imag());
      }
    }
    if (!os) throw CacheError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

BergmanBasis load_basis(const std::filesystem::path& file, std::uint64_t expected_key,
                        const Weight& level_weight) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw CacheError("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw CacheError("not a basis cache file: " + file.string());
  }
  const auto key = get<std::uint64_t>(is);
  if (key != expected_key) throw CacheError("cache key mismatch in " + file.string());
  const auto d = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  const auto p = static_cast<int>(get<std::uint64_t>(is));
  const double ore = get<double>(is);
  const double oim = get<double>(is);
  if (d < 1 || d > p + 1) throw CacheError("invalid dimension in " + file.string());
  CMatrix coeffs(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      coeffs(j, k) = Complex(re, im);
    }
  }
  // Column scaling back to O(1) entries, then the Gram matrix implied by
  // orthonormality: G = C^-1 C^-H.
  Eigen::VectorXd lambda(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double m = coeffs.col(k).cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) throw CacheError("degenerate column in cache file");
    lambda[k] = std::log(m);
    coeffs.col(k) /= m;
  }
  const CMatrix inv = coeffs.inverse();
  const CMatrix gram = inv * inv.adjoint();
  return BergmanBasis(p, level_weight, Complex(ore, oim), coeffs, lambda, gram);
}

BasisCache::BasisCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

BergmanBasis BasisCache::get_or_build(const WeightSequence& ws, int p, const Quadrature& q,
                                      const BasisBuildOptions& options) {
  if (!enabled()) return build_basis(ws, p, q, options);
  const std::uint64_t key = basis_cache_key(ws, p, q.spec);
  std::ostringstream name;
  name << "basis_" << std::hex << key << ".bin";
  const std::filesystem::path file = dir_ / name.str();
  std::lock_guard<std::mutex> lock(mutex_);
  if (std::filesystem::exists(file)) {
    try {
      BergmanBasis b = load_basis(file, key, effective_weight(ws, p));
      ++hits_;
      return b;
    } catch (const CacheError&) {
      // Fall through and rebuild over the bad entry.
    }
  }
  ++misses_;
  BergmanBasis b = build_basis(ws, p, q, options);
  try {
    save_basis(b, key, file);
  } catch (const CacheError&) {
  }
  return b;
}

}  // namespace randsec
