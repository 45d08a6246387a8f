#include "randsec/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "randsec/error.hpp"
#include "randsec/parallel.hpp"
#include "randsec/quadrature.hpp"

namespace randsec {

namespace {

constexpr long long kChunk = 8192;

CVector complex_gaussian(int k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVector g(k);
  for (int j = 0; j < k; ++j) {
    const double re = normal(rng);
    const double im = normal(rng);
    g[j] = Complex(re, im);
  }
  return g;
}

double uniform_open_closed(Rng& rng) {
  // (0, 1]
  return 1.0 - std::generate_canonical<double, 53>(rng);
}

struct Accumulator {
  std::vector<double> sum;
  std::vector<double> sumsq;
  long long accepted = 0;
  long long rejected = 0;
};

void accumulate(const Ensemble& e, const CVector& u, std::span<const double> nus,
                long long n, Rng& rng, Accumulator& acc) {
  const int k = static_cast<int>(u.size());
  for (long long t = 0; t < n; ++t) {
    double ls = 0.0;
    const CVector a = sample_scaled(e, k, rng, &ls);
    const Complex v = u.dot(a);  // sum_j conj(u_j) a_j
    const double m = std::abs(v);
    if (m == 0.0) {
      ++acc.rejected;
      continue;
    }
    const double l = std::abs(ls + std::log(m));
    for (std::size_t i = 0; i < nus.size(); ++i) {
      const double x = std::pow(l, nus[i]);
      acc.sum[i] += x;
      acc.sumsq[i] += x * x;
    }
    ++acc.accepted;
  }
}

std::vector<MomentEstimate> finish(const Accumulator& acc, long long trials) {
  if (acc.rejected * 1000 > trials) {
    throw DegenerateSample("more than 0.1% of samples had <a, u> = 0");
  }
  std::vector<MomentEstimate> out(acc.sum.size());
  const double n = static_cast<double>(acc.accepted);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mean = acc.sum[i] / n;
    const double var = n > 1 ? std::max(0.0, (acc.sumsq[i] - n * mean * mean) / (n - 1)) : 0.0;
    out[i] = {mean, std::sqrt(var / n), trials, acc.rejected};
  }
  return out;
}

void check_unit(const CVector& u) {
  if (u.size() < 1 || std::abs(u.norm() - 1.0) > 1e-10) {
    throw InvalidConfiguration("moment_B: u must be a unit vector");
  }
}

}  // namespace

Ensemble Ensemble::gaussian() { return {EnsembleKind::Gaussian, 0.0}; }
Ensemble Ensemble::fs_volume() { return {EnsembleKind::FSVolume, 0.0}; }
Ensemble Ensemble::sphere() { return {EnsembleKind::Sphere, 0.0}; }
Ensemble Ensemble::sphere_moderate() { return {EnsembleKind::SphereModerate, 0.0}; }

Ensemble Ensemble::heavy_tail(double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    throw InvalidConfiguration("heavy_tail: rho must be a finite number > 1");
  }
  return {EnsembleKind::HeavyTailIID, rho};
}

double Ensemble::density_bound() const {
  if (kind_ != EnsembleKind::HeavyTailIID) return 0.0;
  return rho_ / (2.0 * std::numbers::pi * std::exp(2.0));
}

bool Ensemble::dimension_free() const {
  return kind_ == EnsembleKind::Gaussian || kind_ == EnsembleKind::FSVolume;
}

bool Ensemble::unitarily_invariant() const { return kind_ != EnsembleKind::HeavyTailIID; }

bool Ensemble::admits_nu(double nu) const {
  if (!(nu >= 1.0)) return false;
  return kind_ != EnsembleKind::HeavyTailIID || nu < rho_;
}

std::string Ensemble::nu_range() const {
  if (kind_ == EnsembleKind::HeavyTailIID) {
    std::ostringstream os;
    os << "1 <= nu < " << rho_;
    return os.str();
  }
  return "nu >= 1";
}

std::string Ensemble::name() const {
  switch (kind_) {
    case EnsembleKind::Gaussian:
      return "gaussian";
    case EnsembleKind::FSVolume:
      return "fs_volume";
    case EnsembleKind::Sphere:
      return "sphere";
    case EnsembleKind::SphereModerate:
      return "sphere_moderate";
    case EnsembleKind::HeavyTailIID: {
      std::ostringstream os;
      os << "heavy_tail(rho=" << rho_ << ")";
      return os.str();
    }
  }
  return "unknown";
}

Ensemble ensemble_from_name(const std::string& name, std::optional<double> rho) {
  if (name == "gaussian") return Ensemble::gaussian();
  if (name == "fs_volume") return Ensemble::fs_volume();
  if (name == "sphere") return Ensemble::sphere();
  if (name == "sphere_moderate") return Ensemble::sphere_moderate();
  if (name == "heavy_tail") {
    if (!rho) throw InvalidConfiguration("heavy_tail ensemble needs rho");
    return Ensemble::heavy_tail(*rho);
  }
  const std::string prefix = "heavy_tail(rho=";
  if (name.rfind(prefix, 0) == 0 && name.back() == ')') {
    try {
      return Ensemble::heavy_tail(
          std::stod(name.substr(prefix.size(), name.size() - prefix.size() - 1)));
    } catch (const std::logic_error&) {
    }
  }
  throw InvalidConfiguration("unknown ensemble '" + name + "'");
}

CVector sample_scaled(const Ensemble& e, int k, Rng& rng, double* log_scale) {
  if (k < 1) throw InvalidConfiguration("sample: k must be positive");
  double ls = 0.0;
  CVector a;
  switch (e.kind()) {
    case EnsembleKind::Gaussian:
      a = complex_gaussian(k, rng);
      break;
    case EnsembleKind::FSVolume: {
      CVector g = complex_gaussian(k + 1, rng);
      while (g[0] == Complex(0.0, 0.0)) g[0] = complex_gaussian(1, rng)[0];
      a = g.tail(k) / g[0];
      break;
    }
    case EnsembleKind::Sphere:
    case EnsembleKind::SphereModerate: {
      a = complex_gaussian(k, rng);
      double n = a.norm();
      while (n == 0.0) {
        a = complex_gaussian(k, rng);
        n = a.norm();
      }
      a /= n;
      break;
    }
    case EnsembleKind::HeavyTailIID: {
      std::vector<double> y(k);
      std::vector<double> theta(k);
      for (int j = 0; j < k; ++j) {
        y[j] = std::pow(uniform_open_closed(rng), -1.0 / e.rho());
        theta[j] = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
      }
      ls = *std::max_element(y.begin(), y.end());
      a.resize(k);
      for (int j = 0; j < k; ++j) a[j] = std::polar(std::exp(y[j] - ls), theta[j]);
      break;
    }
  }
  if (log_scale) *log_scale = ls;
  return a;
}

CVector sample(const Ensemble& e, int k, Rng& rng) {
  double ls = 0.0;
  CVector a = sample_scaled(e, k, rng, &ls);
  if (ls != 0.0) {
    a *= std::exp(ls);
    if (!a.allFinite()) throw OutOfRange("sample: heavy-tail entry overflows a double");
  }
  return a;
}

double gamma_nu(EnsembleKind kind, double nu) {
  if (!(nu >= 1.0)) throw InvalidConfiguration("gamma_nu: nu must be >= 1");
  if (nu > 20.0) throw UnsupportedOperation("gamma_nu: nu > 20 is not supported");
  std::function<double(double)> density;
  if (kind == EnsembleKind::Gaussian) {
    density = [](double r) { return std::exp(-r * r); };
  } else if (kind == EnsembleKind::FSVolume) {
    density = [](double r) {
      const double s = 1.0 + r * r;
      return 1.0 / (s * s);
    };
  } else {
    throw UnsupportedOperation("gamma_nu is defined for Gaussian and FSVolume only");
  }
  auto f = [&](double r) {
    if (r <= 0.0 || !std::isfinite(r)) return 0.0;
    return 2.0 * r * std::pow(std::abs(std::log(r)), nu) * density(r);
  };
  const double inner = integrate_adaptive(f, 0.0, 1.0, 1e-13, 0.0, 4000).value;
  const double outer = integrate_adaptive_semi_infinite(f, 1.0, 1e-13, 0.0, 4000).value;
  return inner + outer;
}

double sphere_log_moment(int k) {
  if (k < 1) throw InvalidConfiguration("sphere_log_moment: k must be positive");
  double h = 0.0;
  for (int j = 1; j < k; ++j) h += 1.0 / j;
  return 0.5 * h;
}

MomentEstimate moment_B(const Ensemble& e, const CVector& u, double nu, long long trials,
                        Rng& rng) {
  check_unit(u);
  if (trials < 1000) throw InvalidConfiguration("moment_B: trials must be >= 1000");
  const double nus[1] = {nu};
  Accumulator acc{{0.0}, {0.0}, 0, 0};
  accumulate(e, u, nus, trials, rng, acc);
  return finish(acc, trials)[0];
}

std::vector<MomentEstimate> moment_B_parallel(const Ensemble& e, const CVector& u,
                                              std::span<const double> nus,
                                              long long trials, std::uint64_t seed,
                                              int workers) {
  check_unit(u);
  if (trials < 1000) throw InvalidConfiguration("moment_B: trials must be >= 1000");
  const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  std::vector<Accumulator> parts(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Accumulator& acc = parts[c];
    acc.sum.assign(nus.size(), 0.0);
    acc.sumsq.assign(nus.size(), 0.0);
    const long long n = std::min<long long>(kChunk, trials - static_cast<long long>(c) * kChunk);
    Rng rng = make_rng(derive_seed(seed, {c}));
    accumulate(e, u, nus, n, rng, acc);
  });
  Accumulator total{std::vector<double>(nus.size(), 0.0), std::vector<double>(nus.size(), 0.0),
                    0, 0};
  for (const Accumulator& a : parts) {
    for (std::size_t i = 0; i < nus.size(); ++i) {
      total.sum[i] += a.sum[i];
      total.sumsq[i] += a.sumsq[i];
    }
    total.accepted += a.accepted;
    total.rejected += a.rejected;
  }
  return finish(total, trials);
}

TailTable tail_smallball_check(const Ensemble& e, int k, const std::vector<double>& r_grid,
                               long long trials, Rng& rng, std::optional<CVector> u) {
  if (r_grid.empty()) throw InvalidConfiguration("tail_smallball_check: empty R grid");
  if (trials < 1) throw InvalidConfiguration("tail_smallball_check: trials must be >= 1");
  TailTable table;
  table.u = u ? *u : CVector::Constant(k, Complex(1.0 / std::sqrt(static_cast<double>(k)), 0.0));
  check_unit(table.u);
  if (table.u.size() != k) throw InvalidConfiguration("tail_smallball_check: u has wrong size");
  table.trials = trials;
  std::vector<long long> tail(r_grid.size(), 0);
  std::vector<long long> small(r_grid.size(), 0);
  for (long long t = 0; t < trials; ++t) {
    double ls = 0.0;
    const CVector a = sample_scaled(e, k, rng, &ls);
    const double log_norm = ls + std::log(a.norm());
    const double m = std::abs(table.u.dot(a));
    const double log_inner = m > 0.0 ? ls + std::log(m) : -INFINITY;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      if (log_norm > r_grid[i]) ++tail[i];
      if (log_inner < -r_grid[i]) ++small[i];
    }
  }
  const double n = static_cast<double>(trials);
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double pt = tail[i] / n;
    const double ps = small[i] / n;
    table.rows.push_back({r_grid[i], pt, ps, std::sqrt(pt * (1.0 - pt) / n),
                          std::sqrt(ps * (1.0 - ps) / n)});
  }
  return table;
}

CVector random_unit_vector(int k, Rng& rng) { return sample(Ensemble::sphere(), k, rng); }

}  // namespace randsec
