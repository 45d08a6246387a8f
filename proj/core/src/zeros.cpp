#include "randsec/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "randsec/error.hpp"
#include "randsec/polynomial.hpp"
#include "randsec/stats.hpp"

namespace randsec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ExpectationPotential expectation_core(const BergmanBasis& b, std::span<const CVector> samples,
                                      std::span<const double> log_scales,
                                      const Quadrature& q) {
  const int d = b.dimension();
  const Eigen::Index n = static_cast<Eigen::Index>(q.size());
  CMatrix dirs(n, d);
  std::vector<bool> base_locus(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double ln = 0.0;
    dirs.row(i) = b.unit_direction(q.nodes[static_cast<std::size_t>(i)], &ln).transpose();
    base_locus[static_cast<std::size_t>(i)] = !std::isfinite(ln);
  }
  ExpectationPotential out;
  out.values.assign(static_cast<std::size_t>(n), 0.0);
  out.total_mass = b.weight().total_mass();
  out.trials = static_cast<long long>(samples.size());
  if (samples.empty()) return out;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples[t].size() != d) {
      throw InvalidConfiguration("expectation_potential: sample has the wrong dimension");
    }
    const CVector v = dirs * samples[t];
    const double ls = log_scales.empty() ? 0.0 : log_scales[t];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::max(std::abs(v[i]), std::numeric_limits<double>::min());
      out.values[static_cast<std::size_t>(i)] += ls + std::log(m);
    }
  }
  const double scale = 1.0 / (static_cast<double>(samples.size()) * out.total_mass);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = base_locus[i] ? 0.0 : out.values[i] * scale;
    out.l1_norm += q.weights[i] * std::abs(out.values[i]);
  }
  return out;
}

}  // namespace

CVector RandomSection::monomial_coeffs() const {
  CVector c = CVector::Zero(p + 1);
  for (Eigen::Index k = 0; k < normalized.size(); ++k) {
    c[k] = normalized[k] * std::exp(log_monomial_scale[k] + coeff_log_scale);
  }
  return c;
}

double RandomSection::log_abs(Complex z) const {
  const Complex zeta = z - origin;
  const double r = std::abs(zeta);
  const Eigen::Index d = normalized.size();
  if (r == 0.0) {
    const double a = std::abs(normalized[0]);
    return a == 0.0 ? kNegInf : coeff_log_scale + log_monomial_scale[0] + std::log(a);
  }
  const double lr = std::log(r);
  double m = kNegInf;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (normalized[k] != Complex(0.0, 0.0)) m = std::max(m, log_monomial_scale[k] + k * lr);
  }
  if (!std::isfinite(m)) return kNegInf;
  const Complex u = zeta / r;
  Complex ph(1.0, 0.0);
  Complex sum(0.0, 0.0);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (normalized[k] != Complex(0.0, 0.0)) {
      sum += normalized[k] * std::exp(log_monomial_scale[k] + k * lr - m) * ph;
    }
    ph *= u;
  }
  const double a = std::abs(sum);
  return a == 0.0 ? kNegInf : coeff_log_scale + m + std::log(a);
}

RandomSection assemble_section(const BergmanBasis& b, const CVector& a, double log_scale) {
  if (a.size() != b.dimension()) {
    throw InvalidConfiguration("assemble_section: coefficient vector has length " +
                               std::to_string(a.size()) + ", expected d_p = " +
                               std::to_string(b.dimension()));
  }
  RandomSection s;
  s.p = b.p();
  s.origin = b.origin();
  s.coeffs = a;
  s.coeff_log_scale = log_scale;
  s.log_monomial_scale = b.log_monomial_scale();
  if (b.is_diagonal()) {
    s.normalized = b.scaled_coeffs().diagonal().cwiseProduct(a);
  } else {
    s.normalized = b.scaled_coeffs().transpose() * a;
  }
  s.degenerate = s.normalized.cwiseAbs().maxCoeff() == 0.0;
  return s;
}

RandomSection section_from_monomials(int p, const CVector& c, Complex origin) {
  if (p < 1 || c.size() != p + 1) {
    throw InvalidConfiguration("section_from_monomials: need p + 1 coefficients");
  }
  RandomSection s;
  s.p = p;
  s.origin = origin;
  s.coeffs = c;
  s.normalized = c;
  s.log_monomial_scale = Eigen::VectorXd::Zero(p + 1);
  s.degenerate = c.cwiseAbs().maxCoeff() == 0.0;
  return s;
}

ZeroSet find_zeros(const RandomSection& s, double tol) {
  const Eigen::Index d = s.normalized.size();
  const double top = d > 0 ? s.normalized.cwiseAbs().maxCoeff() : 0.0;
  if (s.degenerate || !(top > 0.0)) {
    throw DegenerateSample("find_zeros: the section is the zero polynomial");
  }
  ZeroSet out;
  out.p = s.p;
  Eigen::Index m = 0;
  for (Eigen::Index k = d - 1; k >= 0; --k) {
    if (std::abs(s.normalized[k]) > tol * top) {
      m = k;
      break;
    }
  }
  out.multiplicity_at_infinity = s.p - static_cast<int>(m);
  if (m == 0) return out;

  // Work in xi = zeta / sigma with sigma the geometric mean of the root
  // moduli, and coefficients scaled to max modulus 1.
  std::vector<double> log_c(static_cast<std::size_t>(d), kNegInf);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double a = std::abs(s.normalized[k]);
    if (a > 0.0) log_c[k] = std::log(a) + s.log_monomial_scale[k];
  }
  Eigen::Index low = 0;
  while (s.normalized[low] == Complex(0.0, 0.0)) ++low;
  const double log_sigma = m > low ? (log_c[low] - log_c[m]) / static_cast<double>(m - low) : 0.0;
  double top_log = kNegInf;
  for (Eigen::Index k = 0; k < d; ++k) top_log = std::max(top_log, log_c[k] + k * log_sigma);
  CVector full = CVector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::isfinite(log_c[k])) {
      const Complex unit = s.normalized[k] / std::abs(s.normalized[k]);
      full[k] = unit * std::exp(log_c[k] + k * log_sigma - top_log);
    }
  }
  const CVector truncated = full.head(m + 1);
  const double sigma = std::exp(log_sigma);
  out.finite_zeros.reserve(static_cast<std::size_t>(m));
  for (Complex xi : companion_roots(truncated)) {
    xi = newton_polish(full, xi);
    const Complex z = s.origin + sigma * xi;
    const double residual = sigma * std::abs(newton_correction(full, xi)) / (1.0 + std::norm(z));
    out.max_residual = std::max(out.max_residual, residual);
    out.finite_zeros.push_back(z);
  }
  return out;
}

void write_zero_csv(const ZeroSet& z, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os << "re,im\n" << std::setprecision(17);
  for (const Complex& c : z.finite_zeros) os << c.real() << ',' << c.imag() << '\n';
  os << "inf," << z.multiplicity_at_infinity << '\n';
}

RadialCdfResult radial_cdf_distance(const ZeroSet& z, const Weight& level_weight,
                                    std::span<const double> r_grid) {
  if (!level_weight.is_radial()) {
    throw UnsupportedOperation("radial_cdf_distance: weight " + level_weight.describe() +
                               " is not radial; use potential_l1_distance");
  }
  if (z.p < 1) throw InvalidConfiguration("radial_cdf_distance: empty zero set");
  const Complex c = level_weight.center();
  const double p = static_cast<double>(z.p);
  std::vector<double> radii;
  radii.reserve(z.finite_zeros.size());
  for (const Complex& w : z.finite_zeros) radii.push_back(std::abs(w - c));
  std::sort(radii.begin(), radii.end());
  auto count_le = [&](double r) {
    return static_cast<double>(std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
  };
  RadialCdfResult res;
  auto consider = [&](double empirical, double r) {
    const double model = level_weight.radial_mass(r) / p;
    res.finite_sup = std::max(res.finite_sup, std::abs(empirical / p - model));
  };
  consider(count_le(0.0), 0.0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && radii[i] == radii[i - 1]) continue;
    const double below =
        static_cast<double>(std::lower_bound(radii.begin(), radii.end(), radii[i]) - radii.begin());
    consider(below, radii[i]);
    consider(count_le(radii[i]), radii[i]);
  }
  for (double r : r_grid) {
    if (r >= 0.0 && std::isfinite(r)) consider(count_le(r), r);
  }
  const double model_inf = level_weight.radial_mass(std::numeric_limits<double>::infinity()) / p;
  res.inf_bucket = std::abs(static_cast<double>(radii.size()) / p - model_inf);
  res.distance = std::max(res.finite_sup, res.inf_bucket);
  return res;
}

double potential_l1_distance(const RandomSection& s, const Weight& level_weight,
                             const Quadrature& q) {
  if (s.degenerate) throw DegenerateSample("potential_l1_distance: zero section");
  const double p = static_cast<double>(s.p);
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Complex z = q.nodes[i];
    double lf = s.log_abs(z);
    if (!std::isfinite(lf)) {
      z = q.spec.origin + std::polar(q.radius[i], q.angle[i] + 0.5 * q.angular_step);
      lf = s.log_abs(z);
    }
    total += q.weights[i] * std::abs((lf - level_weight.eval(z)) / p);
  }
  return total;
}

double potential_l1_distance(const RandomSection& s, const WeightSequence& ws,
                             const Quadrature& q) {
  return potential_l1_distance(s, effective_weight(ws, s.p), q);
}

AngularKs angular_ks_pooled(std::span<const ZeroSet> sets, Complex center) {
  std::vector<double> u;
  for (const ZeroSet& z : sets) {
    for (const Complex& w : z.finite_zeros) {
      double a = std::arg(w - center) / (2.0 * std::numbers::pi);
      if (a < 0.0) a += 1.0;
      u.push_back(a >= 1.0 ? 0.0 : a);
    }
  }
  if (u.empty()) return {1.0, true};
  return {stats::ks_uniform(std::move(u)), false};
}

AngularKs angular_ks_statistic(const ZeroSet& z, Complex center) {
  return angular_ks_pooled(std::span<const ZeroSet>(&z, 1), center);
}

ExpectationPotential expectation_potential(const BergmanBasis& b,
                                           std::span<const CVector> samples,
                                           const Quadrature& q) {
  return expectation_core(b, samples, {}, q);
}

ExpectationPotential expectation_potential(const BergmanBasis& b, const Ensemble& e,
                                           int trials, const Quadrature& q, Rng& rng) {
  if (trials < 100) throw InvalidConfiguration("expectation_potential: trials must be >= 100");
  std::vector<CVector> samples(static_cast<std::size_t>(trials));
  std::vector<double> scales(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) samples[t] = sample_scaled(e, b.dimension(), rng, &scales[t]);
  return expectation_core(b, samples, scales, q);
}

}  // namespace randsec
