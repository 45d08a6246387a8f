#include "randsec/bergman_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "randsec/error.hpp"

namespace randsec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kBlock = 4096;

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Per-node data shared by the Gram passes: log|zeta|, unit phase, Phi, log w.
struct NodeData {
  std::vector<double> log_r;
  std::vector<Complex> phase;
  std::vector<double> log_weight_minus_2phi;
};

NodeData node_data(const Weight& w, Complex origin, const Quadrature& q) {
  NodeData d;
  const std::size_t n = q.size();
  d.log_r.resize(n);
  d.phase.resize(n);
  d.log_weight_minus_2phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex zeta = q.nodes[i] - origin;
    const double r = std::abs(zeta);
    d.log_r[i] = r > 0.0 ? std::log(r) : kNegInf;
    d.phase[i] = r > 0.0 ? zeta / r : Complex(1.0, 0.0);
    d.log_weight_minus_2phi[i] = std::log(q.weights[i]) - 2.0 * w.eval(q.nodes[i]);
  }
  return d;
}

double monomial_log(int k, double log_r) {
  if (k == 0) return 0.0;
  return k * log_r;
}

// Gram matrix of the monomials zeta^k exp(lambda_k), k < d, under q.
CMatrix scaled_gram_on(const NodeData& nd, const Eigen::VectorXd& lambda) {
  const int d = static_cast<int>(lambda.size());
  const std::size_t n = nd.log_r.size();
  CMatrix gram = CMatrix::Zero(d, d);
  CMatrix block;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    block.resize(static_cast<Eigen::Index>(len), d);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t node = start + i;
      const double half_lw = 0.5 * nd.log_weight_minus_2phi[node];
      Complex ph(1.0, 0.0);
      for (int k = 0; k < d; ++k) {
        const double lg = monomial_log(k, nd.log_r[node]) + lambda[k] + half_lw;
        block(static_cast<Eigen::Index>(i), k) = std::exp(lg) * ph;
        ph *= nd.phase[node];
      }
    }
    gram.noalias() += block.transpose() * block.conjugate();
  }
  return gram;
}

// Ring decomposition of a tensor rule whose weight is radial about the rule's
// origin: per radius, log of (ring weight * exp(-2 Phi)) and the normalized
// angular moments sum_j w_ij e^(i m theta_j) / sum_j w_ij, m = 0..max_m.
struct RingData {
  std::vector<double> log_r;
  std::vector<double> log_weight_minus_2phi;
  CMatrix moments;  // rings x (max_m + 1)
};

bool has_ring_structure(const Weight& w, Complex origin, const Quadrature& q) {
  return w.is_radial() && w.center() == origin && q.spec.origin == origin &&
         q.size() == static_cast<std::size_t>(q.spec.radial_nodes) *
                         static_cast<std::size_t>(q.spec.angular_nodes);
}

RingData ring_data(const Weight& w, const Quadrature& q, int max_m) {
  const int n = q.spec.radial_nodes;
  const int m = q.spec.angular_nodes;
  RingData rd;
  rd.log_r.resize(n);
  rd.log_weight_minus_2phi.resize(n);
  rd.moments = CMatrix::Zero(n, max_m + 1);
  for (int i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * m;
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      const double wt = q.weights[base + j];
      total += wt;
      const Complex u = std::polar(1.0, q.angle[base + j]);
      Complex ph(1.0, 0.0);
      for (int k = 0; k <= max_m; ++k) {
        rd.moments(i, k) += wt * ph;
        ph *= u;
      }
    }
    rd.moments.row(i) /= total;
    rd.log_r[i] = std::log(q.radius[base]);
    rd.log_weight_minus_2phi[i] = std::log(total) - 2.0 * w.eval(q.nodes[base]);
  }
  return rd;
}

CMatrix ring_gram(const RingData& rd, const Eigen::VectorXd& lambda) {
  const int d = static_cast<int>(lambda.size());
  CMatrix gram = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < rd.log_r.size(); ++i) {
    for (int k = 0; k < d; ++k) {
      for (int l = 0; l <= k; ++l) {
        const double lg = (k + l) * rd.log_r[i] + lambda[k] + lambda[l] +
                          rd.log_weight_minus_2phi[i];
        gram(k, l) += std::exp(lg) * rd.moments(static_cast<Eigen::Index>(i), k - l);
      }
    }
  }
  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) gram(k, l) = std::conj(gram(l, k));
  }
  return gram;
}

CMatrix gram_on(const Weight& w, Complex origin, const Quadrature& q,
                const Eigen::VectorXd& lambda) {
  if (has_ring_structure(w, origin, q)) {
    return ring_gram(ring_data(w, q, static_cast<int>(lambda.size()) - 1), lambda);
  }
  return scaled_gram_on(node_data(w, origin, q), lambda);
}

}  // namespace

BergmanBasis::BergmanBasis(int p, Weight weight, Complex origin, CMatrix scaled_coeffs,
                           Eigen::VectorXd log_monomial_scale, CMatrix scaled_gram)
    : p_(p),
      weight_(std::move(weight)),
      origin_(origin),
      scaled_coeffs_(std::move(scaled_coeffs)),
      log_scale_(std::move(log_monomial_scale)),
      scaled_gram_(std::move(scaled_gram)) {
  const Eigen::Index d = scaled_coeffs_.rows();
  if (scaled_coeffs_.cols() != d || log_scale_.size() != d) {
    throw InvalidConfiguration("BergmanBasis: inconsistent coefficient dimensions");
  }
  diagonal_ = true;
  lower_triangular_ = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      if (j == k || scaled_coeffs_(j, k) == Complex(0.0, 0.0)) continue;
      diagonal_ = false;
      if (k > j) lower_triangular_ = false;
    }
  }
}

std::vector<int> BergmanBasis::dropped_monomials() const {
  std::vector<int> dropped;
  for (int k = dimension(); k <= p_; ++k) dropped.push_back(k);
  return dropped;
}

CMatrix BergmanBasis::monomial_coeffs() const {
  CMatrix b = scaled_coeffs_;
  for (Eigen::Index k = 0; k < b.cols(); ++k) b.col(k) *= std::exp(log_scale_[k]);
  return b;
}

CMatrix BergmanBasis::gram() const {
  CMatrix g = scaled_gram_;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    for (Eigen::Index l = 0; l < g.cols(); ++l) {
      g(k, l) *= std::exp(-log_scale_[k] - log_scale_[l]);
    }
  }
  return g;
}

double BergmanBasis::gram_condition() const {
  if (scaled_gram_.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(scaled_gram_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

SectionValues BergmanBasis::evaluate(Complex z) const {
  const int d = dimension();
  SectionValues out;
  const Complex zeta = z - origin_;
  const double r = std::abs(zeta);
  CVector e(d);
  if (r == 0.0) {
    e.setZero();
    e[0] = 1.0;
    out.log_scale = log_scale_[0];
  } else {
    const double lr = std::log(r);
    double m = kNegInf;
    for (int k = 0; k < d; ++k) m = std::max(m, log_scale_[k] + k * lr);
    const Complex u = zeta / r;
    Complex ph(1.0, 0.0);
    for (int k = 0; k < d; ++k) {
      e[k] = std::exp(log_scale_[k] + k * lr - m) * ph;
      ph *= u;
    }
    out.log_scale = m;
  }
  if (diagonal_) {
    out.scaled = scaled_coeffs_.diagonal().cwiseProduct(e);
  } else if (lower_triangular_) {
    out.scaled = scaled_coeffs_.triangularView<Eigen::Lower>() * e;
  } else {
    out.scaled = scaled_coeffs_ * e;
  }
  return out;
}

CVector BergmanBasis::unit_direction(Complex z, double* log_norm) const {
  SectionValues v = evaluate(z);
  const double nrm = v.scaled.norm();
  if (nrm == 0.0) {
    if (log_norm) *log_norm = kNegInf;
    return CVector::Zero(dimension());
  }
  if (log_norm) *log_norm = v.log_scale + std::log(nrm);
  return v.scaled / nrm;
}

BergmanBasis BergmanBasis::rotated(const CMatrix& unitary) const {
  if (unitary.rows() != dimension() || unitary.cols() != dimension()) {
    throw InvalidConfiguration("rotated: unitary has the wrong dimension");
  }
  return BergmanBasis(p_, weight_, origin_, unitary * scaled_coeffs_, log_scale_,
                      scaled_gram_);
}

bool monomial_integrable_at_infinity(const Weight& level_weight, Complex origin, int k,
                                     double min_tail_decay) {
  const double base = 1.0 + std::abs(origin);
  const double r1 = 1e4 * base;
  const double r2 = 1e6 * base;
  constexpr int kAngles = 16;
  auto log_angular_mean = [&](double r) {
    std::vector<double> terms(kAngles);
    for (int a = 0; a < kAngles; ++a) {
      const Complex z = origin + std::polar(r, 2.0 * std::numbers::pi * (a + 0.5) / kAngles);
      // log of r^(2k+2) exp(-2 Phi) (1/pi)(1 + |z|^2)^-2, the integrand in d(log r).
      terms[a] = (2.0 * k + 2.0) * std::log(r) - 2.0 * level_weight.eval(z) -
                 std::log(std::numbers::pi) - 4.0 * fs_potential_value(z);
    }
    return log_sum_exp(terms) - std::log(static_cast<double>(kAngles));
  };
  const double exponent = (log_angular_mean(r2) - log_angular_mean(r1)) / std::log(r2 / r1);
  return exponent < -min_tail_decay;
}

BergmanBasis build_basis(const WeightSequence& ws, int p, const Quadrature& q,
                         const BasisBuildOptions& options) {
  if (p < 1) throw InvalidConfiguration("build_basis: p must be positive");
  const Weight phi = effective_weight(ws, p);
  const Complex origin = q.spec.origin;
  const bool diagonal_shortcut = phi.is_radial() && phi.center() == Complex(0.0, 0.0) &&
                                 origin == Complex(0.0, 0.0) && !q.radial.empty();

  const bool rings = !diagonal_shortcut && has_ring_structure(phi, origin, q);

  // Squared norms (log) of zeta^k: on the radial rule for the shortcut, per
  // ring when the weight is radial about the origin, otherwise node by node.
  std::vector<double> log_norm2;
  const double log_max_norm = std::log(options.max_norm);
  NodeData nd;
  RingData rd;
  std::vector<double> radial_lw;
  std::vector<double> radial_lr;
  if (diagonal_shortcut) {
    for (const RadialNode& rn : q.radial) {
      radial_lr.push_back(std::log(rn.r));
      radial_lw.push_back(std::log(rn.weight) - 2.0 * phi.eval(Complex(rn.r, 0.0)));
    }
  } else if (rings) {
    rd = ring_data(phi, q, p);
    radial_lr = rd.log_r;
    radial_lw = rd.log_weight_minus_2phi;
  } else {
    nd = node_data(phi, origin, q);
  }
  const bool per_radius = diagonal_shortcut || rings;
  std::vector<double> terms;
  for (int k = 0; k <= p; ++k) {
    if (!monomial_integrable_at_infinity(phi, origin, k, options.min_tail_decay)) break;
    const auto& lr = per_radius ? radial_lr : nd.log_r;
    const auto& lw = per_radius ? radial_lw : nd.log_weight_minus_2phi;
    terms.resize(lr.size());
    for (std::size_t i = 0; i < lr.size(); ++i) terms[i] = 2.0 * monomial_log(k, lr[i]) + lw[i];
    const double ln = log_sum_exp(terms);
    if (!std::isfinite(ln) || ln >= log_max_norm) break;
    log_norm2.push_back(ln);
  }
  const int d = static_cast<int>(log_norm2.size());
  if (d == 0) {
    throw QuadratureFailure("no integrable monomial for weight " + phi.describe() +
                            " at p = " + std::to_string(p));
  }
  Eigen::VectorXd lambda(d);
  for (int k = 0; k < d; ++k) lambda[k] = -0.5 * log_norm2[k];

  if (diagonal_shortcut) {
    return BergmanBasis(p, phi, origin, CMatrix::Identity(d, d), lambda,
                        CMatrix::Identity(d, d));
  }

  CMatrix gram = rings ? ring_gram(rd, lambda) : scaled_gram_on(nd, lambda);
  gram = 0.5 * (gram + gram.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > options.max_condition) {
    throw QuadratureFailure("Gram matrix numerically singular (condition " +
                            std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ") for " +
                            phi.describe() + " at p = " + std::to_string(p));
  }
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw QuadratureFailure("Cholesky factorization of the Gram matrix failed");
  }
  const CMatrix coeffs =
      llt.matrixL().solve(CMatrix::Identity(d, d)).triangularView<Eigen::Lower>();
  return BergmanBasis(p, phi, origin, coeffs, lambda, gram);
}

double log_bergman_function(const BergmanBasis& b, Complex z) {
  const SectionValues v = b.evaluate(z);
  const double n2 = v.scaled.squaredNorm();
  if (n2 == 0.0) return kNegInf;
  return 2.0 * v.log_scale + std::log(n2) - 2.0 * b.weight().eval(z);
}

double bergman_function(const BergmanBasis& b, Complex z) {
  return std::exp(log_bergman_function(b, z));
}

double log_bergman_kernel_norm(const BergmanBasis& b, Complex z, Complex w) {
  const SectionValues vz = b.evaluate(z);
  const SectionValues vw = b.evaluate(w);
  // sum_j s_j(z) conj(s_j(w)).
  const Complex dot = vw.scaled.dot(vz.scaled);
  const double a = std::abs(dot);
  if (a == 0.0) return kNegInf;
  return 2.0 * (vz.log_scale + vw.log_scale) + 2.0 * std::log(a) -
         2.0 * b.weight().eval(z) - 2.0 * b.weight().eval(w);
}

double bergman_kernel_norm(const BergmanBasis& b, Complex z, Complex w) {
  return std::exp(log_bergman_kernel_norm(b, z, w));
}

PotentialValue fs_potential(const BergmanBasis& b, Complex z) {
  const SectionValues v = b.evaluate(z);
  const double n2 = v.scaled.squaredNorm();
  if (n2 == 0.0) return {kNegInf, true};
  return {v.log_scale + 0.5 * std::log(n2), false};
}

ExtremalResult extremal_check(const BergmanBasis& b, Complex z, int trials, Rng& rng) {
  if (trials < 1) throw InvalidConfiguration("extremal_check: trials must be >= 1");
  const CVector u = b.unit_direction(z, nullptr);
  const int d = b.dimension();
  std::normal_distribution<double> normal(0.0, 1.0);
  ExtremalResult res;
  CVector a(d);
  for (int t = 0; t < trials; ++t) {
    for (int j = 0; j < d; ++j) a[j] = Complex(normal(rng), normal(rng));
    a /= a.norm();
    // S(z) / |s(z)| = sum_j a_j u_j.
    const double ratio = std::norm(a.cwiseProduct(u).sum());
    res.max_random_ratio = std::max(res.max_random_ratio, ratio);
  }
  const CVector extremizer = u.conjugate();
  res.extremizer_ratio = std::norm(extremizer.cwiseProduct(u).sum());
  res.max_ratio = std::max(res.max_random_ratio, res.extremizer_ratio);
  return res;
}

double trace_integral(const BergmanBasis& b, const Quadrature& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += q.weights[i] * bergman_function(b, q.nodes[i]);
  }
  return s;
}

double orthonormality_residual(const BergmanBasis& b, const Quadrature& q) {
  const CMatrix g = gram_on(b.weight(), b.origin(), q, b.log_monomial_scale());
  const CMatrix& c = b.scaled_coeffs();
  const CMatrix r = c * g * c.adjoint() - CMatrix::Identity(b.dimension(), b.dimension());
  return r.cwiseAbs().maxCoeff();
}

}  // namespace randsec
