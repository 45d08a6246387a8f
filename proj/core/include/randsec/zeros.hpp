#ifndef RANDSEC_ZEROS_HPP_
#define RANDSEC_ZEROS_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "randsec/bergman_space.hpp"
#include "randsec/ensembles.hpp"

namespace randsec {

// f_p = sum_j a_j s_j written in monomials of zeta = z - origin:
//
//   f_p(z) = exp(coeff_log_scale) * sum_k normalized[k] exp(lambda[k]) zeta^k,
//
// with lambda the basis' log_monomial_scale. The normalized coordinates are
// O(|a|) whatever the size of the raw monomial coefficients.
struct RandomSection {
  int p = 0;
  Complex origin{0.0, 0.0};
  CVector coeffs;
  double coeff_log_scale = 0.0;
  CVector normalized;
  Eigen::VectorXd log_monomial_scale;
  bool degenerate = false;

  // Raw monomial coefficients, length p + 1 (zero for dropped degrees). May
  // overflow when the basis spans a very wide range of scales.
  CVector monomial_coeffs() const;
  // log |f_p(z)|; -inf at zeros.
  double log_abs(Complex z) const;
};

// a has length d_p; log_scale multiplies a by exp(log_scale) (see
// sample_scaled). a = 0 yields a section flagged degenerate.
RandomSection assemble_section(const BergmanBasis& b, const CVector& a,
                               double log_scale = 0.0);

// A section given directly by monomial coefficients c_0..c_p in z - origin.
RandomSection section_from_monomials(int p, const CVector& c,
                                     Complex origin = {0.0, 0.0});

struct ZeroSet {
  int p = 0;
  std::vector<Complex> finite_zeros;
  int multiplicity_at_infinity = 0;
  // max over finite zeros of root_residual after polishing.
  double max_residual = 0.0;
};

// Zeros on P^1. The degree m is the largest k with
// |normalized[k]| > tol * max |normalized|; the remaining p - m zeros sit at
// infinity. Throws DegenerateSample for the zero polynomial.
ZeroSet find_zeros(const RandomSection& s, double tol = 1e-12);

// CSV with header "re,im", one finite zero per line, and "inf,<mult>" last.
void write_zero_csv(const ZeroSet& z, const std::filesystem::path& file);

struct RadialCdfResult {
  double distance = 0.0;
  // Sup over finite radii.
  double finite_sup = 0.0;
  // |#finite / p - mass(inf) / p|: mismatch of the mass placed at infinity.
  double inf_bucket = 0.0;
};

// sup_r |#{|z - c| <= r} / p - mass_Phi(r) / p| for the radial level weight
// Phi (c its center, p = z.p). The sup is exact: it is taken over every zero
// radius from both sides, over r_grid, at r = 0 and at the infinity bucket.
RadialCdfResult radial_cdf_distance(const ZeroSet& z, const Weight& level_weight,
                                    std::span<const double> r_grid = {});

// int |(1/p) log|f_p| - Phi_p / p| omega_FS on the rule q. Nodes where
// log|f_p| = -inf are moved by half an angular step.
double potential_l1_distance(const RandomSection& s, const Weight& level_weight,
                             const Quadrature& q);
double potential_l1_distance(const RandomSection& s, const WeightSequence& ws,
                             const Quadrature& q);

struct AngularKs {
  double statistic = 1.0;
  bool no_finite_zeros = true;
};

// KS distance between arg(z - center) / 2 pi and the uniform law on [0, 1).
AngularKs angular_ks_statistic(const ZeroSet& z, Complex center);
// Same on the union of the finite zeros of several sets.
AngularKs angular_ks_pooled(std::span<const ZeroSet> sets, Complex center);

struct ExpectationPotential {
  // Per quadrature node: mean over trials of (1/A_p) log(|s_p|_h / sqrt(P_p)).
  std::vector<double> values;
  // sum_n w_n |values[n]|.
  double l1_norm = 0.0;
  double total_mass = 0.0;
  long long trials = 0;
};

// Average over explicit coefficient vectors (length d_p).
ExpectationPotential expectation_potential(const BergmanBasis& b,
                                           std::span<const CVector> samples,
                                           const Quadrature& q);
// Average over `trials` >= 100 draws from e.
ExpectationPotential expectation_potential(const BergmanBasis& b, const Ensemble& e,
                                           int trials, const Quadrature& q, Rng& rng);

}  // namespace randsec

#endif  // RANDSEC_ZEROS_HPP_
