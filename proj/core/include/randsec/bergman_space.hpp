#ifndef RANDSEC_BERGMAN_SPACE_HPP_
#define RANDSEC_BERGMAN_SPACE_HPP_

#include <vector>

#include "randsec/quadrature.hpp"
#include "randsec/rng.hpp"
#include "randsec/types.hpp"
#include "randsec/weights.hpp"

namespace randsec {

// Values of all basis sections at one point in overflow-safe form:
// s_j(z) = scaled[j] * exp(log_scale).
struct SectionValues {
  CVector scaled;
  double log_scale = 0.0;
};

// Orthonormal basis of the weighted L^2 space of polynomials of degree <= p
// with inner product <f, g> = int f conj(g) exp(-2 Phi_p) omega_FS.
//
// Sections are stored in monomials of zeta = z - origin. Row j of the
// coefficient matrix holds s_j:
//
//   s_j(z) = sum_k B(j, k) zeta^k,   B = scaled_coeffs() * diag(exp(log_monomial_scale())).
//
// With this layout the orthonormality relation reads B G B^H = I where
// G(k, l) = <zeta^k, zeta^l>. The monomials are normalized by their own
// quadrature norms before the Cholesky factorization, so scaled_coeffs() and
// scaled_gram() stay O(1) even when the raw coefficients span hundreds of
// orders of magnitude.
class BergmanBasis {
 public:
  BergmanBasis() = default;
  BergmanBasis(int p, Weight weight, Complex origin, CMatrix scaled_coeffs,
               Eigen::VectorXd log_monomial_scale, CMatrix scaled_gram);

  int p() const { return p_; }
  // d_p.
  int dimension() const { return static_cast<int>(log_scale_.size()); }
  // The effective weight Phi_p.
  const Weight& weight() const { return weight_; }
  Complex origin() const { return origin_; }
  bool is_diagonal() const { return diagonal_; }
  bool is_lower_triangular() const { return lower_triangular_; }
  // Monomial degrees d_p, ..., p excluded for non-integrability.
  std::vector<int> dropped_monomials() const;

  const CMatrix& scaled_coeffs() const { return scaled_coeffs_; }
  const Eigen::VectorXd& log_monomial_scale() const { return log_scale_; }
  const CMatrix& scaled_gram() const { return scaled_gram_; }
  // Raw B and G; entries may overflow for very large p.
  CMatrix monomial_coeffs() const;
  CMatrix gram() const;
  // 2-norm condition number of scaled_gram().
  double gram_condition() const;

  SectionValues evaluate(Complex z) const;
  // Unit vector s(z) / |s(z)| and log |s(z)|; log_norm is -inf on the base
  // locus (where the direction is left zero).
  CVector unit_direction(Complex z, double* log_norm) const;

  // Basis with rows mixed by a unitary matrix: s'_i = sum_j U(i, j) s_j.
  BergmanBasis rotated(const CMatrix& unitary) const;

 private:
  int p_ = 0;
  Weight weight_ = Weight::fubini_study();
  Complex origin_{0.0, 0.0};
  CMatrix scaled_coeffs_;
  Eigen::VectorXd log_scale_;
  CMatrix scaled_gram_;
  bool diagonal_ = false;
  bool lower_triangular_ = false;
};

// Default thresholds of the retention rule and the conditioning check.
struct BasisBuildOptions {
  // A monomial is kept only if its squared norm is below this value.
  double max_norm = 1e300;
  // Far-field decay exponent of the radial integrand r^(2k+1) e^(-2 Phi)
  // (omega_FS density) in the variable log r; the monomial is integrable at
  // infinity when this exponent is below -min_tail_decay.
  double min_tail_decay = 0.5;
  double max_condition = 1e12;
};

// Builds the orthonormal basis for Phi_p = effective_weight(ws, p). The
// quadrature's origin is used as expansion point of the monomials.
// Throws QuadratureFailure when no monomial is integrable or the Gram matrix
// is numerically singular.
BergmanBasis build_basis(const WeightSequence& ws, int p, const Quadrature& q,
                         const BasisBuildOptions& options = {});

// Integrability at infinity of |zeta^k|^2 exp(-2 Phi) omega_FS, decided from
// the decay exponent of the integrand between two far radii.
bool monomial_integrable_at_infinity(const Weight& level_weight, Complex origin, int k,
                                     double min_tail_decay = 0.5);

// P_p(z) = sum_j |s_j(z)|^2 exp(-2 Phi_p(z)).
double bergman_function(const BergmanBasis& b, Complex z);
double log_bergman_function(const BergmanBasis& b, Complex z);

// |P_p(z, w)|^2_{h_p} = |sum_j s_j(z) conj(s_j(w))|^2 exp(-2 Phi_p(z) - 2 Phi_p(w)).
double bergman_kernel_norm(const BergmanBasis& b, Complex z, Complex w);
double log_bergman_kernel_norm(const BergmanBasis& b, Complex z, Complex w);

struct PotentialValue {
  double value = 0.0;
  // Every basis element vanishes at the point; value is -inf.
  bool base_locus = false;
};

// (1/2) log sum_j |s_j(z)|^2 = Phi_p(z) + (1/2) log P_p(z).
PotentialValue fs_potential(const BergmanBasis& b, Complex z);

struct ExtremalResult {
  // max over random unit coefficient vectors of |S(z)|^2_{h_p} / P_p(z).
  double max_random_ratio = 0.0;
  // The same ratio for a proportional to conj(s_j(z)); 1 up to rounding.
  double extremizer_ratio = 0.0;
  // max of the two.
  double max_ratio = 0.0;
};

ExtremalResult extremal_check(const BergmanBasis& b, Complex z, int trials, Rng& rng);

// int P_p omega_FS by the given quadrature; equals d_p for an exact basis.
double trace_integral(const BergmanBasis& b, const Quadrature& q);

// || B G' B^H - I ||_max where G' is the Gram matrix recomputed with q.
double orthonormality_residual(const BergmanBasis& b, const Quadrature& q);

}  // namespace randsec

#endif  // RANDSEC_BERGMAN_SPACE_HPP_
