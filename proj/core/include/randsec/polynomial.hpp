#ifndef RANDSEC_POLYNOMIAL_HPP_
#define RANDSEC_POLYNOMIAL_HPP_

#include <vector>

#include "randsec/types.hpp"

namespace randsec {

// Polynomials are coefficient vectors in ascending order: c[0] + c[1] z + ...

// Parlett-Reinsch balancing with radix-2 scale factors, in place. Returns the
// diagonal similarity D with A <- D^-1 A D.
Eigen::VectorXd balance_matrix(CMatrix& a);

// Companion matrix of the monic polynomial c / c[m], m = c.size() - 1.
CMatrix companion_matrix(const CVector& c);

// Roots of a polynomial whose leading coefficient is nonzero: eigenvalues of
// the balanced companion matrix. Exactly vanishing low-order coefficients are
// deflated into roots at 0.
std::vector<Complex> companion_roots(const CVector& c);

struct PolyValue {
  Complex value;
  Complex derivative;
};
PolyValue horner(const CVector& c, Complex z);

// Newton correction f(z) / f'(z), evaluated in z for |z| <= 1 and through the
// reversed polynomial in 1/z beyond.
// Returns infinity when f' vanishes.
Complex newton_correction(const CVector& c, Complex z);

// |f(z) / f'(z)| / (1 + |z|^2): the Newton step measured in the chordal
// metric of P^1.
double root_residual(const CVector& c, Complex z);

// One guarded Newton step: the corrected point is kept only if it does not
// increase root_residual.
Complex newton_polish(const CVector& c, Complex z);

}  // namespace randsec

#endif  // RANDSEC_POLYNOMIAL_HPP_
