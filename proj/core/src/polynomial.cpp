#include "randsec/polynomial.hpp"

#include <cmath>
#include <limits>

#include "randsec/error.hpp"

namespace randsec {

Eigen::VectorXd balance_matrix(CMatrix& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double kRadix = 2.0;
  constexpr double kRadix2 = kRadix * kRadix;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kRadix2;
      }
      g = r * kRadix;
      while (c > g) {
        f /= kRadix;
        c /= kRadix2;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        d[i] *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return d;
}

CMatrix companion_matrix(const CVector& c) {
  const Eigen::Index m = c.size() - 1;
  if (m < 1) throw InvalidConfiguration("companion_matrix: degree must be >= 1");
  if (c[m] == Complex(0.0, 0.0)) {
    throw InvalidConfiguration("companion_matrix: leading coefficient is zero");
  }
  CMatrix a = CMatrix::Zero(m, m);
  for (Eigen::Index i = 1; i < m; ++i) a(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) a(i, m - 1) = -c[i] / c[m];
  return a;
}

std::vector<Complex> companion_roots(const CVector& c) {
  const Eigen::Index m = c.size() - 1;
  std::vector<Complex> roots;
  Eigen::Index low = 0;
  while (low < m && c[low] == Complex(0.0, 0.0)) ++low;
  roots.assign(static_cast<std::size_t>(low), Complex(0.0, 0.0));
  if (low == m) return roots;
  if (m - low == 1) {
    roots.push_back(-c[low] / c[m]);
    return roots;
  }
  CMatrix a = companion_matrix(c.segment(low, m - low + 1));
  balance_matrix(a);
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw QuadratureFailure("companion eigenvalue iteration did not converge");
  }
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    roots.push_back(es.eigenvalues()[i]);
  }
  return roots;
}

PolyValue horner(const CVector& c, Complex z) {
  Complex f(0.0, 0.0);
  Complex df(0.0, 0.0);
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) {
    df = df * z + f;
    f = f * z + c[k];
  }
  return {f, df};
}

Complex newton_correction(const CVector& c, Complex z) {
  const double scale = c.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  const CVector cs = c / scale;
  if (std::abs(z) <= 1.0) {
    const PolyValue v = horner(cs, z);
    if (v.derivative == Complex(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
    return v.value / v.derivative;
  }
  const Eigen::Index m = cs.size() - 1;
  const Complex w = 1.0 / z;
  const PolyValue r = horner(cs.reverse(), w);
  const Complex denom = static_cast<double>(m) * r.value - w * r.derivative;
  if (denom == Complex(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return z * r.value / denom;
}

double root_residual(const CVector& c, Complex z) {
  return std::abs(newton_correction(c, z)) / (1.0 + std::norm(z));
}

Complex newton_polish(const CVector& c, Complex z) {
  const Complex step = newton_correction(c, z);
  if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return z;
  const Complex z1 = z - step;
  return root_residual(c, z1) <= root_residual(c, z) ? z1 : z;
}

}  // namespace randsec
