#ifndef RANDSEC_QUADRATURE_HPP_
#define RANDSEC_QUADRATURE_HPP_

#include <functional>
#include <vector>

#include "randsec/types.hpp"

namespace randsec {

class Weight;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int n, double a, double b);

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

// Globally adaptive 7/15-point Gauss-Kronrod integration of f over the finite
// interval [a, b]. Stops when the estimated error is below
// max(abs_tol, rel_tol * |value|).
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                  double b, double rel_tol, double abs_tol = 0.0,
                                  int max_intervals = 2000);

// Same, over [a, +inf) through the map x = a + t / (1 - t).
AdaptiveResult integrate_adaptive_semi_infinite(const std::function<double(double)>& f,
                                                double a, double rel_tol,
                                                double abs_tol = 0.0,
                                                int max_intervals = 2000);

struct QuadratureSpec {
  int radial_nodes = 64;
  int angular_nodes = 128;
  // Polar coordinates are taken about this point.
  Complex origin{0.0, 0.0};
  // Offset of the angular grid as a fraction of the angular step.
  double angular_phase = 0.0;

  bool operator==(const QuadratureSpec&) const = default;
};

struct RadialNode {
  double r = 0.0;
  double weight = 0.0;
};

// Tensor rule integrating against omega_FS over C. Radius r = tan(t) with
// Gauss-Legendre in t on [0, pi/2), uniform trapezoid in the angle. Under this
// substitution the FS density times the Jacobian is (1/pi) sin t cos t, so FS
// moment integrands become trigonometric polynomials in t.
struct Quadrature {
  QuadratureSpec spec;
  std::vector<Complex> nodes;
  std::vector<double> weights;
  // Polar data of each node relative to spec.origin.
  std::vector<double> radius;
  std::vector<double> angle;
  // Radial rule for functions of |z|; only filled when the origin is 0.
  std::vector<RadialNode> radial;
  double angular_step = 0.0;
  double tolerance = 1e-12;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
  // Sum of weights * f(node).
  double integrate(const std::function<double(Complex)>& f) const;
};

Quadrature make_fs_quadrature(const QuadratureSpec& spec);

// Node counts growing linearly in p, origin at the weight's center when the
// weight is radial about a point, otherwise at 0.
QuadratureSpec default_quadrature_spec(int p, const Weight& w);

// A finer rule with different node counts and angular phase, used to
// validate results computed with `spec`.
QuadratureSpec refined_spec(const QuadratureSpec& spec);

}  // namespace randsec

#endif  // RANDSEC_QUADRATURE_HPP_
