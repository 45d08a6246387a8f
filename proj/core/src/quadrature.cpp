#include "randsec/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

#include "randsec/error.hpp"
#include "randsec/weights.hpp"

namespace randsec {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InvalidConfiguration("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Weights of the embedded 7-point Gauss rule (nodes kXgk[1], [3], [5], [7]).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                  double b, double rel_tol, double abs_tol,
                                  int max_intervals) {
  std::priority_queue<Interval> heap;
  Interval first = gk15(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int evaluations = 15;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size()) < max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Interval left = gk15(f, worst.a, mid);
    Interval right = gk15(f, mid, worst.b);
    evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the incremental updates.
  double v = 0.0;
  double e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e, evaluations};
}

AdaptiveResult integrate_adaptive_semi_infinite(const std::function<double(double)>& f,
                                                double a, double rel_tol, double abs_tol,
                                                int max_intervals) {
  auto mapped = [&](double t) {
    const double s = 1.0 - t;
    return f(a + t / s) / (s * s);
  };
  return integrate_adaptive(mapped, 0.0, 1.0, rel_tol, abs_tol, max_intervals);
}

double Quadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double Quadrature::integrate(const std::function<double(Complex)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
  return s;
}

Quadrature make_fs_quadrature(const QuadratureSpec& spec) {
  if (spec.radial_nodes < 1 || spec.angular_nodes < 1) {
    throw InvalidConfiguration("quadrature node counts must be positive");
  }
  Quadrature q;
  q.spec = spec;
  const GaussRule rule = gauss_legendre(spec.radial_nodes, 0.0, 0.5 * std::numbers::pi);
  const int m = spec.angular_nodes;
  q.angular_step = 2.0 * std::numbers::pi / m;
  const std::size_t total = static_cast<std::size_t>(spec.radial_nodes) * m;
  q.nodes.reserve(total);
  q.weights.reserve(total);
  q.radius.reserve(total);
  q.angle.reserve(total);
  const bool centered = spec.origin == Complex(0.0, 0.0);
  for (int i = 0; i < spec.radial_nodes; ++i) {
    const double t = rule.nodes[i];
    const double r = std::tan(t);
    const double sec2 = 1.0 / (std::cos(t) * std::cos(t));
    // r dr = tan(t) sec^2(t) dt.
    const double jac = r * sec2 * rule.weights[i];
    if (centered) {
      q.radial.push_back({r, 2.0 * std::sin(t) * std::cos(t) * rule.weights[i]});
    }
    for (int j = 0; j < m; ++j) {
      const double theta = q.angular_step * (j + spec.angular_phase);
      const Complex z = spec.origin + std::polar(r, theta);
      double density;
      if (centered) {
        const double c = std::cos(t);
        density = c * c * c * c / std::numbers::pi;
      } else {
        const double s = 1.0 + std::norm(z);
        density = 1.0 / (std::numbers::pi * s * s);
      }
      q.nodes.push_back(z);
      q.weights.push_back(density * jac * q.angular_step);
      q.radius.push_back(r);
      q.angle.push_back(theta);
    }
  }
  return q;
}

QuadratureSpec default_quadrature_spec(int p, const Weight& w) {
  QuadratureSpec spec;
  spec.radial_nodes = p + 48;
  spec.angular_nodes = 2 * p + 64;
  spec.origin = w.is_radial() ? w.center() : Complex(0.0, 0.0);
  return spec;
}

QuadratureSpec refined_spec(const QuadratureSpec& spec) {
  QuadratureSpec fine = spec;
  fine.radial_nodes = spec.radial_nodes + spec.radial_nodes / 2 + 7;
  fine.angular_nodes = spec.angular_nodes + spec.angular_nodes / 2 + 5;
  fine.angular_phase = 0.5;
  return fine;
}

}  // namespace randsec
