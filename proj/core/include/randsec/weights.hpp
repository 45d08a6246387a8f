#ifndef RANDSEC_WEIGHTS_HPP_
#define RANDSEC_WEIGHTS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "randsec/types.hpp"

namespace randsec {

// Curvature and mass conventions used throughout the library:
//
//   * omega_FS is normalized to total mass 1 on P^1; on the affine chart its
//     density against Lebesgue measure is (1/pi) (1 + |z|^2)^-2.
//   * dd^c = (i/pi) d dbar, so dd^c u = (1/2pi) Laplacian(u) dA and the
//     density of dd^c phi against omega_FS is (1/2) Laplacian(phi) (1+|z|^2)^2.
//   * For a radial weight the dd^c-mass of the disk of radius r about the
//     center is r phi'(r).
//
// With these conventions dd^c of (1/2) log(1 + |z|^2) is exactly omega_FS and
// the curvature mass of p * phi_FS equals p = deg O(p).

enum class WeightKind { FubiniStudy, ScaledFS, TranslatedFS, Custom };

// Everything a custom weight can declare. Only `eval` is mandatory; missing
// curvature densities and radial masses are produced by finite differences
// with step `fd_step`.
struct CustomWeightSpec {
  std::string name;
  std::function<double(Complex)> eval;
  std::function<double(Complex)> curvature_density;
  std::function<double(double)> radial_mass;
  bool is_radial = false;
  Complex center{0.0, 0.0};
  double lelong_constant = 0.0;
  double strict_positivity = 0.0;
  // lim_{r -> inf} r phi'(r): the total dd^c-mass carried by C.
  double total_mass = 1.0;
  double fd_step = 1e-3;
};

// A weight phi on C (the local weight of a metric on O(1) or, for effective
// weights, on O(p)). Immutable value type; copies share the implementation
// and are safe to use from several threads.
class Weight {
 public:
  static Weight fubini_study();
  // alpha * phi_FS, alpha in (0, 1].
  static Weight scaled_fs(double alpha);
  // phi_FS(z - c).
  static Weight translated_fs(Complex c);
  static Weight custom(CustomWeightSpec spec);
  // a * u + b * v with a, b >= 0.
  static Weight blend(double a, const Weight& u, double b, const Weight& v);

  WeightKind kind() const;
  const std::string& name() const;
  // Human-readable canonical description; also the input of hash().
  std::string describe() const;
  // Stable 64-bit FNV-1a hash of describe().
  std::uint64_t hash() const;

  double eval(Complex z) const;

  // True when the density of dd^c phi is known in closed form.
  bool has_curvature_density() const;
  // Density of dd^c phi against omega_FS; falls back to the finite-difference
  // Laplacian when no closed form is available.
  double curvature_density(Complex z) const;
  // Always the 5-point finite-difference estimate.
  double fd_curvature_density(Complex z) const;

  bool is_radial() const;
  Complex center() const;
  // dd^c-mass of {|z - center| <= r}; r may be +infinity. Requires is_radial().
  double radial_mass(double r) const;
  bool has_closed_form_radial_mass() const;

  double lelong_constant() const;
  double strict_positivity() const;
  double total_mass() const;
  double fd_step() const;

  // Parameters of built-in kinds (0 / origin for the others).
  double alpha() const;
  Complex translation() const;

 private:
  struct Impl;
  explicit Weight(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

double eval_weight(const Weight& w, Complex z);

// dd^c w-mass of the disk {|z - center| <= r}, with omega_FS of total mass 1.
// Throws UnsupportedOperation for non-radial weights.
double curvature_radial_mass(const Weight& w, double r);

// 1/2 log(1 + |z|^2), evaluated without overflow for any finite z.
double fs_potential_value(Complex z);

// Rule producing the regularizer counts n_p of h_p = h^(p - n_p) (x) h_FS^n_p.
enum class RegularizerRule { None, Sqrt, Log, Table };

class WeightSequence {
 public:
  explicit WeightSequence(Weight base,
                          RegularizerRule rule = RegularizerRule::None);
  WeightSequence(Weight base, std::map<int, int> table);

  const Weight& base() const { return base_; }
  RegularizerRule rule() const { return rule_; }
  // n_p; throws InvalidConfiguration if the table misses p or n_p > p.
  int regularizer_count(int p) const;

 private:
  Weight base_;
  RegularizerRule rule_;
  std::map<int, int> table_;
};

// (p - n_p) * phi + n_p * phi_FS; reduces to p * phi when n_p = 0.
Weight effective_weight(const WeightSequence& ws, int p);

// Named custom weights compiled into the binary ("quartic", "two_center").
const Weight& custom_weight(std::string_view name);
std::vector<std::string> custom_weight_names();

}  // namespace randsec

#endif  // RANDSEC_WEIGHTS_HPP_
