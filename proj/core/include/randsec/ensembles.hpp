#ifndef RANDSEC_ENSEMBLES_HPP_
#define RANDSEC_ENSEMBLES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randsec/rng.hpp"
#include "randsec/types.hpp"

namespace randsec {

enum class EnsembleKind { Gaussian, FSVolume, Sphere, HeavyTailIID, SphereModerate };

// A coefficient measure on C^k, specified for every k.
class Ensemble {
 public:
  static Ensemble gaussian();
  static Ensemble fs_volume();
  static Ensemble sphere();
  static Ensemble sphere_moderate();
  // Entries i.i.d. with uniform argument and log-modulus Pareto(rho), rho > 1.
  static Ensemble heavy_tail(double rho);

  EnsembleKind kind() const { return kind_; }
  double rho() const { return rho_; }
  // Sup of the planar density of one entry, rho / (2 pi e^2); 0 for the
  // other kinds.
  double density_bound() const;
  // True when the moment constant does not depend on k.
  bool dimension_free() const;
  bool unitarily_invariant() const;
  // Whether the nu-th log moment is finite.
  bool admits_nu(double nu) const;
  std::string nu_range() const;
  // Stable identifier: gaussian, fs_volume, sphere, sphere_moderate,
  // heavy_tail(rho=4).
  std::string name() const;

  bool operator==(const Ensemble&) const = default;

 private:
  Ensemble(EnsembleKind kind, double rho) : kind_(kind), rho_(rho) {}
  EnsembleKind kind_ = EnsembleKind::Gaussian;
  double rho_ = 0.0;
};

// Parses the identifiers produced by Ensemble::name() and the bare kind names
// ("heavy_tail" then needs rho).
Ensemble ensemble_from_name(const std::string& name, std::optional<double> rho = {});

// One draw a in C^k, returned as scaled * exp(log_scale) with scaled finite.
// log_scale is 0 except for heavy tails, whose moduli can exceed the double
// range; it is then the largest log-modulus so that max |scaled_j| = 1.
CVector sample_scaled(const Ensemble& e, int k, Rng& rng, double* log_scale);

// One draw a in C^k. Throws OutOfRange if an entry overflows a double (only
// possible for heavy tails); the stream position then matches sample_scaled.
CVector sample(const Ensemble& e, int k, Rng& rng);

// Gamma_nu = 2 int_0^inf r |log r|^nu dens(r) dr with dens = e^(-r^2) for
// Gaussian and (1 + r^2)^-2 for FSVolume, by adaptive quadrature split at
// r = 1. Supported for nu in [1, 20].
double gamma_nu(EnsembleKind kind, double nu);

// E|log|<a, e_1>|| for the uniform sphere in C^k: (1/2) H_(k-1).
double sphere_log_moment(int k);

struct MomentEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  long long trials = 0;
  long long rejected = 0;
};

// Monte Carlo mean of |log|<a, u>||^nu with <a, u> = sum_j a_j conj(u_j).
// Samples with <a, u> = 0 are rejected; more than 0.1% rejections throws
// DegenerateSample.
MomentEstimate moment_B(const Ensemble& e, const CVector& u, double nu, long long trials,
                        Rng& rng);

// Same estimator for several nu on shared samples, run in chunks of 8192
// samples with per-chunk seeds derived from `seed`; the result does not
// depend on `workers`.
std::vector<MomentEstimate> moment_B_parallel(const Ensemble& e, const CVector& u,
                                              std::span<const double> nus,
                                              long long trials, std::uint64_t seed,
                                              int workers);

struct TailRow {
  double R = 0.0;
  double tail_prob = 0.0;       // P(log |a| > R)
  double smallball_prob = 0.0;  // P(log |<a, u>| < -R)
  double tail_stderr = 0.0;
  double smallball_stderr = 0.0;
};

struct TailTable {
  CVector u;
  long long trials = 0;
  std::vector<TailRow> rows;
};

// Empirical tail and small-ball probabilities of the coefficients. The
// unit vector u defaults to (1, ..., 1) / sqrt(k).
TailTable tail_smallball_check(const Ensemble& e, int k, const std::vector<double>& r_grid,
                               long long trials, Rng& rng,
                               std::optional<CVector> u = std::nullopt);

// Uniformly distributed unit vector in C^k.
CVector random_unit_vector(int k, Rng& rng);

}  // namespace randsec

#endif  // RANDSEC_ENSEMBLES_HPP_
