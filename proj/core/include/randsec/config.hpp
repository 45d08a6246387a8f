#ifndef RANDSEC_CONFIG_HPP_
#define RANDSEC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randsec/ensembles.hpp"
#include "randsec/quadrature.hpp"
#include "randsec/weights.hpp"

namespace randsec {

enum class ExperimentKind {
  Equidistribution,
  Universality,
  BergmanDiagonal,
  BergmanDecay,
  MomentCertify
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

// Pass/fail thresholds. None of them is a constant of the underlying theory;
// they are calibrated at desk scale and echoed into every report.
struct Thresholds {
  double radial_cdf_median = 0.05;
  double potential_l1_median = 0.05;
  // Allowed |mean fraction of zeros at infinity - expected fraction|.
  double inf_fraction_tolerance = 0.05;
  // Fixed tolerance for pairwise median differences; when absent it is
  // universality_spread_factor times the spread of a Gaussian pilot run.
  std::optional<double> universality_tolerance;
  double universality_spread_factor = 3.0;
  double decay_min_rate = 0.5;
  double decay_rate_variation = 0.2;
  double moment_sigma = 3.0;
  double moment_exponent_tolerance = 0.15;
  double sphere_m_variation = 0.25;
  double diagonal_fs_tolerance = 1e-6;
};

struct QuadratureConfig {
  // Basis rule: radial = p + radial_extra, angular = 2p + angular_extra.
  int radial_extra = 48;
  int angular_extra = 64;
  // Rule of the potential L1 distance.
  int potential_radial = 64;
  int potential_angular = 128;
};

struct MomentConfig {
  std::vector<double> nu = {1.0, 2.0};
  // Empty: k = d_p for every p in the grid.
  std::vector<int> k_grid;
  long long trials = 100000;
  std::vector<double> tail_r_grid = {1.0, 2.0, 4.0, 8.0};
};

struct DecayConfig {
  int base_points = 40;
  int distances = 25;
  double headroom = 1.0;
};

struct DiagonalConfig {
  int radial_points = 40;
  int angular_points = 25;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Equidistribution;
  nlohmann::json weight_spec = {{"kind", "fubini_study"}};
  Weight weight = Weight::fubini_study();
  RegularizerRule regularizer = RegularizerRule::None;
  std::map<int, int> regularizer_table;
  std::vector<int> p_grid;
  std::vector<Ensemble> ensembles;
  int trials = 100;
  std::uint64_t master_seed = 0;
  QuadratureConfig quadrature;
  std::filesystem::path output_dir;
  bool dump_zeros = false;
  int workers = 1;
  std::filesystem::path cache_dir;
  Thresholds thresholds;
  MomentConfig moments;
  DecayConfig decay;
  DiagonalConfig diagonal;

  WeightSequence weight_sequence() const;
  QuadratureSpec basis_quadrature(int p) const;
  QuadratureSpec potential_quadrature() const;
  // Index of an ensemble by name; throws InvalidConfiguration if absent.
  int ensemble_index(const std::string& name) const;
};

Weight weight_from_json(const nlohmann::json& j);

// Parses and validates a config document. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
// Canonical form with every default filled in.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace randsec

#endif  // RANDSEC_CONFIG_HPP_
