#ifndef RANDSEC_EXPERIMENTS_HPP_
#define RANDSEC_EXPERIMENTS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randsec/basis_cache.hpp"
#include "randsec/config.hpp"
#include "randsec/zeros.hpp"

namespace randsec {

// One line of trials.jsonl.
struct TrialRecord {
  int p = 0;
  std::string ensemble;
  int ensemble_index = 0;
  std::uint64_t seed = 0;
  int trial = 0;
  int n_finite_zeros = 0;
  int inf_mult = 0;
  // Absent for non-radial weights.
  std::optional<double> radial_cdf_dist;
  double potential_l1 = 0.0;
  double angular_ks = 1.0;
  double max_root_residual = 0.0;
  bool degenerate = false;
};

nlohmann::json to_json(const TrialRecord& r);

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::Equidistribution;
  // Every reproducible number of the report (rows, fits, calibration).
  nlohmann::json body;
  std::vector<Verdict> verdicts;
  std::vector<TrialRecord> trials;
  // Rows of moments.csv (moment experiments only).
  std::vector<nlohmann::json> moment_rows;
  double runtime_seconds = 0.0;
  std::string timestamp;

  bool passed() const;
  // body plus verdicts: identical across runs and worker counts.
  nlohmann::json statistics() const;
  // statistics() plus the "timing" block.
  nlohmann::json to_json() const;
};

// Seed of trial t of ensemble e at level p.
std::uint64_t trial_seed(std::uint64_t master, int p, int ensemble_index, int trial);

struct TrialOutcome {
  TrialRecord record;
  std::optional<ZeroSet> zeros;
};

// sample -> assemble -> roots -> distances for one seed.
TrialOutcome run_trial(const BergmanBasis& b, const Ensemble& e, int ensemble_index,
                       std::uint64_t seed, int trial, const Quadrature& potential_rule);

ExperimentReport run_equidistribution(const ExperimentConfig& cfg);
ExperimentReport run_universality(const ExperimentConfig& cfg);
ExperimentReport run_bergman_diagonal(const ExperimentConfig& cfg);
ExperimentReport run_bergman_decay(const ExperimentConfig& cfg);
ExperimentReport run_moment_certify(const ExperimentConfig& cfg);
// Dispatches on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.json, trials.jsonl and, for moment runs, moments.csv.
void write_outputs(const ExperimentReport& report, const std::filesystem::path& dir);

// Recomputes a single trial from the config's seed chain.
TrialOutcome replay_trial(const ExperimentConfig& cfg, int p, const std::string& ensemble,
                          int trial);
TrialOutcome replay_seed(const ExperimentConfig& cfg, int p, const std::string& ensemble,
                         std::uint64_t seed);

// Structural comparison of two JSON documents with numbers equal up to an
// absolute-or-relative tolerance. Returns the first differing path, or an
// empty string when the documents agree.
std::string json_difference(const nlohmann::json& a, const nlohmann::json& b,
                            double tolerance);

}  // namespace randsec

#endif  // RANDSEC_EXPERIMENTS_HPP_
