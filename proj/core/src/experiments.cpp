#include "randsec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "randsec/error.hpp"
#include "randsec/parallel.hpp"
#include "randsec/stats.hpp"

namespace randsec {

namespace {

using nlohmann::json;

// Seed stream tags of the auxiliary randomness.
constexpr std::uint64_t kPilotTag = 0x70696c6f74ULL;
constexpr std::uint64_t kDecayTag = 0x6465636179ULL;
constexpr std::uint64_t kMomentTag = 0x6d6f6d656e74ULL;
constexpr std::uint64_t kDirectionTag = 0x646972ULL;
constexpr std::uint64_t kTailTag = 0x7461696cULL;

const char* kSeedRule = "derive_seed(master_seed, [p, ensemble_index, trial])";

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json summary_json(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  const stats::Summary s = stats::summarize(v);
  return {{"mean", s.mean},     {"stddev", s.stddev}, {"q10", s.q10}, {"q25", s.q25},
          {"median", s.median}, {"q75", s.q75},       {"q90", s.q90}, {"count", s.count}};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

json software_json() { return {{"name", "randsec"}, {"version", RANDSEC_VERSION}}; }

json base_body(const ExperimentConfig& cfg) {
  return {{"experiment", to_string(cfg.kind)},
          {"software", software_json()},
          {"master_seed", cfg.master_seed},
          {"config", to_json(cfg)},
          {"weight_description", cfg.weight.describe()},
          {"threshold_note",
           "all pass/fail thresholds are calibrated at desk scale; none is a constant of the "
           "limit theorems"}};
}

void require_kind(const ExperimentConfig& cfg, ExperimentKind kind) {
  if (cfg.kind != kind) {
    throw InvalidConfiguration("config experiment is '" + to_string(cfg.kind) + "', expected '" +
                               to_string(kind) + "'");
  }
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

// Trials of all ensembles at one level, in slot order (ensemble-major).
std::vector<TrialOutcome> run_level(const ExperimentConfig& cfg, const BergmanBasis& b,
                                    const Quadrature& potential_rule) {
  const std::size_t ne = cfg.ensembles.size();
  const std::size_t nt = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialOutcome> out(ne * nt);
  const int p = b.p();
  parallel_for(out.size(), cfg.workers, [&](std::size_t slot) {
    const int e = static_cast<int>(slot / nt);
    const int t = static_cast<int>(slot % nt);
    const std::uint64_t seed = trial_seed(cfg.master_seed, p, e, t);
    out[slot] = run_trial(b, cfg.ensembles[static_cast<std::size_t>(e)], e, seed, t,
                          potential_rule);
    if (cfg.dump_zeros && !cfg.output_dir.empty() && out[slot].zeros) {
      const std::filesystem::path dir =
          cfg.output_dir / "zeros" / cfg.ensembles[static_cast<std::size_t>(e)].name();
      std::filesystem::create_directories(dir);
      write_zero_csv(*out[slot].zeros,
                     dir / ("zeros_p" + std::to_string(p) + "_t" + std::to_string(t) + ".csv"));
    }
  });
  return out;
}

struct LevelStats {
  std::vector<double> radial;
  std::vector<double> potential;
  std::vector<double> angular;
  std::vector<double> inf_fraction;
  std::vector<double> radii;  // pooled |z - c|, +inf for zeros at infinity
  std::vector<ZeroSet> zero_sets;
  double max_residual = 0.0;
  int degenerate = 0;
};

LevelStats collect(const std::vector<TrialOutcome>& outcomes, std::size_t first,
                   std::size_t count, Complex center, bool keep_radii) {
  LevelStats s;
  for (std::size_t i = first; i < first + count; ++i) {
    const TrialOutcome& o = outcomes[i];
    if (o.record.degenerate) {
      ++s.degenerate;
      continue;
    }
    if (o.record.radial_cdf_dist) s.radial.push_back(*o.record.radial_cdf_dist);
    s.potential.push_back(o.record.potential_l1);
    s.angular.push_back(o.record.angular_ks);
    s.inf_fraction.push_back(static_cast<double>(o.record.inf_mult) / o.record.p);
    s.max_residual = std::max(s.max_residual, o.record.max_root_residual);
    if (o.zeros) {
      if (keep_radii) {
        for (const Complex& z : o.zeros->finite_zeros) s.radii.push_back(std::abs(z - center));
        for (int k = 0; k < o.zeros->multiplicity_at_infinity; ++k) {
          s.radii.push_back(std::numeric_limits<double>::infinity());
        }
      }
      s.zero_sets.push_back(*o.zeros);
    }
  }
  return s;
}

json seed_chain(const ExperimentConfig& cfg, int p, int e) {
  return {{"master_seed", cfg.master_seed}, {"p", p}, {"ensemble_index", e}, {"rule", kSeedRule}};
}

json level_row(const ExperimentConfig& cfg, const BergmanBasis& b, int e, const LevelStats& s) {
  const double p = b.p();
  const double expected_inf = 1.0 - b.weight().total_mass() / p;
  const Complex center = b.weight().is_radial() ? b.weight().center() : Complex(0.0, 0.0);
  const AngularKs pooled = angular_ks_pooled(s.zero_sets, center);
  return {{"p", b.p()},
          {"ensemble", cfg.ensembles[static_cast<std::size_t>(e)].name()},
          {"d_p", b.dimension()},
          {"dropped_monomials", b.p() + 1 - b.dimension()},
          {"trials", cfg.trials},
          {"degenerate_trials", s.degenerate},
          {"radial_cdf_dist", summary_json(s.radial)},
          {"potential_l1", summary_json(s.potential)},
          {"angular_ks", summary_json(s.angular)},
          {"angular_ks_pooled", pooled.no_finite_zeros ? json(nullptr) : json(pooled.statistic)},
          {"inf_fraction", {{"mean", stats::mean(s.inf_fraction)}, {"expected", expected_inf}}},
          {"max_root_residual", s.max_residual},
          {"seed_chain", seed_chain(cfg, b.p(), e)}};
}

struct LevelResult {
  int p = 0;
  bool complete = false;
  std::string reason;
  std::optional<BergmanBasis> basis;
  std::vector<TrialOutcome> outcomes;
};

LevelResult run_level_checked(const ExperimentConfig& cfg, BasisCache& cache, int p,
                              const Quadrature& potential_rule) {
  LevelResult lr;
  lr.p = p;
  try {
    const Quadrature q = make_fs_quadrature(cfg.basis_quadrature(p));
    lr.basis = cache.get_or_build(cfg.weight_sequence(), p, q);
  } catch (const QuadratureFailure& e) {
    lr.reason = e.what();
    return lr;
  }
  lr.outcomes = run_level(cfg, *lr.basis, potential_rule);
  lr.complete = true;
  return lr;
}

void equidistribution_verdicts(const ExperimentConfig& cfg, const std::vector<json>& rows,
                               std::vector<Verdict>& verdicts, bool radial) {
  const Thresholds& th = cfg.thresholds;
  for (const Ensemble& e : cfg.ensembles) {
    std::vector<double> rmed;
    std::vector<double> pmed;
    bool inf_ok = true;
    std::string inf_detail;
    for (const json& row : rows) {
      if (row.value("ensemble", "") != e.name() || row.contains("incomplete")) continue;
      if (radial && !row["radial_cdf_dist"].is_null()) {
        rmed.push_back(row["radial_cdf_dist"]["median"].get<double>());
      }
      if (!row["potential_l1"].is_null()) pmed.push_back(row["potential_l1"]["median"].get<double>());
      const double mean_inf = row["inf_fraction"]["mean"].get<double>();
      const double expected = row["inf_fraction"]["expected"].get<double>();
      if (!(std::abs(mean_inf - expected) <= th.inf_fraction_tolerance)) inf_ok = false;
      inf_detail += (inf_detail.empty() ? "" : "; ") + std::string("p=") +
                    std::to_string(row["p"].get<int>()) + ": " + fmt(mean_inf) + " vs " +
                    fmt(expected);
    }
    const std::string tag = "[" + e.name() + "]";
    if (radial) {
      verdicts.push_back({"radial_cdf_median_decreasing" + tag, strictly_decreasing(rmed),
                          "medians " + join(rmed)});
      verdicts.push_back({"radial_cdf_median_below_threshold" + tag,
                          !rmed.empty() && rmed.back() < th.radial_cdf_median,
                          "largest-p median " + (rmed.empty() ? "n/a" : fmt(rmed.back())) +
                              " < " + fmt(th.radial_cdf_median)});
    }
    verdicts.push_back({"potential_l1_median_decreasing" + tag, strictly_decreasing(pmed),
                        "medians " + join(pmed)});
    verdicts.push_back({"potential_l1_median_below_threshold" + tag,
                        !pmed.empty() && pmed.back() < th.potential_l1_median,
                        "largest-p median " + (pmed.empty() ? "n/a" : fmt(pmed.back())) + " < " +
                            fmt(th.potential_l1_median)});
    verdicts.push_back({"inf_fraction" + tag, inf_ok,
                        "mean fraction of zeros at infinity vs expected (tolerance " +
                            fmt(th.inf_fraction_tolerance) + "): " + inf_detail});
  }
}

double level_weight_density(const Weight& w, Complex z) { return w.curvature_density(z); }

// Point at chordal distance s from z in direction theta: Mobius isometry of
// P^1 moving 0 to z applied to the point at distance s from 0.
std::optional<Complex> chordal_offset(Complex z, double s, double theta) {
  const double rho = s / std::sqrt(1.0 - s * s);
  const Complex xi = std::polar(rho, theta);
  const double n = std::sqrt(1.0 + std::norm(z));
  // Unitary (z, 1; -conj z, 1) / n acting on homogeneous coordinates.
  const Complex num = (xi + z) / n;
  const Complex den = (1.0 - std::conj(z) * xi) / n;
  if (std::abs(den) < 1e-300) return std::nullopt;
  return num / den;
}

double chordal_distance(Complex z, Complex w) {
  return std::abs(z - w) / (std::sqrt(1.0 + std::norm(z)) * std::sqrt(1.0 + std::norm(w)));
}

Complex fs_distributed_point(Rng& rng) {
  const double u = std::generate_canonical<double, 53>(rng);
  const double theta = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
  const double r = std::sqrt(u / (1.0 - u));
  return std::polar(r, theta);
}

CVector moment_direction(const Ensemble& e, int k, std::uint64_t seed) {
  switch (e.kind()) {
    case EnsembleKind::Sphere:
    case EnsembleKind::SphereModerate: {
      CVector u = CVector::Zero(k);
      u[0] = 1.0;
      return u;
    }
    case EnsembleKind::HeavyTailIID:
      return CVector::Constant(k, Complex(1.0 / std::sqrt(static_cast<double>(k)), 0.0));
    default: {
      Rng rng = make_rng(seed);
      return random_unit_vector(k, rng);
    }
  }
}

}  // namespace

json to_json(const TrialRecord& r) {
  return {{"p", r.p},
          {"ensemble", r.ensemble},
          {"seed", r.seed},
          {"trial", r.trial},
          {"n_finite_zeros", r.n_finite_zeros},
          {"inf_mult", r.inf_mult},
          {"radial_cdf_dist", r.radial_cdf_dist ? json(*r.radial_cdf_dist) : json(nullptr)},
          {"potential_l1", r.potential_l1},
          {"angular_ks", r.angular_ks},
          {"max_root_residual", r.max_root_residual},
          {"degenerate", r.degenerate}};
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json ExperimentReport::statistics() const {
  json j = body;
  json v = json::array();
  for (const Verdict& x : verdicts) {
    v.push_back({{"name", x.name}, {"pass", x.pass}, {"detail", x.detail}});
  }
  j["verdicts"] = v;
  j["passed"] = passed();
  return j;
}

json ExperimentReport::to_json() const {
  json j = statistics();
  j["timing"] = {{"runtime_seconds", runtime_seconds}, {"timestamp", timestamp}};
  return j;
}

std::uint64_t trial_seed(std::uint64_t master, int p, int ensemble_index, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(p),
                              static_cast<std::uint64_t>(ensemble_index),
                              static_cast<std::uint64_t>(trial)});
}

TrialOutcome run_trial(const BergmanBasis& b, const Ensemble& e, int ensemble_index,
                       std::uint64_t seed, int trial, const Quadrature& potential_rule) {
  TrialOutcome out;
  TrialRecord& r = out.record;
  r.p = b.p();
  r.ensemble = e.name();
  r.ensemble_index = ensemble_index;
  r.seed = seed;
  r.trial = trial;
  Rng rng = make_rng(seed);
  double log_scale = 0.0;
  const CVector a = sample_scaled(e, b.dimension(), rng, &log_scale);
  const RandomSection s = assemble_section(b, a, log_scale);
  try {
    ZeroSet z = find_zeros(s);
    r.n_finite_zeros = static_cast<int>(z.finite_zeros.size());
    r.inf_mult = z.multiplicity_at_infinity;
    r.max_root_residual = z.max_residual;
    const Weight& w = b.weight();
    if (w.is_radial()) r.radial_cdf_dist = radial_cdf_distance(z, w).distance;
    r.potential_l1 = potential_l1_distance(s, w, potential_rule);
    r.angular_ks = angular_ks_statistic(z, w.is_radial() ? w.center() : Complex(0.0, 0.0)).statistic;
    out.zeros = std::move(z);
  } catch (const DegenerateSample&) {
    r.degenerate = true;
  }
  return out;
}

ExperimentReport run_equidistribution(const ExperimentConfig& cfg) {
  require_kind(cfg, ExperimentKind::Equidistribution);
  if (cfg.ensembles.empty()) throw InvalidConfiguration("equidistribution needs an ensemble");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.body = base_body(cfg);
  BasisCache cache(cfg.cache_dir);
  const Quadrature potential_rule = make_fs_quadrature(cfg.potential_quadrature());
  const bool radial = cfg.weight.is_radial();
  std::vector<json> rows;
  json incomplete = json::array();
  for (int p : cfg.p_grid) {
    LevelResult lr = run_level_checked(cfg, cache, p, potential_rule);
    if (!lr.complete) {
      incomplete.push_back({{"p", p}, {"reason", lr.reason}});
      for (const Ensemble& e : cfg.ensembles) {
        rows.push_back({{"p", p}, {"ensemble", e.name()}, {"incomplete", true}, {"reason", lr.reason}});
      }
      continue;
    }
    const Complex center = radial ? cfg.weight.center() : Complex(0.0, 0.0);
    for (std::size_t e = 0; e < cfg.ensembles.size(); ++e) {
      const LevelStats s = collect(lr.outcomes, e * cfg.trials, cfg.trials, center, false);
      rows.push_back(level_row(cfg, *lr.basis, static_cast<int>(e), s));
    }
    for (TrialOutcome& o : lr.outcomes) rep.trials.push_back(o.record);
  }
  rep.body["rows"] = rows;
  rep.body["incomplete"] = incomplete;
  rep.verdicts.push_back({"cells_complete", incomplete.empty(),
                          std::to_string(incomplete.size()) + " incomplete levels"});
  equidistribution_verdicts(cfg, rows, rep.verdicts, radial);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();
  return rep;
}

ExperimentReport run_universality(const ExperimentConfig& cfg) {
  require_kind(cfg, ExperimentKind::Universality);
  if (cfg.ensembles.size() < 2) throw InvalidConfiguration("universality needs >= 2 ensembles");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.body = base_body(cfg);
  BasisCache cache(cfg.cache_dir);
  const Quadrature potential_rule = make_fs_quadrature(cfg.potential_quadrature());
  const bool radial = cfg.weight.is_radial();
  const Complex center = radial ? cfg.weight.center() : Complex(0.0, 0.0);
  const std::string metric = radial ? "radial_cdf_dist" : "potential_l1";
  const int p_max = cfg.p_grid.back();

  // Pilot: Gaussian trials on their own seed stream at the largest p.
  double tolerance = 0.0;
  json calibration;
  if (cfg.thresholds.universality_tolerance) {
    tolerance = *cfg.thresholds.universality_tolerance;
    calibration = {{"source", "configured"}, {"tolerance", tolerance}};
  } else {
    const Quadrature q = make_fs_quadrature(cfg.basis_quadrature(p_max));
    const BergmanBasis b = cache.get_or_build(cfg.weight_sequence(), p_max, q);
    std::vector<TrialOutcome> pilot(static_cast<std::size_t>(cfg.trials));
    parallel_for(pilot.size(), cfg.workers, [&](std::size_t t) {
      const std::uint64_t seed = derive_seed(cfg.master_seed, {kPilotTag, static_cast<std::uint64_t>(p_max), t});
      pilot[t] = run_trial(b, Ensemble::gaussian(), -1, seed, static_cast<int>(t), potential_rule);
    });
    std::vector<double> values;
    for (const TrialOutcome& o : pilot) {
      if (o.record.degenerate) continue;
      values.push_back(radial ? *o.record.radial_cdf_dist : o.record.potential_l1);
    }
    const double spread = stats::stddev(values);
    tolerance = cfg.thresholds.universality_spread_factor * spread;
    calibration = {{"source", "gaussian pilot"},
                   {"p", p_max},
                   {"pilot_trials", cfg.trials},
                   {"metric", metric},
                   {"spread", spread},
                   {"spread_definition", "sample standard deviation of per-trial distances"},
                   {"factor", cfg.thresholds.universality_spread_factor},
                   {"tolerance", tolerance},
                   {"seed_rule", "derive_seed(master_seed, [pilot_tag, p, trial])"}};
  }
  rep.body["calibration"] = calibration;

  std::vector<json> rows;
  json comparisons = json::array();
  json incomplete = json::array();
  bool final_ok = true;
  std::string final_detail;
  bool have_final = false;
  for (int p : cfg.p_grid) {
    LevelResult lr = run_level_checked(cfg, cache, p, potential_rule);
    if (!lr.complete) {
      incomplete.push_back({{"p", p}, {"reason", lr.reason}});
      continue;
    }
    std::vector<LevelStats> per;
    for (std::size_t e = 0; e < cfg.ensembles.size(); ++e) {
      per.push_back(collect(lr.outcomes, e * cfg.trials, cfg.trials, center, true));
      rows.push_back(level_row(cfg, *lr.basis, static_cast<int>(e), per.back()));
    }
    for (TrialOutcome& o : lr.outcomes) rep.trials.push_back(o.record);
    for (std::size_t a = 0; a < per.size(); ++a) {
      for (std::size_t b = a + 1; b < per.size(); ++b) {
        const Ensemble& ea = cfg.ensembles[a];
        const Ensemble& eb = cfg.ensembles[b];
        const bool slow = (ea.kind() == EnsembleKind::HeavyTailIID && ea.rho() <= 2.0) ||
                          (eb.kind() == EnsembleKind::HeavyTailIID && eb.rho() <= 2.0);
        const auto& va = radial ? per[a].radial : per[a].potential;
        const auto& vb = radial ? per[b].radial : per[b].potential;
        const double diff = std::abs(stats::median(va) - stats::median(vb));
        const double pot_diff =
            std::abs(stats::median(per[a].potential) - stats::median(per[b].potential));
        const double ks = stats::ks_two_sample(per[a].radii, per[b].radii);
        const bool within = diff <= tolerance;
        comparisons.push_back({{"p", p},
                               {"a", ea.name()},
                               {"b", eb.name()},
                               {"median_difference", diff},
                               {"metric", metric},
                               {"potential_l1_median_difference", pot_diff},
                               {"ks_pooled_radii", ks},
                               {"within_tolerance", within},
                               {"slow_mode", slow}});
        if (p == p_max) {
          have_final = true;
          if (!slow && !within) final_ok = false;
          final_detail += (final_detail.empty() ? "" : "; ") + ea.name() + " vs " + eb.name() +
                          ": " + fmt(diff) + (slow ? " (slow mode, not judged)" : "");
        }
      }
    }
  }
  rep.body["rows"] = rows;
  rep.body["comparisons"] = comparisons;
  rep.body["incomplete"] = incomplete;
  rep.verdicts.push_back({"cells_complete", incomplete.empty(),
                          std::to_string(incomplete.size()) + " incomplete levels"});
  rep.verdicts.push_back({"pairwise_median_differences", have_final && final_ok,
                          "tolerance " + fmt(tolerance) + " at p=" + std::to_string(p_max) +
                              ": " + final_detail});
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();
  return rep;
}

ExperimentReport run_bergman_diagonal(const ExperimentConfig& cfg) {
  require_kind(cfg, ExperimentKind::BergmanDiagonal);
  if (!cfg.weight.has_curvature_density()) {
    throw UnsupportedOperation("bergman-diag: weight " + cfg.weight.describe() +
                               " has no closed-form curvature density");
  }
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.body = base_body(cfg);
  BasisCache cache(cfg.cache_dir);
  const Complex center = cfg.weight.is_radial() ? cfg.weight.center() : Complex(0.0, 0.0);
  const bool fs = cfg.weight.kind() == WeightKind::FubiniStudy;
  std::vector<Complex> grid;
  const int nr = cfg.diagonal.radial_points;
  const int na = cfg.diagonal.angular_points;
  for (int i = 0; i < nr; ++i) {
    const double r = std::tan(0.5 * std::numbers::pi * (i + 0.5) / nr);
    for (int j = 0; j < na; ++j) {
      grid.push_back(center + std::polar(r, 2.0 * std::numbers::pi * (j + 0.25) / na));
    }
  }
  auto max_error = [&](const BergmanBasis& b) {
    std::vector<double> err(grid.size());
    parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
      const double rho = level_weight_density(b.weight(), grid[i]);
      err[i] = std::abs(bergman_function(b, grid[i]) / rho - 1.0);
    });
    const auto it = std::max_element(err.begin(), err.end());
    return std::make_pair(*it, grid[static_cast<std::size_t>(it - err.begin())]);
  };
  std::vector<json> rows;
  std::vector<double> errors;
  json incomplete = json::array();
  bool fs_ok = true;
  bool resolution_ok = true;
  std::string fs_detail;
  double worst_resolution = 0.0;
  for (int p : cfg.p_grid) {
    try {
      const QuadratureSpec spec = cfg.basis_quadrature(p);
      const BergmanBasis b = cache.get_or_build(cfg.weight_sequence(), p, make_fs_quadrature(spec));
      const BergmanBasis fine =
          build_basis(cfg.weight_sequence(), p, make_fs_quadrature(refined_spec(spec)));
      const auto [err, where] = max_error(b);
      const double err_fine = max_error(fine).first;
      const double resolution = std::abs(err - err_fine);
      worst_resolution = std::max(worst_resolution, resolution);
      if (resolution > cfg.thresholds.diagonal_fs_tolerance) resolution_ok = false;
      json row = {{"p", p},
                  {"d_p", b.dimension()},
                  {"grid_points", grid.size()},
                  {"max_ratio_error", err},
                  {"argmax", {where.real(), where.imag()}},
                  {"max_ratio_error_refined_rule", err_fine},
                  {"resolution_difference", resolution}};
      if (fs) {
        const double exact = 1.0 / p;
        row["exact_discrepancy"] = exact;
        row["deviation_from_exact"] = std::abs(err - exact);
        if (!(std::abs(err - exact) <= cfg.thresholds.diagonal_fs_tolerance)) fs_ok = false;
        fs_detail += (fs_detail.empty() ? "" : "; ") + std::string("p=") + std::to_string(p) +
                     ": |err - 1/p| = " + fmt(std::abs(err - exact));
      }
      rows.push_back(row);
      errors.push_back(err);
    } catch (const QuadratureFailure& e) {
      incomplete.push_back({{"p", p}, {"reason", e.what()}});
    }
  }
  rep.body["rows"] = rows;
  rep.body["incomplete"] = incomplete;
  bool nonincreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] > errors[i - 1] * (1.0 + 1e-12)) nonincreasing = false;
  }
  rep.verdicts.push_back({"cells_complete", incomplete.empty(),
                          std::to_string(incomplete.size()) + " incomplete levels"});
  rep.verdicts.push_back({"ratio_error_nonincreasing", nonincreasing, "errors " + join(errors)});
  rep.verdicts.push_back({"resolution_consistency", resolution_ok,
                          "max |err(default rule) - err(refined rule)| = " + fmt(worst_resolution)});
  if (fs) {
    rep.verdicts.push_back({"fs_exact_discrepancy", fs_ok, fs_detail});
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();
  return rep;
}

ExperimentReport run_bergman_decay(const ExperimentConfig& cfg) {
  require_kind(cfg, ExperimentKind::BergmanDecay);
  if (!(cfg.weight.strict_positivity() > 0.0)) {
    throw UnsupportedOperation("bergman-decay: weight " + cfg.weight.describe() +
                               " has no strict positivity bound");
  }
  if (!cfg.weight.has_curvature_density()) {
    throw UnsupportedOperation("bergman-decay: weight " + cfg.weight.describe() +
                               " has no closed-form curvature density");
  }
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.body = base_body(cfg);
  BasisCache cache(cfg.cache_dir);

  struct Pair {
    Complex z, w;
    double d;
  };
  std::vector<Pair> pairs;
  Rng rng = make_rng(derive_seed(cfg.master_seed, {kDecayTag}));
  for (int i = 0; i < cfg.decay.base_points; ++i) {
    const Complex z = fs_distributed_point(rng);
    for (int j = 0; j < cfg.decay.distances; ++j) {
      const double s = static_cast<double>(j) / cfg.decay.distances;
      const double theta = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
      const auto w = chordal_offset(z, s, theta);
      if (w) pairs.push_back({z, *w, chordal_distance(z, *w)});
    }
  }
  const bool fs = cfg.weight.kind() == WeightKind::FubiniStudy;

  struct Level {
    int p;
    double a_p;
    std::vector<double> x, y;
    double closed_form_error = 0.0;
  };
  std::vector<Level> levels;
  json incomplete = json::array();
  for (int p : cfg.p_grid) {
    BergmanBasis b;
    try {
      b = cache.get_or_build(cfg.weight_sequence(), p, make_fs_quadrature(cfg.basis_quadrature(p)));
    } catch (const QuadratureFailure& e) {
      incomplete.push_back({{"p", p}, {"reason", e.what()}});
      continue;
    }
    Level lv;
    lv.p = p;
    lv.a_p = b.weight().strict_positivity();
    lv.x.resize(pairs.size());
    lv.y.resize(pairs.size());
    std::vector<double> cf(pairs.size(), 0.0);
    parallel_for(pairs.size(), cfg.workers, [&](std::size_t i) {
      const Pair& pr = pairs[i];
      const double lk = log_bergman_kernel_norm(b, pr.z, pr.w);
      lv.y[i] = lk - std::log(b.weight().curvature_density(pr.z)) -
                std::log(b.weight().curvature_density(pr.w));
      lv.x[i] = std::sqrt(lv.a_p) * pr.d;
      if (fs) {
        // Absolute error relative to the diagonal value (p + 1)^2.
        const double exact = p * std::log1p(-pr.d * pr.d);
        cf[i] = std::abs(std::exp(lk - 2.0 * std::log(p + 1.0)) - std::exp(exact));
      }
    });
    lv.closed_form_error = *std::max_element(cf.begin(), cf.end());
    levels.push_back(std::move(lv));
  }
  double max_y = -std::numeric_limits<double>::infinity();
  for (const Level& lv : levels) {
    for (double y : lv.y) max_y = std::max(max_y, y);
  }
  const double log_c = max_y + cfg.decay.headroom;
  std::vector<double> rates;
  json rows = json::array();
  for (const Level& lv : levels) {
    double t_p = std::numeric_limits<double>::infinity();
    double level_max_y = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lv.x.size(); ++i) {
      level_max_y = std::max(level_max_y, lv.y[i]);
      if (lv.x[i] > 0.0) t_p = std::min(t_p, (log_c - lv.y[i]) / lv.x[i]);
    }
    rates.push_back(t_p);
    json row = {{"p", lv.p},
                {"a_p", lv.a_p},
                {"pairs", lv.x.size()},
                {"rate", t_p},
                {"max_log_khat", level_max_y}};
    if (fs) row["closed_form_max_abs_error"] = lv.closed_form_error;
    rows.push_back(row);
  }
  const double rate = rates.empty() ? 0.0 : *std::min_element(rates.begin(), rates.end());
  const double rate_max = rates.empty() ? 0.0 : *std::max_element(rates.begin(), rates.end());
  const double variation = rate > 0.0 ? (rate_max - rate) / rate : std::numeric_limits<double>::infinity();
  // The certified bound, checked pair by pair.
  long long violations = 0;
  for (const Level& lv : levels) {
    for (std::size_t i = 0; i < lv.x.size(); ++i) {
      if (lv.y[i] > log_c - rate * lv.x[i] + 1e-12) ++violations;
    }
  }
  rep.body["rows"] = rows;
  rep.body["incomplete"] = incomplete;
  rep.body["fit"] = {{"log_C", log_c},
                     {"C", std::exp(log_c)},
                     {"T", rate},
                     {"T_variation", variation},
                     {"headroom", cfg.decay.headroom},
                     {"method",
                      "log C = max log Khat + headroom; T = min over levels and pairs of "
                      "(log C - log Khat) / (sqrt(a_p) d)"},
                     {"distance", "chordal |z - w| / sqrt((1 + |z|^2)(1 + |w|^2))"},
                     {"violations", violations}};
  rep.verdicts.push_back({"cells_complete", incomplete.empty(),
                          std::to_string(incomplete.size()) + " incomplete levels"});
  rep.verdicts.push_back({"decay_rate_minimum", rate >= cfg.thresholds.decay_min_rate && violations == 0,
                          "T = " + fmt(rate) + " >= " + fmt(cfg.thresholds.decay_min_rate) +
                              ", violations " + std::to_string(violations)});
  rep.verdicts.push_back({"decay_rate_stability", variation <= cfg.thresholds.decay_rate_variation,
                          "rates " + join(rates) + ", variation " + fmt(variation)});
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();
  return rep;
}

ExperimentReport run_moment_certify(const ExperimentConfig& cfg) {
  require_kind(cfg, ExperimentKind::MomentCertify);
  if (cfg.ensembles.empty()) throw InvalidConfiguration("moments needs an ensemble");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.body = base_body(cfg);
  const Thresholds& th = cfg.thresholds;

  // Dimensions d_p and masses A_p of the configured levels.
  std::vector<int> dims;
  std::vector<double> masses;
  BasisCache cache(cfg.cache_dir);
  for (int p : cfg.p_grid) {
    const BergmanBasis b =
        cache.get_or_build(cfg.weight_sequence(), p, make_fs_quadrature(cfg.basis_quadrature(p)));
    dims.push_back(b.dimension());
    masses.push_back(b.weight().total_mass());
  }
  std::vector<int> ks = cfg.moments.k_grid.empty() ? dims : cfg.moments.k_grid;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  json tables = json::array();
  json hypotheses = json::array();
  json tails = json::array();
  for (std::size_t ei = 0; ei < cfg.ensembles.size(); ++ei) {
    const Ensemble& e = cfg.ensembles[ei];
    std::vector<double> nus;
    json skipped = json::array();
    for (double nu : cfg.moments.nu) {
      if (e.admits_nu(nu)) {
        nus.push_back(nu);
      } else {
        skipped.push_back(nu);
      }
    }
    // est[nu index][k index]
    std::vector<std::vector<MomentEstimate>> est(nus.size());
    for (int k : ks) {
      const std::uint64_t seed =
          derive_seed(cfg.master_seed, {kMomentTag, static_cast<std::uint64_t>(ei), static_cast<std::uint64_t>(k)});
      const CVector u = moment_direction(
          e, k, derive_seed(cfg.master_seed, {kDirectionTag, static_cast<std::uint64_t>(ei), static_cast<std::uint64_t>(k)}));
      if (nus.empty()) continue;
      const std::vector<MomentEstimate> m =
          moment_B_parallel(e, u, nus, cfg.moments.trials, seed, cfg.workers);
      for (std::size_t i = 0; i < nus.size(); ++i) {
        est[i].push_back(m[i]);
        json row = {{"kind", e.name()},
                    {"k", k},
                    {"nu", nus[i]},
                    {"estimate", m[i].estimate},
                    {"stderr", m[i].standard_error},
                    {"trials", m[i].trials},
                    {"seed", seed},
                    {"rejected", m[i].rejected}};
        rep.moment_rows.push_back(row);
      }
    }
    json table = {{"ensemble", e.name()}, {"nu_range", e.nu_range()}, {"skipped_nu", skipped},
                  {"k_grid", ks}};
    const std::string tag = "[" + e.name() + "]";
    json checks = json::array();
    for (std::size_t i = 0; i < nus.size(); ++i) {
      const double nu = nus[i];
      json entries = json::array();
      for (std::size_t j = 0; j < ks.size(); ++j) {
        entries.push_back({{"k", ks[j]}, {"estimate", est[i][j].estimate},
                           {"stderr", est[i][j].standard_error}});
      }
      json check = {{"nu", nu}, {"estimates", entries}};
      if (e.kind() == EnsembleKind::Gaussian || e.kind() == EnsembleKind::FSVolume) {
        const double g = gamma_nu(e.kind(), nu);
        double worst = 0.0;
        for (const MomentEstimate& m : est[i]) {
          worst = std::max(worst, std::abs(m.estimate - g) / m.standard_error);
        }
        check["gamma_nu"] = g;
        check["max_deviation_in_stderr"] = worst;
        rep.verdicts.push_back({"gamma_match" + tag + "[nu=" + fmt(nu) + "]",
                                worst <= th.moment_sigma,
                                "max |estimate - Gamma_nu| / stderr = " + fmt(worst) + " <= " +
                                    fmt(th.moment_sigma)});
      } else if (e.kind() == EnsembleKind::Sphere || e.kind() == EnsembleKind::SphereModerate) {
        std::vector<double> mk;
        std::vector<int> kk;
        for (std::size_t j = 0; j < ks.size(); ++j) {
          if (ks[j] < 2) continue;
          mk.push_back(est[i][j].estimate / std::pow(std::log(ks[j]), nu));
          kk.push_back(ks[j]);
        }
        if (mk.size() >= 1) {
          const double m_cal = mk.back();
          json residuals = json::array();
          bool nonpositive = true;
          for (std::size_t j = 0; j < mk.size(); ++j) {
            const double r = (mk[j] - m_cal) * std::pow(std::log(kk[j]), nu);
            residuals.push_back({{"k", kk[j]}, {"residual", r}});
            if (r > 0.0) nonpositive = false;
          }
          const double mmax = *std::max_element(mk.begin(), mk.end());
          const double mmin = *std::min_element(mk.begin(), mk.end());
          const double variation = (mmax - mmin) / mmax;
          check["M_per_k"] = mk;
          check["M_calibrated_on_largest_k"] = m_cal;
          check["M_envelope"] = mmax;
          check["residuals"] = residuals;
          check["residuals_nonpositive"] = nonpositive;
          check["M_variation"] = variation;
          if (nu == 1.0) {
            json exact = json::array();
            for (int k : kk) exact.push_back({{"k", k}, {"value", sphere_log_moment(k)}});
            check["exact_nu1"] = exact;
          }
          rep.verdicts.push_back({"log_k_envelope" + tag + "[nu=" + fmt(nu) + "]",
                                  std::isfinite(mmax) && variation <= th.sphere_m_variation,
                                  "M_k = estimate / (log k)^nu in [" + fmt(mmin) + ", " +
                                      fmt(mmax) + "], variation " + fmt(variation) + " <= " +
                                      fmt(th.sphere_m_variation)});
        }
      } else {
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t j = 0; j < ks.size(); ++j) {
          lx.push_back(std::log(ks[j]));
          ly.push_back(std::log(est[i][j].estimate));
        }
        if (lx.size() >= 2) {
          const stats::LinearFit f = stats::linear_fit(lx, ly);
          const double expected = nu / e.rho();
          check["fitted_exponent"] = f.slope;
          check["fitted_gamma"] = std::exp(f.intercept);
          check["expected_exponent"] = expected;
          rep.verdicts.push_back({"k_power_fit" + tag + "[nu=" + fmt(nu) + "]",
                                  std::abs(f.slope - expected) <= th.moment_exponent_tolerance,
                                  "exponent " + fmt(f.slope) + " vs nu/rho = " + fmt(expected) +
                                      " +- " + fmt(th.moment_exponent_tolerance)});
        }
      }
      checks.push_back(check);
    }
    table["checks"] = checks;
    tables.push_back(table);

    // Hypothesis quantities along the p-grid.
    for (std::size_t pi = 0; pi < cfg.p_grid.size(); ++pi) {
      json h = {{"ensemble", e.name()},
                {"p", cfg.p_grid[pi]},
                {"d_p", dims[pi]},
                {"A_p", masses[pi]},
                {"log_d_p_over_A_p", std::log(static_cast<double>(dims[pi])) / masses[pi]}};
      const auto it = std::find(ks.begin(), ks.end(), dims[pi]);
      json cp = json::array();
      if (it != ks.end()) {
        const std::size_t j = static_cast<std::size_t>(it - ks.begin());
        for (std::size_t i = 0; i < nus.size(); ++i) {
          cp.push_back({{"nu", nus[i]},
                        {"C_p", est[i][j].estimate},
                        {"C_p_times_A_p_pow_minus_nu", est[i][j].estimate * std::pow(masses[pi], -nus[i])}});
        }
      }
      h["moments"] = cp;
      hypotheses.push_back(h);
    }

    // Tail and small-ball probabilities at the smallest k.
    if (!cfg.moments.tail_r_grid.empty()) {
      Rng rng = make_rng(derive_seed(cfg.master_seed, {kTailTag, static_cast<std::uint64_t>(ei)}));
      const TailTable tt =
          tail_smallball_check(e, ks.front(), cfg.moments.tail_r_grid, cfg.moments.trials, rng);
      json rows = json::array();
      std::vector<double> lr;
      std::vector<double> lt;
      for (const TailRow& r : tt.rows) {
        rows.push_back({{"R", r.R}, {"tail_prob", r.tail_prob}, {"tail_stderr", r.tail_stderr},
                        {"smallball_prob", r.smallball_prob},
                        {"smallball_stderr", r.smallball_stderr}});
        if (r.tail_prob > 0.0) {
          lr.push_back(std::log(r.R));
          lt.push_back(std::log(r.tail_prob));
        }
      }
      json t = {{"ensemble", e.name()}, {"k", ks.front()}, {"trials", tt.trials}, {"rows", rows}};
      if (lr.size() >= 2) t["fitted_tail_exponent"] = -stats::linear_fit(lr, lt).slope;
      tails.push_back(t);
    }
  }
  rep.body["moment_tables"] = tables;
  rep.body["hypotheses"] = hypotheses;
  rep.body["tails"] = tails;
  rep.body["rows"] = rep.moment_rows;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Equidistribution:
      return run_equidistribution(cfg);
    case ExperimentKind::Universality:
      return run_universality(cfg);
    case ExperimentKind::BergmanDiagonal:
      return run_bergman_diagonal(cfg);
    case ExperimentKind::BergmanDecay:
      return run_bergman_decay(cfg);
    case ExperimentKind::MomentCertify:
      return run_moment_certify(cfg);
  }
  throw InvalidConfiguration("unknown experiment kind");
}

void write_outputs(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    if (!os) throw Error("cannot write " + (dir / "report.json").string());
    os << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "trials.jsonl");
    if (!os) throw Error("cannot write " + (dir / "trials.jsonl").string());
    for (const TrialRecord& r : report.trials) os << to_json(r).dump() << '\n';
  }
  if (report.kind == ExperimentKind::MomentCertify) {
    std::ofstream os(dir / "moments.csv");
    if (!os) throw Error("cannot write " + (dir / "moments.csv").string());
    os << "kind,k,nu,estimate,stderr,trials,seed\n" << std::setprecision(17);
    for (const json& r : report.moment_rows) {
      os << r["kind"].get<std::string>() << ',' << r["k"].get<int>() << ','
         << r["nu"].get<double>() << ',' << r["estimate"].get<double>() << ','
         << r["stderr"].get<double>() << ',' << r["trials"].get<long long>() << ','
         << r["seed"].get<std::uint64_t>() << '\n';
    }
  }
}

TrialOutcome replay_seed(const ExperimentConfig& cfg, int p, const std::string& ensemble,
                         std::uint64_t seed) {
  const int e = cfg.ensemble_index(ensemble);
  BasisCache cache(cfg.cache_dir);
  const BergmanBasis b =
      cache.get_or_build(cfg.weight_sequence(), p, make_fs_quadrature(cfg.basis_quadrature(p)));
  const Quadrature potential_rule = make_fs_quadrature(cfg.potential_quadrature());
  return run_trial(b, cfg.ensembles[static_cast<std::size_t>(e)], e, seed, -1, potential_rule);
}

TrialOutcome replay_trial(const ExperimentConfig& cfg, int p, const std::string& ensemble,
                          int trial) {
  const int e = cfg.ensemble_index(ensemble);
  TrialOutcome o = replay_seed(cfg, p, ensemble, trial_seed(cfg.master_seed, p, e, trial));
  o.record.trial = trial;
  return o;
}

std::string json_difference(const json& a, const json& b, double tolerance) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    if (x == y || (std::isnan(x) && std::isnan(y))) return "";
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return std::abs(x - y) <= tolerance * scale ? "" : "/ (" + fmt(x) + " vs " + fmt(y) + ")";
  }
  if (a.type() != b.type()) return "/ (type)";
  if (a.is_object()) {
    if (a.size() != b.size()) return "/ (keys)";
    for (const auto& [key, value] : a.items()) {
      if (!b.contains(key)) return "/" + key + " (missing)";
      const std::string d = json_difference(value, b.at(key), tolerance);
      if (!d.empty()) return "/" + key + d;
    }
    return "";
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return "/ (length)";
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string d = json_difference(a[i], b[i], tolerance);
      if (!d.empty()) return "/" + std::to_string(i) + d;
    }
    return "";
  }
  return a == b ? "" : "/ (value)";
}

}  // namespace randsec
