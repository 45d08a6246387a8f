// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// numbers, the tolerance and the runtime against its budget.
//
//   randsec_acceptance [--only 1,5,9] [--workers N]
//
// Exits with 0 when every selected criterion passes and 1 otherwise.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randsec/bergman_space.hpp"
#include "randsec/ensembles.hpp"
#include "randsec/experiments.hpp"
#include "randsec/parallel.hpp"

using namespace randsec;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

std::string join(const std::vector<double>& v, int digits = 4) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], digits);
  return s;
}

BergmanBasis basis_for(const Weight& w, int p) {
  return build_basis(WeightSequence(w), p, make_fs_quadrature(default_quadrature_spec(p, w)));
}

ExperimentConfig config(json j, int workers) {
  ExperimentConfig cfg = parse_config(j);
  cfg.workers = workers;
  return cfg;
}

// Shared by the experiment criteria and the determinism check.
json equidist_config() {
  return {{"experiment", "equidistribution"},
          {"weight", {{"kind", "fubini_study"}}},
          {"p_grid", {25, 50, 100, 200}},
          {"ensembles", {"gaussian"}},
          {"trials", 200},
          {"master_seed", 5001},
          {"thresholds", {{"radial_cdf_median", 0.05}, {"potential_l1_median", 0.05}}}};
}

json universality_config() {
  return {{"experiment", "universality"},
          {"weight", {{"kind", "fubini_study"}}},
          {"p_grid", {200}},
          {"ensembles", {"gaussian", "fs_volume", "sphere", {{"kind", "heavy_tail"}, {"rho", 4}}}},
          {"trials", 200},
          {"master_seed", 6001},
          {"thresholds", {{"universality_spread_factor", 3.0}}}};
}

json infinity_config() {
  return {{"experiment", "equidistribution"},
          {"weight", {{"kind", "scaled_fs"}, {"alpha", 0.5}}},
          {"p_grid", {100}},
          {"ensembles", {"gaussian"}},
          {"trials", 200},
          {"master_seed", 7001}};
}

json decay_config() {
  return {{"experiment", "bergman_decay"},
          {"weight", {{"kind", "fubini_study"}}},
          {"p_grid", {25, 50, 100}},
          {"decay", {{"base_points", 40}, {"distances", 25}, {"headroom", 1.0}}},
          {"thresholds", {{"decay_min_rate", 0.5}, {"decay_rate_variation", 0.2}}},
          {"master_seed", 8001}};
}

struct Context {
  int workers = 1;
  // Statistics of experiment runs, keyed by criterion, for the determinism check.
  std::map<int, json> statistics;
};

const Verdict* find_verdict(const ExperimentReport& r, const std::string& prefix) {
  for (const Verdict& v : r.verdicts) {
    if (v.name.rfind(prefix, 0) == 0) return &v;
  }
  return nullptr;
}

Outcome fs_exactness(Context&) {
  double coeff_err = 0.0;
  double kernel_err = 0.0;
  std::vector<Complex> grid;
  for (int i = 0; i < 40; ++i) {
    const double r = std::tan(0.5 * std::numbers::pi * (i + 0.5) / 40.0);
    for (int j = 0; j < 25; ++j) grid.push_back(std::polar(r, 2.0 * std::numbers::pi * (j + 0.3) / 25.0));
  }
  for (int p : {2, 10, 50, 200}) {
    const BergmanBasis b = basis_for(Weight::fubini_study(), p);
    if (b.dimension() != p + 1) return {false, "d_p = " + std::to_string(b.dimension()) + " at p=" + std::to_string(p)};
    // Compared in log form.
    for (int j = 0; j <= p; ++j) {
      const double log_exact = 0.5 * (std::log(p + 1.0) + std::lgamma(p + 1.0) - std::lgamma(j + 1.0) -
                                      std::lgamma(p - j + 1.0));
      const double log_b = b.log_monomial_scale()[j] + std::log(std::abs(b.scaled_coeffs()(j, j)));
      coeff_err = std::max(coeff_err, std::abs(std::expm1(log_b - log_exact)));
    }
    for (const Complex& z : grid) {
      kernel_err = std::max(kernel_err, std::abs(bergman_function(b, z) / (p + 1.0) - 1.0));
    }
  }
  return {coeff_err <= 1e-8 && kernel_err <= 1e-8,
          "max rel err B_jj " + fmt(coeff_err, 3) + ", P_p at " + std::to_string(grid.size()) +
              " points " + fmt(kernel_err, 3) + " (tol 1e-8)"};
}

Outcome trace_identity(Context&) {
  double worst = 0.0;
  std::string where;
  for (const Weight& w : {Weight::fubini_study(), Weight::scaled_fs(0.5),
                          Weight::translated_fs(Complex(1.0, 0.0))}) {
    for (int p : {25, 50, 100}) {
      const QuadratureSpec spec = default_quadrature_spec(p, w);
      const BergmanBasis b = build_basis(WeightSequence(w), p, make_fs_quadrature(spec));
      const double err = std::abs(trace_integral(b, make_fs_quadrature(refined_spec(spec))) - b.dimension());
      if (err >= worst) {
        worst = err;
        where = w.describe() + ", p=" + std::to_string(p);
      }
    }
  }
  return {worst <= 1e-6, "max |int P_p - d_p| = " + fmt(worst, 3) + " at " + where + " (tol 1e-6)"};
}

Outcome moment_constants(Context& ctx) {
  bool ok = true;
  double worst = 0.0;
  std::string detail;
  const double nus[] = {1.0, 2.0};
  for (EnsembleKind kind : {EnsembleKind::Gaussian, EnsembleKind::FSVolume}) {
    const Ensemble e = kind == EnsembleKind::Gaussian ? Ensemble::gaussian() : Ensemble::fs_volume();
    for (int k : {16, 64, 256}) {
      Rng rng = make_rng(derive_seed(3001, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(k)}));
      const CVector u = random_unit_vector(k, rng);
      const auto m = moment_B_parallel(e, u, nus, 1000000, derive_seed(3002, {static_cast<std::uint64_t>(k)}),
                                       ctx.workers);
      for (int i = 0; i < 2; ++i) {
        const double z = std::abs(m[static_cast<std::size_t>(i)].estimate - gamma_nu(kind, nus[i])) /
                         m[static_cast<std::size_t>(i)].standard_error;
        worst = std::max(worst, z);
        if (z > 3.0) {
          ok = false;
          detail += " " + e.name() + " k=" + std::to_string(k) + " nu=" + fmt(nus[i]) + ": " + fmt(z, 3) + " sigma;";
        }
      }
    }
  }
  return {ok, "12 estimates at 1e6 samples, max |est - Gamma_nu| = " + fmt(worst, 3) +
                  " stderr (tol 3)" + (detail.empty() ? "" : ";" + detail)};
}

Outcome sphere_growth(Context& ctx) {
  const std::vector<int> ks = {4, 16, 64, 256, 1024};
  const double nus[] = {1.0};
  std::vector<double> est;
  std::vector<double> exact;
  for (int k : ks) {
    CVector u = CVector::Zero(k);
    u[0] = 1.0;
    const auto m = moment_B_parallel(Ensemble::sphere(), u, nus, 200000,
                                     derive_seed(4001, {static_cast<std::uint64_t>(k)}), ctx.workers);
    est.push_back(m[0].estimate);
    exact.push_back(sphere_log_moment(k));
  }
  const double m_cal = est.back() / std::log(ks.back());
  std::vector<double> residuals;
  std::vector<double> ratios;
  bool ok = std::isfinite(m_cal);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    residuals.push_back(est[i] - m_cal * std::log(ks[i]));
    ratios.push_back(est[i] / std::log(ks[i]));
    if (residuals.back() > 0.0) ok = false;
  }
  return {ok, "M = " + fmt(m_cal) + " from k=1024; residuals [" + join(residuals, 3) +
                  "] must be <= 0; estimate/log k = [" + join(ratios, 3) + "], exact (1/2)H_(k-1) = [" +
                  join(exact, 4) + "]"};
}

Outcome equidistribution(Context& ctx) {
  const ExperimentReport r = run_equidistribution(config(equidist_config(), ctx.workers));
  ctx.statistics[5] = r.statistics();
  std::vector<double> rad;
  std::vector<double> pot;
  for (const json& row : r.body["rows"]) {
    rad.push_back(row["radial_cdf_dist"]["median"].get<double>());
    pot.push_back(row["potential_l1"]["median"].get<double>());
  }
  bool ok = true;
  for (const char* name : {"cells_complete", "radial_cdf_median_decreasing", "radial_cdf_median_below_threshold",
                           "potential_l1_median_decreasing", "potential_l1_median_below_threshold"}) {
    const Verdict* v = find_verdict(r, name);
    ok = ok && v && v->pass;
  }
  return {ok, "medians radial [" + join(rad) + "], potential [" + join(pot) +
                  "] over p = 25, 50, 100, 200; strictly decreasing, p=200 below 0.05 / 0.05"};
}

Outcome universality(Context& ctx) {
  const ExperimentReport r = run_universality(config(universality_config(), ctx.workers));
  ctx.statistics[6] = r.statistics();
  const double tol = r.body["calibration"]["tolerance"].get<double>();
  double worst = 0.0;
  std::string pair;
  for (const json& c : r.body["comparisons"]) {
    const double d = c["median_difference"].get<double>();
    if (d > worst) {
      worst = d;
      pair = c["a"].get<std::string>() + " vs " + c["b"].get<std::string>();
    }
  }
  const Verdict* v = find_verdict(r, "pairwise_median_differences");
  return {v && v->pass, "max pairwise median difference " + fmt(worst) + " (" + pair + ") vs tolerance " +
                            fmt(tol) + " = 3 x Gaussian spread " +
                            fmt(r.body["calibration"]["spread"].get<double>())};
}

Outcome mass_at_infinity(Context& ctx) {
  const ExperimentReport r = run_equidistribution(config(infinity_config(), ctx.workers));
  ctx.statistics[7] = r.statistics();
  const double mean = r.body["rows"][0]["inf_fraction"]["mean"].get<double>();
  return {mean >= 0.45 && mean <= 0.55, "mean fraction of zeros at infinity " + fmt(mean) + " in [0.45, 0.55]"};
}

Outcome decay(Context& ctx) {
  const ExperimentReport r = run_bergman_decay(config(decay_config(), ctx.workers));
  ctx.statistics[8] = r.statistics();
  const json& fit = r.body["fit"];
  std::vector<double> rates;
  long long pairs = 0;
  for (const json& row : r.body["rows"]) {
    rates.push_back(row["rate"].get<double>());
    pairs = row["pairs"].get<long long>();
  }
  const bool ok = fit["T"].get<double>() >= 0.5 && fit["T_variation"].get<double>() <= 0.2 &&
                  fit["violations"].get<long long>() == 0 && pairs >= 1000 && r.passed();
  return {ok, std::to_string(pairs) + " pairs per p; C = " + fmt(fit["C"].get<double>()) + ", T = " +
                  fmt(fit["T"].get<double>()) + " (>= 0.5), per-p rates [" + join(rates) + "], variation " +
                  fmt(fit["T_variation"].get<double>()) + " (<= 0.2), violations " +
                  std::to_string(fit["violations"].get<long long>())};
}

Outcome determinism(Context& ctx) {
  // Re-run the experiment criteria with the other worker count.
  const int other = ctx.workers == 1 ? 4 : 1;
  std::map<int, std::function<ExperimentReport(int)>> reruns = {
      {5, [](int w) { return run_equidistribution(config(equidist_config(), w)); }},
      {7, [](int w) { return run_equidistribution(config(infinity_config(), w)); }},
      {8, [](int w) { return run_bergman_decay(config(decay_config(), w)); }},
  };
  if (ctx.statistics.empty()) {
    ctx.statistics[7] = reruns[7](ctx.workers).statistics();
  }
  bool ok = true;
  std::string detail;
  for (const auto& [id, stats] : ctx.statistics) {
    json again;
    if (reruns.count(id)) {
      again = reruns[id](other).statistics();
    } else if (id == 6) {
      again = run_universality(config(universality_config(), other)).statistics();
    } else {
      continue;
    }
    const std::string diff = json_difference(stats, again, 1e-10);
    detail += (detail.empty() ? "" : ", ") + std::string("criterion ") + std::to_string(id) + ": " +
              (diff.empty() ? "identical" : "differs at " + diff);
    if (!diff.empty()) ok = false;
  }
  return {ok, "workers " + std::to_string(ctx.workers) + " vs " + std::to_string(other) + " (tol 1e-10): " + detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)(Context&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randsec acceptance suite"};
  std::vector<int> only;
  int workers = 1;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--workers", workers, "worker threads for the primary runs (1 or 4)");
  CLI11_PARSE(app, argc, argv);

  const Criterion criteria[] = {
      {1, "FS exactness", 10.0, fs_exactness},
      {2, "trace identity", 60.0, trace_identity},
      {3, "moment constants", 120.0, moment_constants},
      {4, "sphere moment growth", 120.0, sphere_growth},
      {5, "equidistribution", 600.0, equidistribution},
      {6, "universality", 1800.0, universality},
      {7, "mass at infinity", 300.0, mass_at_infinity},
      {8, "off-diagonal decay", 300.0, decay},
      {9, "determinism", 0.0, determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  Context ctx;
  ctx.workers = workers;
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_seconds <= 0.0 || secs < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s";
    if (c.budget_seconds > 0.0) std::cout << ", budget " << fmt(c.budget_seconds) << " s";
    if (!in_budget) std::cout << ", over budget";
    std::cout << ")" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
