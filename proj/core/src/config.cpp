#include "randsec/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "randsec/error.hpp"

namespace randsec {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw InvalidConfiguration(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw InvalidConfiguration("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfiguration(std::string("bad value for '") + key + "': " + e.what());
  }
}

Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw InvalidConfiguration("complex values are written as [re, im]");
}

RegularizerRule rule_from_string(const std::string& s) {
  if (s == "none") return RegularizerRule::None;
  if (s == "sqrt") return RegularizerRule::Sqrt;
  if (s == "log") return RegularizerRule::Log;
  if (s == "table") return RegularizerRule::Table;
  throw InvalidConfiguration("unknown regularizer rule '" + s + "'");
}

std::string rule_to_string(RegularizerRule r) {
  switch (r) {
    case RegularizerRule::None:
      return "none";
    case RegularizerRule::Sqrt:
      return "sqrt";
    case RegularizerRule::Log:
      return "log";
    case RegularizerRule::Table:
      return "table";
  }
  return "none";
}

Ensemble ensemble_from_json(const json& j) {
  if (j.is_string()) return ensemble_from_name(j.get<std::string>());
  check_keys(j, "ensemble", {"kind", "rho"});
  const std::string kind = get_or<std::string>(j, "kind", "");
  std::optional<double> rho;
  if (j.contains("rho")) rho = j.at("rho").get<double>();
  return ensemble_from_name(kind, rho);
}

json ensemble_to_json(const Ensemble& e) {
  switch (e.kind()) {
    case EnsembleKind::Gaussian:
      return {{"kind", "gaussian"}};
    case EnsembleKind::FSVolume:
      return {{"kind", "fs_volume"}};
    case EnsembleKind::Sphere:
      return {{"kind", "sphere"}};
    case EnsembleKind::SphereModerate:
      return {{"kind", "sphere_moderate"}};
    case EnsembleKind::HeavyTailIID:
      return {{"kind", "heavy_tail"}, {"rho", e.rho()}};
  }
  return {};
}

std::uint64_t seed_from_json(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_string()) {
    try {
      std::size_t pos = 0;
      const std::string s = j.get<std::string>();
      const std::uint64_t v = std::stoull(s, &pos, 0);
      if (pos == s.size()) return v;
    } catch (const std::logic_error&) {
    }
  }
  throw InvalidConfiguration("master_seed must be a non-negative 64-bit integer");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Equidistribution:
      return "equidistribution";
    case ExperimentKind::Universality:
      return "universality";
    case ExperimentKind::BergmanDiagonal:
      return "bergman_diagonal";
    case ExperimentKind::BergmanDecay:
      return "bergman_decay";
    case ExperimentKind::MomentCertify:
      return "moment_certify";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "equidistribution" || s == "equidist") return ExperimentKind::Equidistribution;
  if (s == "universality") return ExperimentKind::Universality;
  if (s == "bergman_diagonal" || s == "bergman-diag") return ExperimentKind::BergmanDiagonal;
  if (s == "bergman_decay" || s == "bergman-decay") return ExperimentKind::BergmanDecay;
  if (s == "moment_certify" || s == "moments") return ExperimentKind::MomentCertify;
  throw InvalidConfiguration("unknown experiment kind '" + s + "'");
}

Weight weight_from_json(const json& j) {
  check_keys(j, "weight", {"kind", "alpha", "center", "name"});
  const std::string kind = get_or<std::string>(j, "kind", "");
  if (kind == "fubini_study") return Weight::fubini_study();
  if (kind == "scaled_fs") {
    if (!j.contains("alpha")) throw InvalidConfiguration("scaled_fs weight needs alpha");
    return Weight::scaled_fs(j.at("alpha").get<double>());
  }
  if (kind == "translated_fs") {
    if (!j.contains("center")) throw InvalidConfiguration("translated_fs weight needs center");
    return Weight::translated_fs(complex_from_json(j.at("center")));
  }
  if (kind == "custom") {
    return custom_weight(get_or<std::string>(j, "name", ""));
  }
  throw InvalidConfiguration("unknown weight kind '" + kind + "'");
}

WeightSequence ExperimentConfig::weight_sequence() const {
  if (regularizer == RegularizerRule::Table) return WeightSequence(weight, regularizer_table);
  return WeightSequence(weight, regularizer);
}

QuadratureSpec ExperimentConfig::basis_quadrature(int p) const {
  QuadratureSpec spec = default_quadrature_spec(p, weight);
  spec.radial_nodes = p + quadrature.radial_extra;
  spec.angular_nodes = 2 * p + quadrature.angular_extra;
  return spec;
}

QuadratureSpec ExperimentConfig::potential_quadrature() const {
  QuadratureSpec spec;
  spec.radial_nodes = quadrature.potential_radial;
  spec.angular_nodes = quadrature.potential_angular;
  return spec;
}

int ExperimentConfig::ensemble_index(const std::string& name) const {
  for (std::size_t i = 0; i < ensembles.size(); ++i) {
    if (ensembles[i].name() == name) return static_cast<int>(i);
  }
  // Accept a bare kind when it is unambiguous.
  int found = -1;
  for (std::size_t i = 0; i < ensembles.size(); ++i) {
    const std::string n = ensembles[i].name();
    if (n.rfind(name, 0) == 0) {
      if (found >= 0) throw InvalidConfiguration("ensemble name '" + name + "' is ambiguous");
      found = static_cast<int>(i);
    }
  }
  if (found < 0) throw InvalidConfiguration("ensemble '" + name + "' is not configured");
  return found;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config",
             {"experiment", "weight", "regularizer", "p_grid", "ensembles", "trials",
              "master_seed", "quadrature", "output_dir", "dump_zeros", "workers", "cache_dir",
              "thresholds", "moments", "decay", "diagonal"});
  ExperimentConfig cfg;
  if (!j.contains("experiment")) throw InvalidConfiguration("config needs 'experiment'");
  cfg.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
  if (j.contains("weight")) {
    cfg.weight_spec = j.at("weight");
    cfg.weight = weight_from_json(cfg.weight_spec);
  }
  if (j.contains("regularizer")) {
    const json& r = j.at("regularizer");
    check_keys(r, "regularizer", {"rule", "table"});
    cfg.regularizer = rule_from_string(get_or<std::string>(r, "rule", "none"));
    if (cfg.regularizer == RegularizerRule::Table) {
      if (!r.contains("table") || !r.at("table").is_object()) {
        throw InvalidConfiguration("regularizer rule 'table' needs a table object");
      }
      for (const auto& [key, value] : r.at("table").items()) {
        cfg.regularizer_table[std::stoi(key)] = value.get<int>();
      }
    }
  }
  cfg.p_grid = get_or<std::vector<int>>(j, "p_grid", {});
  if (cfg.p_grid.empty()) throw InvalidConfiguration("p_grid must not be empty");
  for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
    if (cfg.p_grid[i] < 1) throw InvalidConfiguration("p_grid entries must be positive");
    if (i > 0 && cfg.p_grid[i] <= cfg.p_grid[i - 1]) {
      throw InvalidConfiguration("p_grid must be strictly increasing");
    }
  }
  if (j.contains("ensembles")) {
    for (const json& e : j.at("ensembles")) cfg.ensembles.push_back(ensemble_from_json(e));
  }
  for (std::size_t a = 0; a < cfg.ensembles.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.ensembles.size(); ++b) {
      if (cfg.ensembles[a] == cfg.ensembles[b] &&
          cfg.kind != ExperimentKind::Universality) {
        throw InvalidConfiguration("ensemble " + cfg.ensembles[a].name() + " listed twice");
      }
    }
  }
  cfg.trials = get_or<int>(j, "trials", cfg.trials);
  if (cfg.trials < 1) throw InvalidConfiguration("trials must be >= 1");
  if (j.contains("master_seed")) cfg.master_seed = seed_from_json(j.at("master_seed"));
  if (j.contains("quadrature")) {
    const json& q = j.at("quadrature");
    check_keys(q, "quadrature",
               {"radial_extra", "angular_extra", "potential_radial", "potential_angular"});
    cfg.quadrature.radial_extra = get_or(q, "radial_extra", cfg.quadrature.radial_extra);
    cfg.quadrature.angular_extra = get_or(q, "angular_extra", cfg.quadrature.angular_extra);
    cfg.quadrature.potential_radial =
        get_or(q, "potential_radial", cfg.quadrature.potential_radial);
    cfg.quadrature.potential_angular =
        get_or(q, "potential_angular", cfg.quadrature.potential_angular);
    if (cfg.quadrature.radial_extra < 1 || cfg.quadrature.angular_extra < 1 ||
        cfg.quadrature.potential_radial < 1 || cfg.quadrature.potential_angular < 1) {
      throw InvalidConfiguration("quadrature node counts must be positive");
    }
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", "");
  cfg.dump_zeros = get_or<bool>(j, "dump_zeros", false);
  cfg.workers = get_or<int>(j, "workers", cfg.workers);
  cfg.cache_dir = get_or<std::string>(j, "cache_dir", "");
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    check_keys(t, "thresholds",
               {"radial_cdf_median", "potential_l1_median", "inf_fraction_tolerance",
                "universality_tolerance", "universality_spread_factor", "decay_min_rate",
                "decay_rate_variation", "moment_sigma", "moment_exponent_tolerance",
                "sphere_m_variation", "diagonal_fs_tolerance"});
    Thresholds& th = cfg.thresholds;
    th.radial_cdf_median = get_or(t, "radial_cdf_median", th.radial_cdf_median);
    th.potential_l1_median = get_or(t, "potential_l1_median", th.potential_l1_median);
    th.inf_fraction_tolerance = get_or(t, "inf_fraction_tolerance", th.inf_fraction_tolerance);
    if (t.contains("universality_tolerance") && !t.at("universality_tolerance").is_null()) {
      th.universality_tolerance = t.at("universality_tolerance").get<double>();
    }
    th.universality_spread_factor =
        get_or(t, "universality_spread_factor", th.universality_spread_factor);
    th.decay_min_rate = get_or(t, "decay_min_rate", th.decay_min_rate);
    th.decay_rate_variation = get_or(t, "decay_rate_variation", th.decay_rate_variation);
    th.moment_sigma = get_or(t, "moment_sigma", th.moment_sigma);
    th.moment_exponent_tolerance =
        get_or(t, "moment_exponent_tolerance", th.moment_exponent_tolerance);
    th.sphere_m_variation = get_or(t, "sphere_m_variation", th.sphere_m_variation);
    th.diagonal_fs_tolerance = get_or(t, "diagonal_fs_tolerance", th.diagonal_fs_tolerance);
  }
  if (j.contains("moments")) {
    const json& m = j.at("moments");
    check_keys(m, "moments", {"nu", "k_grid", "trials", "tail_r_grid"});
    cfg.moments.nu = get_or(m, "nu", cfg.moments.nu);
    cfg.moments.k_grid = get_or(m, "k_grid", cfg.moments.k_grid);
    cfg.moments.trials = get_or(m, "trials", cfg.moments.trials);
    cfg.moments.tail_r_grid = get_or(m, "tail_r_grid", cfg.moments.tail_r_grid);
    if (cfg.moments.nu.empty()) throw InvalidConfiguration("moments.nu must not be empty");
    for (double nu : cfg.moments.nu) {
      if (!(nu >= 1.0)) throw InvalidConfiguration("moments.nu entries must be >= 1");
    }
    for (int k : cfg.moments.k_grid) {
      if (k < 1) throw InvalidConfiguration("moments.k_grid entries must be positive");
    }
  }
  if (j.contains("decay")) {
    const json& d = j.at("decay");
    check_keys(d, "decay", {"base_points", "distances", "headroom"});
    cfg.decay.base_points = get_or(d, "base_points", cfg.decay.base_points);
    cfg.decay.distances = get_or(d, "distances", cfg.decay.distances);
    cfg.decay.headroom = get_or(d, "headroom", cfg.decay.headroom);
    if (cfg.decay.base_points < 1 || cfg.decay.distances < 2 || !(cfg.decay.headroom > 0.0)) {
      throw InvalidConfiguration("decay needs base_points >= 1, distances >= 2, headroom > 0");
    }
  }
  if (j.contains("diagonal")) {
    const json& d = j.at("diagonal");
    check_keys(d, "diagonal", {"radial_points", "angular_points"});
    cfg.diagonal.radial_points = get_or(d, "radial_points", cfg.diagonal.radial_points);
    cfg.diagonal.angular_points = get_or(d, "angular_points", cfg.diagonal.angular_points);
    if (cfg.diagonal.radial_points < 1 || cfg.diagonal.angular_points < 1) {
      throw InvalidConfiguration("diagonal grid sizes must be positive");
    }
  }
  // Regularizer counts for every p in the grid.
  const WeightSequence ws = cfg.weight_sequence();
  for (int p : cfg.p_grid) ws.regularizer_count(p);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw InvalidConfiguration("cannot open config file " + file.string());
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidConfiguration("config " + file.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.kind);
  j["weight"] = cfg.weight_spec;
  json reg = {{"rule", rule_to_string(cfg.regularizer)}};
  if (cfg.regularizer == RegularizerRule::Table) {
    json table = json::object();
    for (const auto& [p, n] : cfg.regularizer_table) table[std::to_string(p)] = n;
    reg["table"] = table;
  }
  j["regularizer"] = reg;
  j["p_grid"] = cfg.p_grid;
  json ens = json::array();
  for (const Ensemble& e : cfg.ensembles) ens.push_back(ensemble_to_json(e));
  j["ensembles"] = ens;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["quadrature"] = {{"radial_extra", cfg.quadrature.radial_extra},
                     {"angular_extra", cfg.quadrature.angular_extra},
                     {"potential_radial", cfg.quadrature.potential_radial},
                     {"potential_angular", cfg.quadrature.potential_angular}};
  j["dump_zeros"] = cfg.dump_zeros;
  const Thresholds& th = cfg.thresholds;
  j["thresholds"] = {
      {"radial_cdf_median", th.radial_cdf_median},
      {"potential_l1_median", th.potential_l1_median},
      {"inf_fraction_tolerance", th.inf_fraction_tolerance},
      {"universality_tolerance",
       th.universality_tolerance ? json(*th.universality_tolerance) : json(nullptr)},
      {"universality_spread_factor", th.universality_spread_factor},
      {"decay_min_rate", th.decay_min_rate},
      {"decay_rate_variation", th.decay_rate_variation},
      {"moment_sigma", th.moment_sigma},
      {"moment_exponent_tolerance", th.moment_exponent_tolerance},
      {"sphere_m_variation", th.sphere_m_variation},
      {"diagonal_fs_tolerance", th.diagonal_fs_tolerance}};
  j["moments"] = {{"nu", cfg.moments.nu},
                  {"k_grid", cfg.moments.k_grid},
                  {"trials", cfg.moments.trials},
                  {"tail_r_grid", cfg.moments.tail_r_grid}};
  j["decay"] = {{"base_points", cfg.decay.base_points},
                {"distances", cfg.decay.distances},
                {"headroom", cfg.decay.headroom}};
  j["diagonal"] = {{"radial_points", cfg.diagonal.radial_points},
                   {"angular_points", cfg.diagonal.angular_points}};
  return j;
}

}  // namespace randsec
