#include <filesystem>

#include <gtest/gtest.h>

#include "randsec/config.hpp"
#include "randsec/error.hpp"

using namespace randsec;
using nlohmann::json;

namespace {

json minimal() {
  return {{"experiment", "equidistribution"},
          {"weight", {{"kind", "scaled_fs"}, {"alpha", 0.5}}},
          {"p_grid", {10, 20}},
          {"ensembles", {"gaussian", {{"kind", "heavy_tail"}, {"rho", 4}}}},
          {"trials", 12},
          {"master_seed", "18446744073709551615"}};
}

}  // namespace

TEST(Config, ParsesAndFillsDefaults) {
  const ExperimentConfig cfg = parse_config(minimal());
  EXPECT_EQ(cfg.kind, ExperimentKind::Equidistribution);
  EXPECT_EQ(cfg.weight.kind(), WeightKind::ScaledFS);
  EXPECT_EQ(cfg.p_grid, (std::vector<int>{10, 20}));
  ASSERT_EQ(cfg.ensembles.size(), 2u);
  EXPECT_EQ(cfg.ensembles[1], Ensemble::heavy_tail(4.0));
  EXPECT_EQ(cfg.master_seed, 18446744073709551615ULL);
  EXPECT_EQ(cfg.ensemble_index("heavy_tail(rho=4)"), 1);
  EXPECT_EQ(cfg.ensemble_index("gauss"), 0);
  EXPECT_THROW(cfg.ensemble_index("sphere"), InvalidConfiguration);
  EXPECT_DOUBLE_EQ(cfg.thresholds.radial_cdf_median, 0.05);
  const QuadratureSpec spec = cfg.basis_quadrature(20);
  EXPECT_EQ(spec.radial_nodes, 20 + cfg.quadrature.radial_extra);
  EXPECT_EQ(spec.angular_nodes, 40 + cfg.quadrature.angular_extra);
}

TEST(Config, RoundTripIsCanonical) {
  ExperimentConfig cfg = parse_config(minimal());
  const json canon = to_json(cfg);
  const ExperimentConfig again = parse_config(canon);
  EXPECT_EQ(to_json(again), canon);
  cfg.workers = 8;
  cfg.output_dir = "/tmp/elsewhere";
  EXPECT_EQ(to_json(cfg), canon);
}

TEST(Config, Rejections) {
  json j = minimal();
  j["tirals"] = 3;
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
  j = minimal();
  j["p_grid"] = {20, 10};
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
  j = minimal();
  j["ensembles"] = {"gaussian", "gaussian"};
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
  j["experiment"] = "universality";
  EXPECT_NO_THROW(parse_config(j));
  j = minimal();
  j["weight"] = {{"kind", "scaled_fs"}};
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
  j = minimal();
  j["regularizer"] = {{"rule", "table"}, {"table", {{"10", 2}}}};
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
  j = minimal();
  j.erase("experiment");
  EXPECT_THROW(parse_config(j), InvalidConfiguration);
}

TEST(Config, ExperimentNames) {
  EXPECT_EQ(experiment_kind_from_string("equidist"), ExperimentKind::Equidistribution);
  EXPECT_EQ(experiment_kind_from_string("bergman-decay"), ExperimentKind::BergmanDecay);
  EXPECT_EQ(experiment_kind_from_string("moments"), ExperimentKind::MomentCertify);
  EXPECT_EQ(to_string(ExperimentKind::BergmanDiagonal), "bergman_diagonal");
  EXPECT_THROW(experiment_kind_from_string("nope"), InvalidConfiguration);
}

TEST(Config, ShippedConfigsParse) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(RANDSEC_TEST_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 5);
}
