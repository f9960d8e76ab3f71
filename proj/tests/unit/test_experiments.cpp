#include <cmath>

#include "doctest.h"
#include "hfa/experiments.hpp"

using namespace hfa;

namespace {

OptimizerConfig quick_config() {
  OptimizerConfig c;
  c.total_steps = 60;
  c.coarse_to_fine = {true, 4, 8, 20};
  c.bcd = {true, 5, 10};
  c.annealing.enabled = false;
  return c;
}

}  // namespace

TEST_CASE("targets") {
  CHECK(make_target(TargetKind::black, 4) == Image(4, 4));
  CHECK(make_target(TargetKind::white, 4) == Image(4, 4, {1, 1, 1}));
  const Image s = make_target(TargetKind::stripes, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) CHECK(s.at(r, c).g == (c % 4 < 2 ? 0.0 : 1.0));
  }
  const Image a = make_target(TargetKind::random, 8, 3);
  CHECK(a == make_target(TargetKind::random, 8, 3));
  CHECK_FALSE(a == make_target(TargetKind::random, 8, 4));
  double mean = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) mean += (a[p].r + a[p].g + a[p].b) / 3.0;
  CHECK(mean / a.size() == doctest::Approx(0.5).epsilon(0.2));
  CHECK_THROWS_AS(make_target(TargetKind::white, 0), InvalidArgument);
}

TEST_CASE("target pairs") {
  const std::vector<TargetPair> pairs = ablation_pairs();
  CHECK(pairs.size() == 5);
  for (const TargetPair& p : pairs) CHECK(parse_target_pair(p.name()) == p);
  CHECK(parse_target_pair("random/stripes") == TargetPair{TargetKind::random, TargetKind::stripes});
  CHECK_THROWS_AS(parse_target_pair("black"), InvalidArgument);
  CHECK_THROWS_AS(parse_target_pair("black/grey"), InvalidArgument);
  const std::vector<ViewSpec> v = opposite_views(pairs[0], 8, 1, 30.0);
  CHECK(v[0].azimuth_deg == 0.0);
  CHECK(v[1].azimuth_deg == 180.0);
  CHECK(v[0].elevation_deg == 30.0);
  CHECK(v[0].desired.width() == 8);
}

TEST_CASE("angle ranges") {
  CHECK(parse_angle_range("0:180:20").values().size() == 10);
  CHECK(parse_angle_range("0:60:10").values().back() == 60.0);
  CHECK(parse_angle_range("5:5:1").values() == std::vector<double>{5.0});
  CHECK(parse_angle_range("0:1:0.3").values().size() == 4);
  CHECK_THROWS_AS(parse_angle_range("10:0:5"), InvalidArgument);
  CHECK_THROWS_AS(parse_angle_range("0:10:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_angle_range("0:10"), InvalidArgument);
  CHECK_THROWS_AS(parse_angle_range("a:b:c"), InvalidArgument);
  CHECK(parse_sweep_axis("elevation") == SweepAxis::elevation);
  CHECK_THROWS_AS(parse_sweep_axis("roll"), InvalidArgument);
}

TEST_CASE("sweep views") {
  SweepPlan p;
  p.image_size = 4;
  std::vector<ViewSpec> v = sweep_views(p, 100.0);
  CHECK(v[0].elevation_deg == 60.0);
  CHECK(v[1].azimuth_deg == 100.0);
  CHECK(v[1].desired == Image(4, 4, {1, 1, 1}));
  CHECK(sweep_views(p, 360.0)[1].azimuth_deg == 0.0);
  p.axis = SweepAxis::elevation;
  v = sweep_views(p, 30.0);
  CHECK(v[0].elevation_deg == 20.0);
  CHECK(v[1].elevation_deg == 50.0);
  CHECK(v[1].azimuth_deg == 0.0);
  CHECK_THROWS_AS(sweep_views(p, 80.0), InvalidArgument);
}

TEST_CASE("coincident views cannot beat mid grey") {
  SweepPlan p;
  p.image_size = 8;
  p.range = parse_angle_range("0:0:1");
  p.include_plain = false;
  const std::vector<SweepRow> rows = run_sweep(p, quick_config());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mse_plain < 0.0);
  CHECK(rows[0].mse_full >= 0.25 - 1e-12);
  CHECK(rows[0].mse_full <= 0.27);
}

TEST_CASE("ablation variants") {
  const OptimizerConfig base = quick_config();
  const auto opt = ablation_variants(AblationSuite::optimization, base);
  REQUIRE(opt.size() == 4);
  CHECK(opt[0].column == "none");
  CHECK_FALSE(opt[0].config.coarse_to_fine.enabled);
  CHECK_FALSE(opt[0].config.bcd.enabled);
  CHECK_FALSE(opt[0].config.annealing.enabled);
  CHECK(opt[3].config.annealing.enabled);
  const auto reg = ablation_variants(AblationSuite::regularization, base);
  REQUIRE(reg.size() == 4);
  CHECK(reg[0].config.loss == LossConfig::none());
  CHECK(reg[3].config.loss == LossConfig::both());
  const auto hv = ablation_variants(AblationSuite::heaviside, base);
  CHECK(hv.size() == 5);
  for (const auto& v : hv) CHECK(v.config.k_start == 0.1);
  CHECK(parse_ablation_suite(to_string(AblationSuite::heaviside)) == AblationSuite::heaviside);
}

TEST_CASE("ablation cells are deterministic") {
  AblationPlan plan;
  plan.suite = AblationSuite::optimization;
  plan.pairs = {TargetPair{TargetKind::black, TargetKind::white}};
  plan.seeds = {0, 1};
  plan.image_size = 8;
  OptimizerConfig base = quick_config();
  base.total_steps = 20;
  std::vector<std::string> log;
  const auto a = run_ablation(plan, base, [&](const std::string& s) { log.push_back(s); });
  const auto b = run_ablation(plan, base);
  REQUIRE(a.size() == 8);
  CHECK(log.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].final_mse == b[i].final_mse);
    CHECK(a[i].curve == b[i].curve);
    CHECK(a[i].curve.size() == 20);
    CHECK(a[i].row == "black/white");
  }
}
