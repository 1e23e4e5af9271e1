#include <cmath>

#include "doctest.h"
#include "qftlab/info_flow.hpp"

using namespace qftlab;

namespace {

SweepSpec small_sweep(double m) {
  SweepSpec s;
  s.model = with_default_regulator({64, 1.0, m, {}});
  s.l = 17;
  s.r = 46;
  s.shrink = 1.0;
  s.wave = {0.0, 2.0, 0.0, 1.0, 1};
  s.steps = 6;
  s.dt = 1.0;
  return s;
}

}  // namespace

TEST_CASE("diamond regions") {
  CHECK(diamond_region(0, 10, 0.0, 1.0).sites == Region::interval(0, 10).sites);
  CHECK(diamond_region(0, 10, 3.0, 1.0).sites == Region::interval(3, 7).sites);
  CHECK(diamond_region(0, 10, 2.5, 1.0).sites == Region::interval(2, 8).sites);
  CHECK(diamond_region(0, 10, 1.0, 2.0).sites == Region::interval(2, 8).sites);
  CHECK_THROWS_AS(diamond_region(0, 4, 3.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(diamond_region(0, 4, -1.0, 1.0), std::invalid_argument);

  SweepSpec s = small_sweep(1.0);
  s.steps = 20;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // exhausted
  s = small_sweep(1.0);
  s.drift = 2;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // spacelike ray
  s.drift = 1;
  s.steps = 3;
  CHECK_NOTHROW(s.validate());
  CHECK(s.luminal());
  s.shrink = 0.5;
  CHECK_FALSE(s.luminal());
}

TEST_CASE("waves") {
  const LatticeModel model = build_model({64, 1.0, 1.0, {}});
  const CauchyData w = make_wave(model, {0.0, 2.0, 0.0, 1.5, 1});
  CHECK(w.phi(model.origin_site()) == doctest::Approx(1.5));
  CHECK(w.pi(model.origin_site()) == doctest::Approx(0.0));
  // right-mover: pi = -phi'
  CHECK(w.pi(model.origin_site() + 2) > 0);
  const CauchyData st = make_wave(model, {0.0, 2.0, 0.0, 1.0, 0});
  CHECK(st.pi.norm() == 0.0);
  CHECK_THROWS_AS(make_wave(model, {0.0, 0.0, 0.0, 1.0, 1}), std::invalid_argument);
}

TEST_CASE("vacuum sweep is zero") {
  SweepSpec s = small_sweep(1.0);
  s.wave.amplitude = 0.0;
  const SweepResult r = run_sweep(s);
  REQUIRE(r.series.size() == 6);
  for (const auto& p : r.series) CHECK(p.information == 0.0);
  CHECK(sweep_csv(r).rfind("t,region_l,region_r,information,cond_flag\n0,17,46,0,", 0) == 0);
}

TEST_CASE("massive sweep decreases and is deterministic") {
  const SweepSpec s = small_sweep(1.0);
  const SweepResult r = run_sweep(s);
  REQUIRE(r.all_finite());
  CHECK(r.series.front().information > 0);
  CHECK(r.monotone());
  CHECK(r.series[3].l == 20);
  CHECK(r.series[3].r == 43);
  CHECK(r.second_differences.size() == 4);
  const SweepResult again = run_sweep(s);
  CHECK(sweep_csv(again) == sweep_csv(r));
  CHECK(sweep_metadata(again).dump() == sweep_metadata(r).dump());
  CHECK(sweep_metadata(r)["conventions"].contains("embedding"));
}

TEST_CASE("wave leaving the region carries no information") {
  SweepSpec s = small_sweep(0.0);
  s.wave = {21.0, 1.0, 0.0, 1.0, 1};
  s.picture = Picture::transported;
  s.steps = 4;
  const SweepResult r = run_sweep(s);
  CHECK(exit_time(s) == 0.0);
  for (const auto& p : r.series) CHECK(std::abs(p.information) <= 1e-6 * r.wave_norm2);
}

TEST_CASE("huygens contrast") {
  SweepSpec s = small_sweep(0.0);
  s.wave.width = 2.5;
  s.steps = 15;
  const HuygensReport h = huygens_contrast(s, 1.0);
  CHECK(h.t_exit > 5);
  CHECK(h.t_exit < 14);
  CHECK(h.collapsed);
  CHECK(h.massive_ratio_after_exit > 100 * h.max_ratio_after_exit);
  SweepSpec bad = s;
  bad.model.m = 1.0;
  CHECK_THROWS_AS(huygens_contrast(bad, 1.0), std::invalid_argument);
  bad = s;
  bad.model.mu = 1e-2;
  CHECK_THROWS_AS(huygens_contrast(bad, 1.0), std::invalid_argument);
}
