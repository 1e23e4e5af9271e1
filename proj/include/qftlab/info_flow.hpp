#pragma once
// Information of a coherent wave along a shrinking causal diamond.
//
// Step i sits at t_i = i dt. The region is the initial interval moved by
// drift * i sites and shrunk by floor(shrink * t_i) sites at each end. In the
// fixed picture the wave stays put (the information of one state in a
// shrinking cone); in the transported picture it is classically evolved to
// t_i first.
//
// mpfr's default precision is process wide, so steps are evaluated in order.

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "qftlab/standard_subspace.hpp"

namespace qftlab {

struct WaveSpec {
  double center = 0.0;  // physical position
  double width = 1.0;
  double k0 = 0.0;      // kick: phi ~ exp(-(x-c)^2 / 2w^2) cos(k0 (x-c))
  double amplitude = 1.0;
  int mover = 1;        // +1 right, -1 left: pi = -mover d_x phi; 0: pi = 0
};

CauchyData make_wave(const LatticeModel& model, const WaveSpec& w);

enum class Picture { fixed, transported };

struct SweepSpec {
  LatticeSpec model;
  int l = 0, r = 0;     // initial interval, inclusive
  double shrink = 1.0;  // sites per unit time removed at each end; light speed is 1/a
  int drift = 0;        // sites per step
  WaveSpec wave;
  int steps = 1;
  double dt = 1.0;
  Picture picture = Picture::fixed;

  void validate() const;
  bool luminal() const { return shrink * model.a >= 1.0 - 1e-12; }
};

// interval shrunk by floor(shrink * t) at both ends; throws when exhausted
Region diamond_region(int l, int r, double t, double shrink);

struct SweepPoint {
  double t = 0.0;
  int l = 0, r = 0;
  double information = 0.0;  // NaN when the step failed
  ConditionReport condition;
  std::string flag;          // ok, extended, not-standard, not-a-factor, ill-conditioned
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> series;
  double wave_norm2 = 0.0;
  double max_increase = 0.0;           // max (I_{i+1} - I_i) over finite neighbours
  std::vector<double> second_differences;
  double min_second_difference = 0.0;  // relative to I_0 when I_0 > 0

  bool monotone(double slack = 1e-7) const { return max_increase <= slack; }
  bool all_finite() const;
};

SweepResult run_sweep(const SweepSpec& spec);

// header t,region_l,region_r,information,cond_flag
std::string sweep_csv(const SweepResult& r);
nlohmann::ordered_json sweep_metadata(const SweepResult& r);

// first sampled time at which the support [c - 4w, c + 4w] transported at
// speed mover leaves the region; infinity if it never does within the sweep
double exit_time(const SweepSpec& spec);

struct HuygensReport {
  SweepResult massless, massive;
  double t_exit = std::numeric_limits<double>::infinity();
  double max_ratio_after_exit = 0.0;  // massless I_t / I_0 for t > t_exit
  double massive_ratio_after_exit = 0.0;
  bool collapsed = false;             // max_ratio_after_exit < threshold

  static constexpr double threshold = 1e-4;
};

// Both sweeps transport the wave; the massive one differs only in m.
HuygensReport huygens_contrast(const SweepSpec& massless, double massive_m);
nlohmann::ordered_json huygens_metadata(const HuygensReport& h);

}  // namespace qftlab
