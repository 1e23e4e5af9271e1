#include "qftlab/info_flow.hpp"

#include <cmath>
#include <cstdio>

#include "qftlab/conventions.hpp"

namespace qftlab {

CauchyData make_wave(const LatticeModel& model, const WaveSpec& w) {
  if (!(w.width > 0)) throw std::invalid_argument("wave: width must be positive");
  if (w.mover < -1 || w.mover > 1) throw std::invalid_argument("wave: mover must be -1, 0 or 1");
  const int N = model.N();
  const double L = N * model.a();
  CauchyData d = CauchyData::zeros(N);
  for (int n = 0; n < N; ++n) {
    // nearest periodic image of the center
    const double u = std::remainder(model.position(n) - w.center, L);
    const double g = w.amplitude * std::exp(-u * u / (2 * w.width * w.width));
    const double c = std::cos(w.k0 * u), s = std::sin(w.k0 * u);
    d.phi(n) = g * c;
    const double dphi = g * (-u / (w.width * w.width) * c - w.k0 * s);
    d.pi(n) = -w.mover * dphi;
  }
  return d;
}

Region diamond_region(int l, int r, double t, double shrink) {
  if (!(t >= 0)) throw std::invalid_argument("diamond_region: t must be non-negative");
  if (!(shrink >= 0)) throw std::invalid_argument("diamond_region: shrink rate must be non-negative");
  if (l > r) throw std::invalid_argument("diamond_region: empty initial interval");
  const int cut = static_cast<int>(std::floor(shrink * t + 1e-9));
  if (l + cut > r - cut) throw std::invalid_argument("diamond_region: region exhausted");
  return Region::interval(l + cut, r - cut);
}

void SweepSpec::validate() const {
  if (steps < 1) throw std::invalid_argument("sweep: steps must be positive");
  if (!(dt > 0)) throw std::invalid_argument("sweep: dt must be positive");
  if (!Translation{dt, drift}.in_future_cone(model.a))
    throw std::invalid_argument("sweep: the ray (dt, drift) is not timelike or lightlike");
  build_model(model);
  for (int i = 0; i < steps; ++i) {
    const Region R = diamond_region(l + drift * i, r + drift * i, i * dt, shrink);
    if (R.sites.front() < 0 || R.sites.back() >= model.N)
      throw std::invalid_argument("sweep: region leaves the lattice at step " + std::to_string(i));
  }
}

bool SweepResult::all_finite() const {
  for (const auto& p : series)
    if (!std::isfinite(p.information)) return false;
  return true;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const LatticeModel model = build_model(spec.model);
  const CauchyData w0 = make_wave(model, spec.wave);
  SweepResult res;
  res.spec = spec;
  res.wave_norm2 = w0.phi.squaredNorm() + w0.pi.squaredNorm();
  int hint = 0;
  for (int i = 0; i < spec.steps; ++i) {
    SweepPoint p;
    p.t = i * spec.dt;
    const Region R = diamond_region(spec.l + spec.drift * i, spec.r + spec.drift * i, p.t, spec.shrink);
    p.l = R.sites.front();
    p.r = R.sites.back();
    const CauchyData w = spec.picture == Picture::fixed ? w0 : evolve_classical(model, w0, p.t);
    try {
      const ModularAnalysis an = analyze(make_subspace(model, R), hint);
      p.condition = an.report.condition;
      if (!an.data) {
        p.information = std::nan("");
        p.flag = "not-standard";
      } else {
        hint = p.condition.digits;
        p.information = information(*an.data, to_ambient(w));
        p.flag = p.condition.flag();
      }
    } catch (const NotAFactor&) {
      p.information = std::nan("");
      p.flag = "not-a-factor";
    } catch (const IllConditioned&) {
      p.information = std::nan("");
      p.flag = "ill-conditioned";
    }
    res.series.push_back(p);
  }

  const auto& s = res.series;
  const double I0 = s.front().information;
  const double scale = std::isfinite(I0) && I0 > 0 ? I0 : 1.0;
  res.min_second_difference = 0.0;
  for (size_t i = 0; i + 1 < s.size(); ++i)
    if (std::isfinite(s[i].information) && std::isfinite(s[i + 1].information))
      res.max_increase = std::max(res.max_increase, s[i + 1].information - s[i].information);
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    const double d2 = s[i + 1].information - 2 * s[i].information + s[i - 1].information;
    res.second_differences.push_back(d2);
    if (std::isfinite(d2)) res.min_second_difference = std::min(res.min_second_difference, d2 / scale);
  }
  return res;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "t,region_l,region_r,information,cond_flag\n";
  char buf[160];
  for (const auto& p : r.series) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%s\n", p.t, p.l, p.r, p.information, p.flag.c_str());
    out += buf;
  }
  return out;
}

namespace {

nlohmann::ordered_json spec_json(const SweepSpec& s) {
  nlohmann::ordered_json j;
  j["model"] = {{"N", s.model.N}, {"a", s.model.a}, {"m", s.model.m}};
  if (s.model.mu) j["model"]["mu"] = *s.model.mu;
  j["region"] = {{"l", s.l}, {"r", s.r}, {"shrink", s.shrink}, {"drift", s.drift}};
  j["wave"] = {{"center", s.wave.center}, {"width", s.wave.width}, {"k0", s.wave.k0},
               {"amplitude", s.wave.amplitude}, {"mover", s.wave.mover}};
  j["sweep"] = {{"steps", s.steps}, {"dt", s.dt},
                {"picture", s.picture == Picture::fixed ? "fixed" : "transported"}};
  return j;
}

nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json sweep_metadata(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["columns"] = {"t", "region_l", "region_r", "information", "cond_flag"};
  j["spec"] = spec_json(r.spec);
  j["conventions"] = conventions();
  j["luminal_shrink"] = r.spec.luminal();
  j["wave_norm2"] = r.wave_norm2;
  j["max_increase"] = r.max_increase;
  j["monotone"] = r.monotone();
  j["min_second_difference_rel"] = r.min_second_difference;
  auto& d = j["second_differences"] = nlohmann::ordered_json::array();
  for (double v : r.second_differences) d.push_back(finite_or_null(v));
  auto& c = j["condition"] = nlohmann::ordered_json::array();
  for (const auto& p : r.series)
    c.push_back({{"digits", p.condition.digits}, {"log10_cond", p.condition.log10_cond}});
  return j;
}

double exit_time(const SweepSpec& spec) {
  const LatticeModel model = build_model(spec.model);
  const double a = model.a();
  const double v = spec.picture == Picture::transported ? spec.wave.mover : 0.0;
  const double T = (spec.steps - 1) * spec.dt;
  const int n = 2000 * std::max(1, spec.steps - 1);
  for (int i = 0; i <= n; ++i) {
    const double t = T * i / n;
    const int cut = static_cast<int>(std::floor(spec.shrink * t + 1e-9));
    const double shift = spec.drift * t / spec.dt;
    const double lo = model.position(spec.l + cut) + shift * a - a / 2;
    const double hi = model.position(spec.r - cut) + shift * a + a / 2;
    const double c = spec.wave.center + v * t, h = 4 * spec.wave.width;
    if (spec.l + cut > spec.r - cut || c - h > hi || c + h < lo) return t;
  }
  return std::numeric_limits<double>::infinity();
}

HuygensReport huygens_contrast(const SweepSpec& massless, double massive_m) {
  if (massless.model.m != 0.0) throw std::invalid_argument("huygens: the first sweep must be massless");
  SweepSpec s0 = massless;
  s0.model = with_default_regulator(s0.model);
  if (*s0.model.mu > 1e-3 / s0.model.a * (1 + 1e-12))
    throw std::invalid_argument("huygens: regulator above 1e-3/a");
  if (!(massive_m > 0)) throw std::invalid_argument("huygens: the comparison mass must be positive");
  s0.picture = Picture::transported;
  SweepSpec s1 = s0;
  s1.model.m = massive_m;
  s1.model.mu.reset();

  HuygensReport h;
  h.massless = run_sweep(s0);
  h.massive = run_sweep(s1);
  h.t_exit = exit_time(s0);
  const double I0 = h.massless.series.front().information, J0 = h.massive.series.front().information;
  bool ok = true;
  for (size_t i = 0; i < h.massless.series.size(); ++i) {
    const auto& p = h.massless.series[i];
    if (!(p.t > h.t_exit)) continue;
    const double ratio = I0 > 0 ? p.information / I0 : std::abs(p.information);
    if (!std::isfinite(ratio)) ok = false;
    else h.max_ratio_after_exit = std::max(h.max_ratio_after_exit, ratio);
    const double q = h.massive.series[i].information;
    if (std::isfinite(q)) h.massive_ratio_after_exit = std::max(h.massive_ratio_after_exit, J0 > 0 ? q / J0 : q);
  }
  h.collapsed = ok && h.max_ratio_after_exit < HuygensReport::threshold;
  return h;
}

nlohmann::ordered_json huygens_metadata(const HuygensReport& h) {
  nlohmann::ordered_json j;
  j["massless"] = sweep_metadata(h.massless);
  j["massive"] = sweep_metadata(h.massive);
  j["t_exit"] = finite_or_null(h.t_exit);
  j["max_ratio_after_exit"] = h.max_ratio_after_exit;
  j["massive_ratio_after_exit"] = h.massive_ratio_after_exit;
  j["threshold"] = HuygensReport::threshold;
  j["collapsed"] = h.collapsed;
  return j;
}

}  // namespace qftlab
