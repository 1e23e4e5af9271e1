#include "qftlab/causal_ops.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace qftlab {

Functional Functional::operator+(const Functional& o) const {
  if (is_constant()) return {constant + o.constant, o.density};
  if (o.is_constant()) return {constant + o.constant, density};
  return {constant + o.constant, density + o.density};
}

Functional constant_functional(double c, const Grid& g) { return {c, TestFunction::zeros(g)}; }

Functional linear_functional(const TestFunction& f, double c) { return {c, f}; }

Functional delta_L(const TestFunction& phi0, double m) {
  Functional F;
  F.density = -kg_apply(phi0, m);
  const Grid& g = phi0.grid;
  const Eigen::MatrixXd& v = phi0.values;
  const int jmax = g.periodic_x ? g.nx : g.nx - 1;
  double acc = 0;
  for (int i = 0; i + 1 < g.nt; ++i)
    for (int j = 0; j < jmax; ++j) {
      const double dtp = (v(i + 1, j) - v(i, j)) / g.dt;
      const double dxp = (v(i, (j + 1) % g.nx) - v(i, j)) / g.dx;
      acc += dtp * dtp - dxp * dxp - m * m * v(i, j) * v(i, j);
    }
  F.constant = 0.5 * acc * g.dt * g.dx;
  return F;
}

Functional shift_functional(const Functional& F, const TestFunction& phi0) {
  if (!grids_compatible(F.density.grid, phi0.grid))
    throw std::invalid_argument("shift_functional: incompatible grids");
  return {F.constant + quadrature(F.density, phi0), F.density};
}

std::string to_string(CausalOrder c) {
  switch (c) {
    case CausalOrder::later: return "later";
    case CausalOrder::earlier: return "earlier";
    case CausalOrder::spacelike: return "spacelike";
    case CausalOrder::overlapping: return "overlapping";
  }
  return "?";
}

namespace {

struct Rect {
  double t0, t1, x0, x1;
};

Rect rect_of(const TestFunction& f) {
  const Box& b = f.support;
  return {f.grid.t(b.it0), f.grid.t(b.it1), f.grid.x(b.ix0), f.grid.x(b.ix1)};
}

// Is there v in (-1, 1), t0 with upper strictly above t = t0 + v x and lower strictly below?
// min(t - v x) over upper minus max(t - v x) over lower is concave in v with its
// only kink at v = 0, so v in {-1, 0, 1} suffices (the open ends by continuity).
bool separated_above(const Rect& upper, const Rect& lower) {
  for (double v : {-1.0, 0.0, 1.0}) {
    const double lo_up = upper.t0 - std::max(v * upper.x0, v * upper.x1);
    const double hi_low = lower.t1 - std::min(v * lower.x0, v * lower.x1);
    if (lo_up - hi_low > 1e-12) return true;
  }
  return false;
}

}  // namespace

CausalOrder causal_order(const Functional& F, const Functional& G) {
  // constants can be placed anywhere
  if (F.is_constant() || G.is_constant()) return CausalOrder::spacelike;
  const Rect f = rect_of(F.density), g = rect_of(G.density);
  const double min_dx = std::max({0.0, g.x0 - f.x1, f.x0 - g.x1});
  const double max_dt = std::max(std::abs(g.t1 - f.t0), std::abs(f.t1 - g.t0));
  if (min_dx > max_dt) return CausalOrder::spacelike;
  if (separated_above(g, f)) return CausalOrder::later;
  if (separated_above(f, g)) return CausalOrder::earlier;
  return CausalOrder::overlapping;
}

// ---- Weyl elements ----

WeylElement WeylElement::identity(const LatticeModel& model) {
  return {0.0, CauchyData::zeros(model.N()), model.spec()};
}

bool WeylElement::same_model(const WeylElement& o) const {
  return model.N == o.model.N && model.a == o.model.a && model.m == o.model.m && model.mu == o.model.mu;
}

WeylElement weyl_product(const WeylElement& w1, const WeylElement& w2) {
  if (!w1.same_model(w2)) throw std::invalid_argument("weyl_product: elements of different lattice models");
  return {w1.phase + w2.phase - 0.5 * symplectic_form(w1.wave, w2.wave, w1.model.a), w1.wave + w2.wave,
          w1.model};
}

WeylElement weyl_inverse(const WeylElement& w) { return {-w.phase, -w.wave, w.model}; }

double phase_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * M_PI)); }

double weyl_distance(const WeylElement& w1, const WeylElement& w2) {
  if (!w1.same_model(w2)) throw std::invalid_argument("weyl_distance: elements of different lattice models");
  const double dw = std::max((w1.wave.phi - w2.wave.phi).cwiseAbs().maxCoeff(),
                             (w1.wave.pi - w2.wave.pi).cwiseAbs().maxCoeff());
  return std::max(phase_distance(w1.phase, w2.phase), dw);
}

std::string to_json(const WeylElement& w) {
  nlohmann::ordered_json j;
  j["phase"] = w.phase;
  j["phi"] = std::vector<double>(w.wave.phi.data(), w.wave.phi.data() + w.wave.phi.size());
  j["pi"] = std::vector<double>(w.wave.pi.data(), w.wave.pi.data() + w.wave.pi.size());
  j["model"] = {{"N", w.model.N}, {"a", w.model.a}, {"m", w.model.m}};
  if (w.model.mu) j["model"]["mu"] = *w.model.mu;
  return j.dump();
}

WeylElement weyl_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  WeylElement w;
  w.phase = j.at("phase");
  const auto phi = j.at("phi").get<std::vector<double>>();
  const auto pi = j.at("pi").get<std::vector<double>>();
  if (phi.size() != pi.size()) throw std::invalid_argument("weyl json: phi and pi differ in length");
  w.wave.phi = Eigen::Map<const rvec>(phi.data(), static_cast<Eigen::Index>(phi.size()));
  w.wave.pi = Eigen::Map<const rvec>(pi.data(), static_cast<Eigen::Index>(pi.size()));
  const auto& m = j.at("model");
  w.model.N = m.at("N");
  w.model.a = m.at("a");
  w.model.m = m.at("m");
  if (m.contains("mu")) w.model.mu = m.at("mu").get<double>();
  if (w.model.N != static_cast<int>(phi.size())) throw std::invalid_argument("weyl json: wave size != N");
  return w;
}

WeylElement normal_form(const Functional& F, const LatticeModel& model) {
  WeylElement w = WeylElement::identity(model);
  w.phase = F.constant;
  if (F.is_constant()) return w;
  if (!on_lattice_grid(F.density, model)) throw std::invalid_argument("normal_form: density is not on a lattice grid");
  w.phase -= 0.5 * lattice_pairing(F.density, F.density, KernelType::dyson_mean, model);
  w.wave = lattice_wave(F.density, model);
  return w;
}

// ---- derivation from the relations ----

RelationTrace product_via_relations_traced(const Functional& F1, const Functional& F2, const LatticeModel& model) {
  const CausalOrder order = causal_order(F2, F1);
  if (order != CausalOrder::later && order != CausalOrder::spacelike)
    throw std::invalid_argument("product_via_relations: F1 is not later than F2 (order: " + to_string(order) + ")");
  RelationTrace tr;
  // (i) causal factorization: S(F1) S(F2) = S(F1 + F2)
  tr.combined = F1 + F2;
  if (tr.combined.is_constant()) {
    tr.result = WeylElement::identity(model);
    tr.result.phase = tr.combined.constant;
    tr.reduced = tr.combined;
    return tr;
  }
  const TestFunction& f = tr.combined.density;
  if (!on_lattice_grid(f, model)) throw std::invalid_argument("product_via_relations: density is not on a lattice grid");

  // (ii) field-equation shift S(F) = S(F^{phi0} + delta L(phi0)) with
  // phi0 = -Delta_A f - (1 - chi) Delta f, chi = theta(t >= 0). It leaves the
  // density -P(chi Delta f), which lives on the two slices t = -dt, 0.
  const int base = time_index(f.grid, 0);
  const int n_lo = std::min(base + f.support.it0, -1) - 6;
  const int n_hi = std::max(base + f.support.it1, 0) + 6;
  const TestFunction fw = to_lattice_window(f, model, n_lo, n_hi);
  const TestFunction ur = lattice_green_apply(fw, KernelType::retarded, model, n_lo, n_hi);
  const TestFunction ua = lattice_green_apply(fw, KernelType::advanced, model, n_lo, n_hi);
  TestFunction adv = TestFunction::zeros(fw.grid), ret = TestFunction::zeros(fw.grid);
  for (int i = 0; i < fw.grid.nt; ++i) {
    const double chi = n_lo + i >= 0 ? 1.0 : 0.0;
    const auto d = ur.values.row(i) - ua.values.row(i);
    adv.values.row(i) = -ua.values.row(i) - (1 - chi) * d;
    ret.values.row(i) = -ur.values.row(i) + chi * d;
  }
  adv.shrink_support();
  tr.crosscheck = (adv.values - ret.values).cwiseAbs().maxCoeff();
  tr.shift = adv;

  const Functional Fw{tr.combined.constant, fw};
  tr.reduced = shift_functional(Fw, tr.shift) + delta_L(tr.shift, std::sqrt(model.mass2()));

  // (iii) central phase of the reduced functional
  tr.result = normal_form(tr.reduced, model);
  return tr;
}

WeylElement product_via_relations(const Functional& F1, const Functional& F2, const LatticeModel& model) {
  return product_via_relations_traced(F1, F2, model).result;
}

WeylElement bogoliubov(const Functional& G, const Functional& F, const LatticeModel& model) {
  return weyl_product(weyl_inverse(normal_form(G, model)), normal_form(F + G, model));
}

// ---- random relation suite ----

RelationSuiteReport relation_suite(const RelationSuiteSpec& spec, std::uint64_t seed) {
  if (spec.pairs < 1) throw std::invalid_argument("relation_suite: pairs must be positive");
  const LatticeModel model = build_model(spec.model);
  const Grid g = lattice_grid(model, spec.dt, spec.n_begin, spec.nt);
  const double tmid = g.t(0) + 0.5 * (g.nt - 1) * g.dt, ht = 0.5 * (g.nt - 1) * g.dt;
  const double hx = 0.5 * model.N() * model.a();
  std::mt19937_64 rng(seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto bump = [&](double tc, double xc, double rt, double rx) {
    return Functional{U(-1, 1), make_bump(g, tc, xc, rt, rx, U(-1.5, 1.5))};
  };

  RelationSuiteReport rep;
  while (rep.pairs < spec.pairs) {
    const bool ordered = rep.pairs % 2 == 0;
    Functional early, late;
    if (ordered) {
      early = bump(tmid + ht * U(-0.6, -0.2), hx * U(-0.3, 0.3), ht * U(0.1, 0.2), hx * U(0.05, 0.2));
      late = bump(tmid + ht * U(0.2, 0.6), hx * U(-0.3, 0.3), ht * U(0.1, 0.2), hx * U(0.05, 0.2));
      if (causal_order(early, late) != CausalOrder::later) continue;
    } else {
      early = bump(tmid + ht * U(-0.2, 0.2), hx * U(-0.6, -0.35), ht * U(0.05, 0.12), hx * U(0.05, 0.15));
      late = bump(tmid + ht * U(-0.2, 0.2), hx * U(0.35, 0.6), ht * U(0.05, 0.12), hx * U(0.05, 0.15));
      if (causal_order(early, late) != CausalOrder::spacelike) continue;
    }
    const WeylElement got = product_via_relations(late, early, model);
    const WeylElement ref = weyl_product(normal_form(late, model), normal_form(early, model));
    rep.max_phase_error = std::max(rep.max_phase_error, phase_distance(got.phase, ref.phase));
    rep.max_wave_error = std::max({rep.max_wave_error, (got.wave.phi - ref.wave.phi).cwiseAbs().maxCoeff(),
                                   (got.wave.pi - ref.wave.pi).cwiseAbs().maxCoeff()});
    ++rep.pairs;
    ++(ordered ? rep.ordered : rep.spacelike);
  }
  rep.pass = rep.max_phase_error < RelationSuiteReport::phase_tol && rep.max_wave_error < RelationSuiteReport::wave_tol;
  return rep;
}

// ---- I/O ----

void write_functional(const Functional& F, const std::string& path) {
  write_csv(F.density, path);
  nlohmann::ordered_json side;
  {
    std::ifstream is(path + ".json");
    side = nlohmann::ordered_json::parse(is);
  }
  side["constant"] = F.constant;
  std::ofstream os(path + ".json");
  if (!os) throw std::runtime_error("cannot write " + path + ".json");
  os << side.dump(2) << "\n";
}

Functional read_functional(const std::string& path) {
  Functional F;
  F.density = read_csv(path);
  std::ifstream is(path + ".json");
  F.constant = nlohmann::json::parse(is).value("constant", 0.0);
  return F;
}

}  // namespace qftlab
