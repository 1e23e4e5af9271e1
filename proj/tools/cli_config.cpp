#include "cli_config.hpp"

#include <cmath>
#include <set>

namespace qftlab::cli {

namespace {

using json = nlohmann::ordered_json;

// A view of one JSON object with its dotted path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) fail(key(k), "is not a known field");
  }

  static void fail(const std::string& where, const std::string& what) {
    throw SchemaError("config: " + where + " " + what);
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json& at(const std::string& k) const {
    if (!has(k)) fail(key(k), "is required");
    return j_.at(k);
  }
  Node child(const std::string& k, std::set<std::string> allowed) const { return {at(k), key(k), std::move(allowed)}; }

  double num(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number()) fail(key(k), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key(k), "must be finite");
    return d;
  }
  double num(const std::string& k, double dflt) const { return has(k) ? num(k) : dflt; }
  double positive(const std::string& k) const {
    const double d = num(k);
    if (!(d > 0)) fail(key(k), "must be positive");
    return d;
  }
  double nonnegative(const std::string& k, double dflt) const {
    const double d = num(k, dflt);
    if (!(d >= 0)) fail(key(k), "must be non-negative");
    return d;
  }
  int integer(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number_integer()) fail(key(k), "must be an integer");
    const auto i = v.get<long long>();
    if (i < -1000000000LL || i > 1000000000LL) fail(key(k), "is out of range");
    return static_cast<int>(i);
  }
  int integer(const std::string& k, int dflt, int min) const {
    const int i = has(k) ? integer(k) : dflt;
    if (i < min) fail(key(k), "must be at least " + std::to_string(min));
    return i;
  }
  std::string choice(const std::string& k, const std::string& dflt, const std::set<std::string>& options) const {
    if (!has(k)) return dflt;
    const json& v = at(k);
    if (!v.is_string() || !options.count(v.get<std::string>())) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      fail(key(k), "must be one of " + list);
    }
    return v.get<std::string>();
  }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

// library preconditions become schema errors
template <class F>
void semantic(const std::string& where, F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    Node::fail(where, std::string("is inconsistent: ") + e.what());
  }
}

LatticeSpec parse_model(const Node& n) {
  LatticeSpec s;
  if (!n.has("N")) Node::fail(n.key("N"), "is required");
  s.N = n.integer("N", 0, 2);
  if (s.N > 65536) Node::fail(n.key("N"), "must be at most 65536");
  s.a = n.positive("a");
  s.m = n.nonnegative("m", 0.0);
  if (n.has("mu")) s.mu = n.positive("mu");
  s = with_default_regulator(s);
  semantic(n.path(), [&] { build_model(s); });
  return s;
}

Axis parse_axis(const Node& n) {
  Axis ax;
  ax.n = n.integer("n", 1, 1);
  ax.min = n.num("min");
  ax.max = ax.n == 1 ? n.num("max", ax.min) : n.num("max");
  if (ax.n > 1 && !(ax.max > ax.min)) Node::fail(n.key("max"), "must exceed min");
  if (ax.n > 100000) Node::fail(n.key("n"), "must be at most 100000");
  return ax;
}

BumpSpec parse_bump(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 5) Node::fail(where, "must be [tc, xc, rt, rx, amplitude]");
  double d[5];
  for (int i = 0; i < 5; ++i) {
    if (!v[i].is_number()) Node::fail(where, "must hold numbers");
    d[i] = v[i].get<double>();
  }
  if (!(d[2] > 0) || !(d[3] > 0)) Node::fail(where, "needs positive radii");
  return {d[0], d[1], d[2], d[3], d[4]};
}

PropagatorConfig parse_propagator(const Node& n) {
  PropagatorConfig p;
  const std::string k = n.choice("kernel", "pauli_jordan", {"retarded", "advanced", "pauli_jordan", "dyson_mean"});
  p.kind = {kernel_type_from_string(k), n.nonnegative("m", 0.0), Dimension::d1p1};
  p.t = parse_axis(n.child("t", {"min", "max", "n"}));
  p.x = parse_axis(n.child("x", {"min", "max", "n"}));
  if (p.t.n * static_cast<long long>(p.x.n) > 1000000) Node::fail(n.path(), "asks for more than 1e6 points");
  if (n.has("pairings")) {
    const Node g = n.child("grid", {"t0", "x0", "dt", "dx", "nt", "nx"});
    Grid grid;
    grid.t0 = g.num("t0");
    grid.x0 = g.num("x0");
    grid.dt = g.positive("dt");
    grid.dx = g.positive("dx");
    grid.nt = g.integer("nt", 0, 1);
    grid.nx = g.integer("nx", 0, 1);
    if (grid.nt > 256 || grid.nx > 256) Node::fail(g.path(), "is limited to 256 x 256");
    p.grid = grid;
    const json& list = n.at("pairings");
    if (!list.is_array()) Node::fail(n.key("pairings"), "must be an array");
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string where = n.key("pairings") + "[" + std::to_string(i) + "]";
      const Node e(list[i], where, {"f", "g"});
      p.pairings.emplace_back(parse_bump(e.at("f"), e.key("f")), parse_bump(e.at("g"), e.key("g")));
    }
  } else if (n.has("grid")) {
    Node::fail(n.key("grid"), "is only used with pairings");
  }
  return p;
}

RelationSuiteSpec parse_weyl(const Node& n, const std::optional<LatticeSpec>& model) {
  RelationSuiteSpec s;
  if (n.has("model"))
    s.model = parse_model(n.child("model", {"N", "a", "m", "mu"}));
  else if (model)
    s.model = *model;
  s.dt = n.has("dt") ? n.positive("dt") : s.dt;
  s.n_begin = n.has("n_begin") ? n.integer("n_begin") : s.n_begin;
  s.nt = n.integer("nt", s.nt, 16);
  s.pairs = n.integer("pairs", s.pairs, 1);
  if (s.nt > 256 || s.model.N > 256) Node::fail(n.path(), "grid is limited to 256 x 256");
  semantic(n.path(), [&] { lattice_grid(build_model(s.model), s.dt, s.n_begin, s.nt); });
  return s;
}

ModularConfig parse_modular(const Node& n, const LatticeSpec& model) {
  ModularConfig m;
  const json& regions = n.at("regions");
  if (!regions.is_array() || regions.empty()) Node::fail(n.key("regions"), "must be a non-empty array");
  for (const auto& r : regions) {
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
      Node::fail(n.key("regions"), "entries must be [l, r] integer pairs");
    const int l = r[0].get<int>(), rr = r[1].get<int>();
    if (l < 0 || rr >= model.N || l > rr) Node::fail(n.key("regions"), "entries must satisfy 0 <= l <= r < N");
    m.regions.emplace_back(l, rr);
  }
  if (n.has("ts")) {
    const json& ts = n.at("ts");
    if (!ts.is_array()) Node::fail(n.key("ts"), "must be an array of numbers");
    m.ts.clear();
    for (const auto& t : ts) {
      if (!t.is_number()) Node::fail(n.key("ts"), "must be an array of numbers");
      m.ts.push_back(t.get<double>());
    }
  }
  return m;
}

WaveSpec parse_wave(const Node& n) {
  WaveSpec w;
  w.center = n.num("center");
  w.width = n.positive("width");
  w.k0 = n.num("k0", 0.0);
  w.amplitude = n.num("amplitude", 1.0);
  const std::string mv = n.choice("mover", "right", {"right", "left", "none"});
  w.mover = mv == "right" ? 1 : mv == "left" ? -1 : 0;
  return w;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config c;
  try {
    c.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  const Node root(c.raw, "", {"model", "region", "wave", "sweep", "huygens", "propagator", "weyl_check", "modular"});
  if (root.has("model")) c.model = parse_model(root.child("model", {"N", "a", "m", "mu"}));
  if (root.has("propagator"))
    c.propagator = parse_propagator(root.child("propagator", {"kernel", "m", "t", "x", "grid", "pairings"}));
  if (root.has("weyl_check"))
    c.weyl_check = parse_weyl(root.child("weyl_check", {"model", "dt", "n_begin", "nt", "pairs"}), c.model);
  if (root.has("modular")) {
    if (!c.model) Node::fail("modular", "needs a model section");
    c.modular = parse_modular(root.child("modular", {"regions", "ts"}), *c.model);
  }

  const bool any_sweep = root.has("region") || root.has("wave") || root.has("sweep") || root.has("huygens");
  if (!any_sweep) return c;
  if (!c.model) Node::fail("model", "is required by the sweep sections");
  SweepSpec s;
  s.model = *c.model;
  const Node region = root.child("region", {"l", "r", "shrink", "drift"});
  s.l = region.integer("l");
  s.r = region.integer("r");
  s.shrink = region.nonnegative("shrink", 1.0 / s.model.a);
  s.drift = region.has("drift") ? region.integer("drift") : 0;
  s.wave = parse_wave(root.child("wave", {"center", "width", "k0", "amplitude", "mover"}));
  const Node sw = root.child("sweep", {"steps", "dt", "picture"});
  s.steps = sw.integer("steps", 0, 1);
  s.dt = sw.positive("dt");
  s.picture = sw.choice("picture", "fixed", {"fixed", "transported"}) == "fixed" ? Picture::fixed : Picture::transported;
  semantic("sweep", [&] { s.validate(); });
  c.sweep = s;

  if (root.has("huygens")) {
    const Node h = root.child("huygens", {"massive_m", "mu", "steps"});
    HuygensConfig hc;
    hc.massive_m = h.has("massive_m") ? h.positive("massive_m") : 1.0;
    hc.massless = s;
    hc.massless.model.m = 0.0;
    hc.massless.model.mu = h.has("mu") ? h.positive("mu") : 1e-3 / s.model.a;
    if (*hc.massless.model.mu > 1e-3 / s.model.a * (1 + 1e-12)) Node::fail(h.key("mu"), "must be at most 1e-3/a");
    hc.massless.steps = h.integer("steps", s.steps, 1);
    hc.massless.picture = Picture::transported;
    semantic("huygens", [&] { hc.massless.validate(); });
    c.huygens = hc;
  }
  return c;
}

const std::string& default_config_text() {
  static const std::string text =
#include "default_config.inc"
      ;
  return text;
}

}  // namespace qftlab::cli
