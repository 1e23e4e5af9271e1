// qftlab <command> [--config file] [--out dir] [--threads n] [--seed u64] [-v]
// Exit status: 0 all checks pass, 1 a numerical check failed, 2 bad config or
// arguments, 3 I/O error. Nothing is written unless the computation finished.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "qftlab/conventions.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qftlab;
using namespace qftlab::cli;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string config;
  std::string out = ".";
  int threads = 1;
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct Result {
  std::vector<std::pair<std::string, std::string>> files;
  bool pass = true;
  std::string summary;

  void add(const std::string& name, std::string content) { files.emplace_back(name, std::move(content)); }
  void add(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

json sidecar(const Options& o, const Config& c) {
  json j;
  j["command"] = o.command;
  j["conventions"] = conventions();
  j["config"] = c.raw;
  return j;
}

template <class T>
const T& need(const std::optional<T>& v, const std::string& what, const std::string& cmd) {
  if (!v) throw SchemaError("config: command " + cmd + " needs the " + what + " section");
  return *v;
}

// ---- commands ----

Result cmd_propagator(const Options& o, const Config& c) {
  const PropagatorConfig& p = need(c.propagator, "propagator", o.command);
  Result r;
  std::string csv = "t,x,value,on_lightcone\n";
  for (int i = 0; i < p.t.n; ++i)
    for (int j = 0; j < p.x.n; ++j) {
      const double t = p.t.at(i), x = p.x.at(j);
      const KernelValue v = kernel_eval(p.kind, t, x);
      if (!std::isfinite(v.value)) r.pass = false;
      csv += g17(t) + "," + g17(x) + "," + g17(v.value) + "," + (v.on_lightcone ? "1" : "0") + "\n";
    }
  r.add("propagator.csv", csv);
  json side = sidecar(o, c);
  side["columns"] = {"t", "x", "value", "on_lightcone"};
  side["kernel"] = to_string(p.kind.type);
  side["m"] = p.kind.m;
  if (!p.pairings.empty()) {
    std::string pc = "index,value\n";
    for (size_t i = 0; i < p.pairings.size(); ++i) {
      const auto& [f, g] = p.pairings[i];
      const double v = pairing(make_bump(*p.grid, f.tc, f.xc, f.rt, f.rx, f.amp),
                               make_bump(*p.grid, g.tc, g.xc, g.rt, g.rx, g.amp), p.kind);
      if (!std::isfinite(v)) r.pass = false;
      pc += std::to_string(i) + "," + g17(v) + "\n";
    }
    r.add("pairings.csv", pc);
    side["pairings_columns"] = {"index", "value"};
  }
  r.add("propagator.json", side);
  r.summary = "propagator: " + std::to_string(p.t.n * p.x.n) + " points, " + std::to_string(p.pairings.size()) +
              " pairings";
  return r;
}

Result cmd_weyl_check(const Options& o, const Config& c) {
  const RelationSuiteSpec s = c.weyl_check ? *c.weyl_check : RelationSuiteSpec{};
  const RelationSuiteReport rep = relation_suite(s, o.seed);
  Result r;
  r.pass = rep.pass;
  json side = sidecar(o, c);
  side["seed"] = o.seed;
  side["pairs"] = rep.pairs;
  side["ordered"] = rep.ordered;
  side["spacelike"] = rep.spacelike;
  side["max_phase_error"] = rep.max_phase_error;
  side["max_wave_error"] = rep.max_wave_error;
  side["phase_tolerance"] = RelationSuiteReport::phase_tol;
  side["wave_tolerance"] = RelationSuiteReport::wave_tol;
  side["pass"] = rep.pass;
  r.add("weyl_check.json", side);
  r.summary = "weyl-check: " + std::to_string(rep.pairs) + " pairs, max_phase_error " +
              fmt("%.3g", rep.max_phase_error) + (rep.max_phase_error < 1e-4 ? " < 1e-4" : " >= 1e-4") +
              ", max_wave_error " + fmt("%.3g", rep.max_wave_error) + (rep.pass ? ": pass" : ": FAIL");
  return r;
}

Result cmd_modular(const Options& o, const Config& c) {
  const ModularConfig& mc = need(c.modular, "modular", o.command);
  const LatticeModel model = build_model(*c.model);
  Result r;
  std::string csv =
      "region_l,region_r,dim,cap_dim,span_dim,standard,factor,digits,log10_cond,cond_flag,jdj,s_square,"
      "max_invariance,p_idempotent,p_range,p_kernel\n";
  int failed = 0;
  for (const auto& [l, rr] : mc.regions) {
    const ModularAnalysis an = analyze(make_subspace(model, Region::interval(l, rr)));
    const StandardnessReport& rep = an.report;
    std::ostringstream row;
    row << l << "," << rr << "," << rep.dim << "," << rep.cap_dim << "," << rep.span_dim << ","
        << (rep.standard() ? 1 : 0) << ",";
    if (!an.data) {
      row << "0," << rep.condition.digits << ",nan,not-standard,nan,nan,nan,nan,nan,nan\n";
      csv += row.str();
      continue;
    }
    const ModularData& md = *an.data;
    const auto res = md.residuals(mc.ts);
    bool ok = res.jdj < 1e-8 && res.s_square < 1e-8 && res.max_invariance < 1e-6;
    std::string pres = "nan,nan,nan";
    bool factor = true;
    try {
      const CuttingProjection P(md);
      const auto pr = P.residuals();
      ok = ok && pr.idempotent < 1e-8 && pr.range < 1e-8 && pr.kernel < 1e-8;
      pres = g17(pr.idempotent) + "," + g17(pr.range) + "," + g17(pr.kernel);
    } catch (const NotAFactor&) {
      factor = false;
    }
    if (!ok) ++failed;
    row << (factor ? 1 : 0) << "," << md.condition().digits << "," << g17(md.condition().log10_cond) << ","
        << md.condition().flag() << "," << g17(res.jdj) << "," << g17(res.s_square) << ","
        << g17(res.max_invariance) << "," << pres << "\n";
    csv += row.str();
    r.add("spectrum_" + std::to_string(l) + "_" + std::to_string(rr) + ".csv", spectrum_csv(md));
  }
  r.pass = failed == 0;
  r.add("modular.csv", csv);
  json side = sidecar(o, c);
  side["tolerances"] = {{"jdj", 1e-8}, {"s_square", 1e-8}, {"max_invariance", 1e-6}, {"projection", 1e-8}};
  side["ts"] = mc.ts;
  side["failed_regions"] = failed;
  r.add("modular.json", side);
  r.summary = "modular: " + std::to_string(mc.regions.size()) + " regions, " + std::to_string(failed) + " failed";
  return r;
}

Result cmd_sweep(const Options& o, const Config& c) {
  const SweepSpec& s = need(c.sweep, "region/wave/sweep", o.command);
  const SweepResult res = run_sweep(s);
  Result r;
  r.pass = res.monotone() && res.all_finite();
  r.add("sweep.csv", sweep_csv(res));
  json side = sidecar(o, c);
  side["result"] = sweep_metadata(res);
  r.add("sweep.json", side);
  r.summary = "sweep: " + std::to_string(res.series.size()) + " steps, max increase " + fmt("%.3g", res.max_increase) +
              (r.pass ? ", monotone" : ", FAIL");
  return r;
}

Result cmd_huygens(const Options& o, const Config& c) {
  const HuygensConfig& hc = need(c.huygens, "huygens", o.command);
  const HuygensReport h = huygens_contrast(hc.massless, hc.massive_m);
  Result r;
  r.pass = h.collapsed;
  r.add("huygens_massless.csv", sweep_csv(h.massless));
  r.add("huygens_massive.csv", sweep_csv(h.massive));
  json side = sidecar(o, c);
  side["result"] = huygens_metadata(h);
  r.add("huygens.json", side);
  r.summary = "huygens: t* = " + fmt("%.4g", h.t_exit) + ", massless max I/I0 after exit " +
              fmt("%.3g", h.max_ratio_after_exit) + ", massive " + fmt("%.3g", h.massive_ratio_after_exit) +
              (r.pass ? ", collapsed" : ", FAIL");
  return r;
}

Result cmd_spectrum(const Options& o, const Config& c) {
  const LatticeModel model = build_model(need(c.model, "model", o.command));
  const SpectrumReport rep = energy_spectrum_check(model);
  Result r;
  r.pass = rep.pass;
  std::string csv = "index,k,omega\n";
  for (int j = 0; j < model.N(); ++j)
    csv += std::to_string(j) + "," + g17(model.momenta()[j]) + "," + g17(model.omega()[j]) + "\n";
  r.add("spectrum.csv", csv);
  json side = sidecar(o, c);
  side["columns"] = {"index", "k", "omega"};
  side["min_omega"] = rep.min_omega;
  side["max_omega"] = rep.max_omega;
  side["gap"] = rep.gap;
  side["max_formula_error"] = rep.max_formula_error;
  side["below_momentum"] = rep.below_momentum;
  side["pass"] = rep.pass;
  r.add("spectrum.json", side);
  r.summary = "spectrum: min omega " + fmt("%.6g", rep.min_omega) + (rep.pass ? ", pass" : ", FAIL");
  return r;
}

// ---- output ----

void commit(const std::string& dir, const Result& r) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  const std::string tag = ".tmp." + std::to_string(::getpid());
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : r.files) {
    const fs::path tmp = fs::path(dir) / (name + tag);
    temps.push_back(tmp);
    std::ofstream os(tmp, std::ios::binary);
    os << content;
    os.close();
    if (!os) {
      cleanup();
      throw IoError("cannot write " + tmp.string());
    }
  }
  for (size_t i = 0; i < r.files.size(); ++i) {
    fs::rename(temps[i], fs::path(dir) / r.files[i].first, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot rename into " + dir + ": " + ec.message());
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("cannot read config " + path);
  return ss.str();
}

int run(const Options& o) {
  try {
    const Config c = parse_config(o.config.empty() ? default_config_text() : read_file(o.config));
    Result r;
    if (o.command == "propagator") r = cmd_propagator(o, c);
    else if (o.command == "weyl-check") r = cmd_weyl_check(o, c);
    else if (o.command == "modular") r = cmd_modular(o, c);
    else if (o.command == "sweep") r = cmd_sweep(o, c);
    else if (o.command == "huygens") r = cmd_huygens(o, c);
    else if (o.command == "spectrum") r = cmd_spectrum(o, c);
    commit(o.out, r);
    std::cout << r.summary << "\n";
    if (o.verbose)
      for (const auto& f : r.files) std::cout << "  wrote " << (fs::path(o.out) / f.first).string() << "\n";
    return r.pass ? 0 : 1;
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice Klein-Gordon field: propagators, Weyl relations, modular data and information sweeps"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"propagator", "kernel values and pairings to CSV"},
      {"weyl-check", "relation-derived products against the Weyl product"},
      {"modular", "modular spectra and invariant residuals of lattice regions"},
      {"sweep", "information along a shrinking diamond"},
      {"huygens", "massless against massive information collapse"},
      {"spectrum", "lattice dispersion check"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config (default: the bundled one)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "accepted; sweeps run in order")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", o.seed, "seed for the random instances of weyl-check")->capture_default_str();
    sub->add_flag("-v,--verbose", o.verbose, "list written files");
    sub->callback([&o, n = name] { o.command = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(o);
}
