#pragma once
// Affine functionals F[phi] = c + int f phi, their unitaries S(F), and the Weyl
// normal form S(F) = exp(i theta) W(wave).
//
// Densities live on a lattice grid of the model (see propagators.hpp), so the
// wave of f is lattice Cauchy data and every identity below holds exactly up
// to rounding, apart from the small leak of the discrete kernels outside the
// continuum lightcone.

#include <cstdint>
#include <string>

#include "qftlab/propagators.hpp"

namespace qftlab {

struct Functional {
  double constant = 0.0;
  TestFunction density;

  bool is_constant() const { return density.support.empty(); }
  const Box& support() const { return density.support; }
  double value(const TestFunction& phi) const { return constant + quadrature(density, phi); }
  Functional operator+(const Functional& o) const;
  Functional operator-() const { return {-constant, -density}; }
};

Functional constant_functional(double c, const Grid& g);
Functional linear_functional(const TestFunction& f, double c = 0.0);

// delta L(phi0)[phi] = 1/2 int (d phi0 d phi0 - m^2 phi0^2) - int (box + m^2) phi0 phi.
// The constant uses forward differences, so it equals -1/2 int phi0 P_h phi0 exactly.
Functional delta_L(const TestFunction& phi0, double m);
// F^{phi0}[phi] = F[phi + phi0]
Functional shift_functional(const Functional& F, const TestFunction& phi0);

// later: supp G lies above some surface t = t0 + v x (|v| < 1) and supp F below it.
enum class CausalOrder { later, earlier, spacelike, overlapping };
std::string to_string(CausalOrder c);
CausalOrder causal_order(const Functional& F, const Functional& G);

struct WeylElement {
  double phase = 0.0;  // theta, meaningful mod 2 pi
  CauchyData wave;
  LatticeSpec model;

  static WeylElement identity(const LatticeModel& model);
  bool same_model(const WeylElement& o) const;
};

WeylElement weyl_product(const WeylElement& w1, const WeylElement& w2);
WeylElement weyl_inverse(const WeylElement& w);
// max(|theta1 - theta2| mod 2 pi, max |wave1 - wave2|)
double phase_distance(double a, double b);
double weyl_distance(const WeylElement& w1, const WeylElement& w2);

std::string to_json(const WeylElement& w);
WeylElement weyl_from_json(const std::string& text);

// theta = c - 1/2 f Delta_D f, wave = Cauchy data of Delta f at t = 0.
WeylElement normal_form(const Functional& F, const LatticeModel& model);

// S(F1) S(F2) for F1 later than (or spacelike to) F2, derived from
// factorization, the field-equation shift and the central phase only.
struct RelationTrace {
  WeylElement result;
  Functional combined;    // F1 + F2
  Functional reduced;     // (F1 + F2)^{phi0} + delta L(phi0), density on the slices t = -dt, 0
  TestFunction shift;     // phi0 from the advanced solution
  double crosscheck = 0;  // max |phi0(advanced) - phi0(retarded)|
};

RelationTrace product_via_relations_traced(const Functional& F1, const Functional& F2, const LatticeModel& model);
WeylElement product_via_relations(const Functional& F1, const Functional& F2, const LatticeModel& model);

// normal form of S(G)^{-1} S(F + G)
WeylElement bogoliubov(const Functional& G, const Functional& F, const LatticeModel& model);

// product_via_relations against weyl_product on random bump pairs, half of
// them causally ordered and half spacelike
struct RelationSuiteSpec {
  LatticeSpec model{128, 0.1, 0.5, {}};
  double dt = 0.08;
  int n_begin = -50;
  int nt = 101;
  int pairs = 100;
};

struct RelationSuiteReport {
  int pairs = 0, ordered = 0, spacelike = 0;
  double max_phase_error = 0, max_wave_error = 0;
  bool pass = false;  // phase < 1e-4, waves < 1e-8

  static constexpr double phase_tol = 1e-4, wave_tol = 1e-8;
};

RelationSuiteReport relation_suite(const RelationSuiteSpec& spec, std::uint64_t seed);

void write_functional(const Functional& F, const std::string& path);
Functional read_functional(const std::string& path);

}  // namespace qftlab
