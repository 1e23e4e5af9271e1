#pragma once
// Klein-Gordon Green functions in 1+1 (continuum closed forms, lattice
// counterparts) and a radial 3+1 massless pairing.
//
// Sign convention: (box + m^2) Delta_R = -delta, supp Delta_R in {t >= |x|}.
// In 1+1:  Delta_R(t,x) = -1/2 theta(t - |x|) J0(m sqrt(t^2 - x^2)),
//          Delta_A(t,x) = Delta_R(-t,x),  Delta = Delta_R - Delta_A,  Delta_D = (Delta_R + Delta_A)/2.
// With this sign  W(f1)W(f2) = exp(-i/2 f1.Delta.f2) W(f1+f2)  and
// sigma(wave f1, wave f2) = f1.Delta.f2  hold simultaneously.

#include <Eigen/Dense>
#include <string>

#include "qftlab/lattice_model.hpp"

namespace qftlab {

enum class KernelType { retarded, advanced, pauli_jordan, dyson_mean };
enum class Dimension { d1p1, d3p1_radial };

struct KernelKind {
  KernelType type = KernelType::pauli_jordan;
  double m = 0.0;
  Dimension dim = Dimension::d1p1;
};

std::string to_string(KernelType k);
KernelType kernel_type_from_string(const std::string& s);

// Off the cone `value` is the kernel; on the cone (t = +-|x|) it is the mean of
// the two one-sided limits and `on_lightcone` is set.
struct KernelValue {
  double value = 0.0;
  bool on_lightcone = false;
};

KernelValue kernel_eval(const KernelKind& kind, double t, double x);

// ---- sampled spacetime functions ----

struct Grid {
  double t0 = 0, x0 = 0;
  double dt = 1, dx = 1;
  int nt = 0, nx = 0;
  bool periodic_x = false;  // lattice grids: x runs over all sites, periodically

  double t(int i) const { return t0 + i * dt; }
  double x(int j) const { return x0 + j * dx; }
};

struct Box {  // inclusive index ranges; empty when it0 > it1
  int it0 = 0, it1 = -1, ix0 = 0, ix1 = -1;
  bool empty() const { return it0 > it1 || ix0 > ix1; }
};

struct TestFunction {
  Grid grid;
  Eigen::MatrixXd values;  // nt x nx, row = time slice
  Box support;

  // Throws if the invariants (vanishing outside the box, box inside grid) fail.
  void validate() const;
  static TestFunction zeros(const Grid& g);
  // Samples fn on the box; everything outside is exactly zero.
  template <class F>
  static TestFunction sample(const Grid& g, const Box& box, F fn);
  // Recomputes the tight box around the nonzero samples.
  void shrink_support();
  TestFunction operator+(const TestFunction& o) const;
  TestFunction operator-() const;
  TestFunction operator*(double c) const;
};

// Smooth compact bump amp * b((t-tc)/rt) b((x-xc)/rx), b(u) = exp(1 - 1/(1-u^2)).
TestFunction make_bump(const Grid& g, double tc, double xc, double rt, double rx, double amp = 1.0);

// Same spacings and origins offset by whole cells.
bool grids_compatible(const Grid& a, const Grid& b);

// Integral of f*g over the grid, both on compatible grids.
double quadrature(const TestFunction& f, const TestFunction& g);

void write_csv(const TestFunction& f, const std::string& path);
TestFunction read_csv(const std::string& path);

// ---- continuum pairings ----

// sum_p sum_q f_p g_q K(y_p - y_q) (dt dx)^2. Where the lightcone cuts the
// displacement cell, K is replaced by its average over that cell, integrated
// piecewise with the cone as a breakpoint; elsewhere K is taken at the centre.
double pairing(const TestFunction& f, const TestFunction& g, const KernelKind& kind);

// Centered second differences of (box + m^2) f, box = d_t^2 - d_x^2. Needs 4 points
// of margin in t, and in x unless the grid is periodic (then the stencil wraps).
TestFunction kg_apply(const TestFunction& f, double m);

// ---- lattice counterparts ----
// A lattice grid has dx = a, nx = N, x0 at site 0, t0 a multiple of dt, and
// dt below the stability limit. On it the discrete operator
// P_h = D_tt - D_xx(lattice) + m^2 has exact retarded/advanced inverses, which
// make W(P_h phi0) = 1 an identity rather than an approximation.

Grid lattice_grid(const LatticeModel& model, double dt, int n_begin, int nt);
bool on_lattice_grid(const TestFunction& f, const LatticeModel& model);
int time_index(const Grid& g, int i);  // absolute index n of row i, t = n dt
// Copies f onto a lattice grid spanning absolute time indices [n_lo, n_hi].
TestFunction to_lattice_window(const TestFunction& f, const LatticeModel& model, int n_lo, int n_hi);

// u = K_h f on the rows [n_lo, n_hi] (absolute indices), K_h the discrete kernel.
TestFunction lattice_green_apply(const TestFunction& f, KernelType kind, const LatticeModel& model, int n_lo,
                                 int n_hi);
double lattice_pairing(const TestFunction& f, const TestFunction& g, KernelType kind,
                       const LatticeModel& model);
// Cauchy data at t = 0 of Delta_h f: field at n = 0, centered time difference as momentum.
CauchyData lattice_wave(const TestFunction& f, const LatticeModel& model);

// ---- pointwise mode sums (oracles) ----

// -(1/(N a)) sum_k sin(w t) cos(k x)/w over lattice momenta. With
// continuum_dispersion the continuum w = sqrt(m^2+k^2) is used and the
// truncated tail |k| > pi/a is added back analytically.
double mode_sum_pauli_jordan(double t, double x, double m, int N, double a, bool continuum_dispersion = true);
double sine_integral(double x);

// ---- 3+1 massless, radial ----

struct RadialFunction {  // f(t, |x|) sampled at r_j = j dr
  double t0 = 0, dt = 1, dr = 1;
  int nt = 0, nr = 0;
  Eigen::MatrixXd values;  // nt x nr
  Box support;             // ix* index r
  double t(int i) const { return t0 + i * dt; }
  double r(int j) const { return j * dr; }
};

RadialFunction make_radial_bump(double t0, double dt, int nt, double dr, int nr, double tc, double rc, double wt,
                                double wr, double amp = 1.0);

// int int f(x) Delta(x-y) g(y) d^4x d^4y with Delta = -(1/(4 pi r))(delta(t-r) - delta(t+r)).
// After the angular integration the kernel is supported on |r1-r2| <= |t1-t2| <= r1+r2;
// the t2 integral is done exactly on the piecewise-linear interpolant of g.
double pair_massless_3p1(const RadialFunction& f, const RadialFunction& g);
// True when no sample pair of the support boxes is lightlike connected.
bool cone_shadows_disjoint(const RadialFunction& f, const RadialFunction& g);

// ---- template implementation ----

template <class F>
TestFunction TestFunction::sample(const Grid& g, const Box& box, F fn) {
  TestFunction f = zeros(g);
  if (box.it0 < 0 || box.ix0 < 0 || box.it1 >= g.nt || box.ix1 >= g.nx)
    throw std::invalid_argument("TestFunction: support box outside grid");
  for (int i = box.it0; i <= box.it1; ++i)
    for (int j = box.ix0; j <= box.ix1; ++j) f.values(i, j) = fn(g.t(i), g.x(j));
  f.support = box;
  return f;
}

}  // namespace qftlab
