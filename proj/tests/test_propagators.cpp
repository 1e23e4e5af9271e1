#include "doctest.h"
#include "qftlab/propagators.hpp"

#include <cstdio>
#include <random>

using namespace qftlab;

namespace {

// -int dk/2pi int int sin(w (t1-t2))/w Re[conj f^(t1,k) g^(t2,k)], f^ the sampled x-transform
double spectral_pairing(const TestFunction& f, const TestFunction& g, double m, double kmax, double dk) {
  const Grid& G = f.grid;
  double acc = 0;
  const int nk = static_cast<int>(std::ceil(kmax / dk));
  for (int q = -nk; q <= nk; ++q) {
    const double k = q * dk;
    const double w = std::sqrt(m * m + k * k);
    auto transform = [&](const TestFunction& h, cplx& plus, cplx& minus) {
      plus = minus = 0;
      for (int i = h.support.it0; i <= h.support.it1; ++i) {
        cplx hk = 0;
        for (int j = h.support.ix0; j <= h.support.ix1; ++j) hk += h.values(i, j) * std::polar(1.0, -k * h.grid.x(j));
        plus += hk * std::polar(1.0, w * h.grid.t(i));
        minus += hk * std::polar(1.0, -w * h.grid.t(i));
      }
    };
    cplx ap, am, bp, bm;
    transform(f, ap, am);
    transform(g, bp, bm);
    const cplx s = (std::conj(am) * bm - std::conj(ap) * bp) / cplx(0, 2);
    const double wt = (q == -nk || q == nk) ? 0.5 : 1.0;
    acc += wt * (-s.real() / w);
  }
  return acc * dk / (2 * M_PI) * std::pow(G.dt * G.dx, 2);
}

// (1/2pi^2) int k^2 dk int int f^(t1,k) (-sin(w (t1-t2))/w) g^(t2,k), radial transform f^
double radial_mode_sum(const RadialFunction& f, const RadialFunction& g, double m, double kmax, double dk) {
  double acc = 0;
  const int nk = static_cast<int>(std::ceil(kmax / dk));
  for (int q = 1; q <= nk; ++q) {
    const double k = q * dk;
    const double w = std::sqrt(m * m + k * k);
    auto transform = [&](const RadialFunction& h) {
      cplx a = 0;
      for (int i = h.support.it0; i <= h.support.it1; ++i) {
        double hk = 0;
        for (int j = h.support.ix0; j <= h.support.ix1; ++j) {
          const double r = h.r(j);
          hk += h.values(i, j) * (r == 0 ? r * r : r * std::sin(k * r) / k);
        }
        a += 4 * M_PI * hk * h.dr * h.dt * std::polar(1.0, w * h.t(i));
      }
      return a;
    };
    const cplx A = transform(f), B = transform(g);
    // sum_{t1,t2} f^ g^ sin(w (t1 - t2)) = Im(A conj(B))
    const double wt = q == nk ? 0.5 : 1.0;
    acc += wt * k * k * (-(A * std::conj(B)).imag() / w);
  }
  return acc * dk / (2 * M_PI * M_PI);
}

Grid plain_grid(double h, double t0, double x0, int n) { return {t0, x0, h, h, n, n, false}; }

}  // namespace

TEST_CASE("closed-form kernels") {
  KernelKind pj0{KernelType::pauli_jordan, 0.0};
  CHECK(kernel_eval(pj0, 1, 2).value == 0.0);
  CHECK_FALSE(kernel_eval(pj0, 1, 2).on_lightcone);
  for (double m : {0.0, 0.5, 1.0, 3.0}) {
    KernelKind pj{KernelType::pauli_jordan, m}, r{KernelType::retarded, m}, a{KernelType::advanced, m},
        d{KernelType::dyson_mean, m};
    CHECK(kernel_eval(pj, -1, -0.5).value == -kernel_eval(pj, 1, 0.5).value);
    for (double t : {-2.3, -0.7, 0.0, 0.4, 1.9})
      for (double x : {-2.0, -0.4, 0.0, 0.4, 1.1}) {
        const double rv = kernel_eval(r, t, x).value, av = kernel_eval(a, t, x).value;
        CHECK(std::abs(kernel_eval(pj, t, x).value - (rv - av)) < 1e-15);
        CHECK(std::abs(kernel_eval(d, t, x).value - 0.5 * (rv + av)) < 1e-15);
        CHECK(std::abs(kernel_eval(pj, -t, -x).value + kernel_eval(pj, t, x).value) < 1e-12);
        if (std::abs(x) > std::abs(t)) CHECK(kernel_eval(pj, t, x).value == 0.0);
      }
  }
  KernelValue on = kernel_eval({KernelType::retarded, 1.0}, 1.5, -1.5);
  CHECK(on.on_lightcone);
  CHECK(on.value == -0.25);
  CHECK_THROWS(kernel_eval({KernelType::retarded, 0.0, Dimension::d3p1_radial}, 1, 0));
  // no sharp Huygens in 1+1: constant inside each cone component
  for (double t : {0.5, 2.0, 7.0})
    for (double x : {0.0, 0.3 * t, -0.9 * t}) {
      CHECK(kernel_eval(pj0, t, x).value == -0.5);
      CHECK(kernel_eval(pj0, -t, x).value == 0.5);
    }
}

TEST_CASE("mode-sum oracle for the Pauli-Jordan function") {
  CHECK(sine_integral(1.0) == doctest::Approx(0.9460830703671830).epsilon(1e-14));
  CHECK(sine_integral(10.0) == doctest::Approx(1.658347594218874).epsilon(1e-13));
  CHECK(sine_integral(30.0) == doctest::Approx(1.566756540030351).epsilon(1e-13));
  CHECK(sine_integral(100.0) == doctest::Approx(1.562225466889056).epsilon(1e-13));
  CHECK(sine_integral(-3.0) == doctest::Approx(-1.848652527999468).epsilon(1e-14));
  KernelKind pj{KernelType::pauli_jordan, 1.0};
  const double closed = kernel_eval(pj, 2, 0).value;
  CHECK(std::abs(mode_sum_pauli_jordan(2, 0, 1.0, 8192, 0.01) - closed) < 1e-3);
  for (double t : {0.5, 1.3, 2.0})
    for (double x : {0.0, 0.2, -0.35, 1.7}) {
      const double c = kernel_eval(pj, t, x).value;
      if (std::abs(std::abs(x) - t) < 0.05) continue;
      CHECK(std::abs(mode_sum_pauli_jordan(t, x, 1.0, 8192, 0.01) - c) < 1e-4);
    }
}

TEST_CASE("continuum pairing: antisymmetry, locality, spectral oracle") {
  const Grid g = plain_grid(0.04, -6, -6, 301);
  TestFunction f1 = make_bump(g, -1.2, 0.3, 1.0, 1.1, 1.0);
  TestFunction f2 = make_bump(g, 1.4, -0.2, 0.9, 1.3, 0.7);
  TestFunction far = make_bump(g, 0.0, 4.4, 0.6, 0.6, 1.0);
  TestFunction near = make_bump(g, 0.0, -0.6, 0.6, 0.6, 1.0);
  for (double m : {0.0, 1.0}) {
    KernelKind pj{KernelType::pauli_jordan, m};
    CHECK(std::abs(pairing(f1, f1, pj)) < 1e-12);
    const double p12 = pairing(f1, f2, pj), p21 = pairing(f2, f1, pj);
    CHECK(std::abs(p12 + p21) < 1e-12);
    CHECK(std::abs(p12) > 1e-2);
    // supports |x| separation 3.8 - 1.2 > time extent 1.2: spacelike
    CHECK(std::abs(pairing(near, far, pj)) < 1e-12);
    const double r = pairing(f1, f2, {KernelType::retarded, m});
    const double a = pairing(f1, f2, {KernelType::advanced, m});
    const double d = pairing(f1, f2, {KernelType::dyson_mean, m});
    CHECK(std::abs(p12 - (r - a)) < 1e-12);
    CHECK(std::abs(d - 0.5 * (r + a)) < 1e-12);
  }
  // m = 1 makes this pair nearly cancel; a lighter field gives an O(1) value
  KernelKind pj1{KernelType::pauli_jordan, 0.3};
  const double direct = pairing(f1, f2, pj1);
  const double spec = spectral_pairing(f2, f1, 0.3, 40.0, 0.01);
  CHECK(std::abs(direct + spec) < 1e-4 * std::abs(direct));
  MESSAGE("pairing " << direct << " spectral " << -spec);
  CHECK_THROWS(pairing(f1, make_bump(plain_grid(0.05, -6, -6, 200), 0, 0, 1, 1), pj1));
}

TEST_CASE("Green function property under refinement") {
  const double m = 0.8;
  double prev = 0;
  for (int level = 0; level < 3; ++level) {
    const double h = 0.08 / (1 << level);
    const int n = static_cast<int>(std::lround(10 / h)) + 1;
    const Grid g = plain_grid(h, -5, -5, n);
    TestFunction phi0 = make_bump(g, 0.5, 0.2, 1.2, 1.0, 1.0);
    TestFunction gg = make_bump(g, 0.2, -0.3, 1.0, 1.4, 1.0);
    const double lhs = pairing(kg_apply(phi0, m), gg, {KernelType::retarded, m});
    const double rhs = -quadrature(phi0, gg);
    const double err = std::abs(lhs - rhs);
    MESSAGE("h=" << h << " green err " << err);
    if (level > 0) CHECK(err < 0.4 * prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("kg_apply") {
  const Grid g = plain_grid(0.01, -1, -1, 201);
  TestFunction z = TestFunction::zeros(g);
  CHECK(kg_apply(z, 1.0).support.empty());
  const double w = 2.0, k = 1.3, m = 0.7;
  TestFunction pw = TestFunction::sample(g, {10, 190, 10, 190}, [&](double t, double x) {
    return std::cos(w * t - k * x);
  });
  TestFunction r = kg_apply(pw, m);
  CHECK(r.support.it0 == 9);
  CHECK(r.support.ix1 == 191);
  double err = 0;
  for (int i = 20; i <= 180; ++i)
    for (int j = 20; j <= 180; ++j) err = std::max(err, std::abs(r.values(i, j) - (m * m + k * k - w * w) * pw.values(i, j)));
  CHECK(err < 1e-3);
  TestFunction tight = TestFunction::sample(g, {2, 190, 10, 190}, [](double, double) { return 1.0; });
  CHECK_THROWS(kg_apply(tight, 1.0));
}

TEST_CASE("lattice Green functions") {
  LatticeModel mdl = build_model({128, 0.1, 0.3, {}});
  const double dt = 0.08;
  const Grid g = lattice_grid(mdl, dt, -60, 121);
  CHECK_THROWS(lattice_grid(mdl, 0.1, 0, 10));
  TestFunction f1 = make_bump(g, -1.5, 0.4, 1.0, 1.2);
  TestFunction f2 = make_bump(g, 1.2, -0.5, 1.1, 1.0, 0.6);
  CHECK(on_lattice_grid(f1, mdl));

  const double p12 = lattice_pairing(f1, f2, KernelType::pauli_jordan, mdl);
  const double p21 = lattice_pairing(f2, f1, KernelType::pauli_jordan, mdl);
  CHECK(std::abs(p12 + p21) < 1e-12 * std::abs(p12));
  CHECK(std::abs(lattice_pairing(f1, f2, KernelType::retarded, mdl) -
                 lattice_pairing(f2, f1, KernelType::advanced, mdl)) < 1e-12);
  // symplectic form of the waves is the discrete Pauli-Jordan pairing
  const double sig = symplectic_form(lattice_wave(f1, mdl), lattice_wave(f2, mdl), mdl.a());
  CHECK(std::abs(sig - p12) < 1e-11 * std::abs(p12));
  // close to the continuum
  const double cont = pairing(f1, f2, {KernelType::pauli_jordan, 0.3});
  MESSAGE("lattice " << p12 << " continuum " << cont);
  CHECK(std::abs(p12 - cont) < 1e-3 * std::abs(cont));

  // Delta_D P_h = -1 and wave(P_h phi0) = 0 exactly
  TestFunction phi0 = make_bump(g, 0.3, 0.0, 1.5, 1.5);
  TestFunction src = kg_apply(phi0, std::sqrt(mdl.mass2()));
  TestFunction back = lattice_green_apply(src, KernelType::dyson_mean, mdl, -60, 60);
  CHECK((back.values + phi0.values).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(lattice_wave(src, mdl).norm() < 1e-10);
  TestFunction ret = lattice_green_apply(src, KernelType::retarded, mdl, -60, 60);
  CHECK((ret.values + phi0.values).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("TestFunction CSV round trip") {
  const Grid g = plain_grid(0.1, -1, -2, 30);
  TestFunction f = make_bump(g, 0.4, -0.5, 0.8, 0.6, 2.5);
  const std::string path = "propagators_roundtrip.csv";
  write_csv(f, path);
  TestFunction r = read_csv(path);
  CHECK(r.values == f.values);
  CHECK(r.support.it0 == f.support.it0);
  CHECK(r.support.ix1 == f.support.ix1);
  CHECK(r.grid.dx == f.grid.dx);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
  TestFunction bad = f;
  bad.values(0, 0) = 1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("3+1 massless radial pairing") {
  const double h = 0.025;
  auto ball = [&](double tc, double rc, double wt, double wr, double amp = 1.0) {
    return make_radial_bump(-3, h, 321, h, 240, tc, rc, wt, wr, amp);
  };
  // g strictly inside the future cone of f, spacelike shell, past cone interior
  RadialFunction f = ball(-2.0, 0.0, 0.4, 0.4);
  RadialFunction late = ball(3.0, 0.0, 0.4, 0.4);
  RadialFunction shell = ball(-2.0, 4.5, 0.4, 0.5);
  CHECK(pair_massless_3p1(f, late) == 0.0);
  CHECK(pair_massless_3p1(late, f) == 0.0);
  CHECK(pair_massless_3p1(f, shell) == 0.0);
  CHECK(cone_shadows_disjoint(f, late));

  RadialFunction g = ball(0.0, 2.0, 0.5, 0.6, 0.8);
  CHECK_FALSE(cone_shadows_disjoint(f, g));
  const double p = pair_massless_3p1(f, g);
  CHECK(std::abs(p + pair_massless_3p1(g, f)) < 1e-10 * std::abs(p));
  double pm[3];
  const double ms[3] = {0.1, 0.05, 0.025};
  for (int i = 0; i < 3; ++i) pm[i] = radial_mode_sum(f, g, ms[i], 120, 0.01);
  // quadratic fit in m^2 through the three points
  const double x0 = ms[0] * ms[0], x1 = ms[1] * ms[1], x2 = ms[2] * ms[2];
  const double ext = pm[0] * x1 * x2 / ((x0 - x1) * (x0 - x2)) + pm[1] * x0 * x2 / ((x1 - x0) * (x1 - x2)) +
                     pm[2] * x0 * x1 / ((x2 - x0) * (x2 - x1));
  MESSAGE("3+1 pairing " << p << " extrapolated oracle " << ext);
  CHECK(std::abs(p - ext) < 1e-3 * std::abs(ext));
}
