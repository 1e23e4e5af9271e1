#include "qftlab/propagators.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qftlab {

std::string to_string(KernelType k) {
  switch (k) {
    case KernelType::retarded: return "retarded";
    case KernelType::advanced: return "advanced";
    case KernelType::pauli_jordan: return "pauli_jordan";
    case KernelType::dyson_mean: return "dyson_mean";
  }
  return "?";
}

KernelType kernel_type_from_string(const std::string& s) {
  if (s == "retarded") return KernelType::retarded;
  if (s == "advanced") return KernelType::advanced;
  if (s == "pauli_jordan") return KernelType::pauli_jordan;
  if (s == "dyson_mean") return KernelType::dyson_mean;
  throw std::invalid_argument("unknown kernel kind: " + s);
}

namespace {

// retarded kernel strictly inside / outside the forward cone
double retarded_open(double m, double t, double x) {
  const double s2 = t * t - x * x;
  if (t <= 0 || s2 <= 0) return 0.0;
  return m == 0.0 ? -0.5 : -0.5 * std::cyl_bessel_j(0.0, m * std::sqrt(s2));
}

double combine(KernelType k, double r, double a) {
  switch (k) {
    case KernelType::retarded: return r;
    case KernelType::advanced: return a;
    case KernelType::pauli_jordan: return r - a;
    case KernelType::dyson_mean: return 0.5 * (r + a);
  }
  return 0.0;
}

}  // namespace

KernelValue kernel_eval(const KernelKind& kind, double t, double x) {
  if (kind.dim != Dimension::d1p1)
    throw std::invalid_argument("kernel_eval: pointwise values only exist in 1+1; use pair_massless_3p1");
  KernelValue v;
  v.on_lightcone = std::abs(t) == std::abs(x);
  // on the cone J0(0) = 1, so the inner limit is -1/2 and the outer one 0
  const double r = v.on_lightcone ? (t >= 0 ? -0.25 : 0.0) : retarded_open(kind.m, t, x);
  const double a = v.on_lightcone ? (t <= 0 ? -0.25 : 0.0) : retarded_open(kind.m, -t, x);
  v.value = combine(kind.type, r, a);
  return v;
}

// ---- TestFunction ----

TestFunction TestFunction::zeros(const Grid& g) {
  if (!(g.dt > 0) || !(g.dx > 0) || g.nt <= 0 || g.nx <= 0)
    throw std::invalid_argument("TestFunction: grid spacings and sizes must be positive");
  TestFunction f;
  f.grid = g;
  f.values = Eigen::MatrixXd::Zero(g.nt, g.nx);
  return f;
}

void TestFunction::validate() const {
  if (!(grid.dt > 0) || !(grid.dx > 0) || grid.nt <= 0 || grid.nx <= 0)
    throw std::invalid_argument("TestFunction: grid spacings and sizes must be positive");
  if (values.rows() != grid.nt || values.cols() != grid.nx)
    throw std::invalid_argument("TestFunction: sample array does not match the grid");
  if (!support.empty() &&
      (support.it0 < 0 || support.ix0 < 0 || support.it1 >= grid.nt || support.ix1 >= grid.nx))
    throw std::invalid_argument("TestFunction: support box outside grid");
  for (int i = 0; i < grid.nt; ++i)
    for (int j = 0; j < grid.nx; ++j) {
      const bool inside = !support.empty() && i >= support.it0 && i <= support.it1 && j >= support.ix0 &&
                          j <= support.ix1;
      if (!inside && values(i, j) != 0.0)
        throw std::invalid_argument("TestFunction: nonzero sample outside the declared support");
    }
}

void TestFunction::shrink_support() {
  Box b{grid.nt, -1, grid.nx, -1};
  for (int i = 0; i < grid.nt; ++i)
    for (int j = 0; j < grid.nx; ++j)
      if (values(i, j) != 0.0) {
        b.it0 = std::min(b.it0, i);
        b.it1 = std::max(b.it1, i);
        b.ix0 = std::min(b.ix0, j);
        b.ix1 = std::max(b.ix1, j);
      }
  support = b.empty() ? Box{} : b;
}

namespace {

bool same_grid(const Grid& a, const Grid& b) {
  return a.t0 == b.t0 && a.x0 == b.x0 && a.dt == b.dt && a.dx == b.dx && a.nt == b.nt && a.nx == b.nx &&
         a.periodic_x == b.periodic_x;
}

Box box_union(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.it0, b.it0), std::max(a.it1, b.it1), std::min(a.ix0, b.ix0), std::max(a.ix1, b.ix1)};
}

double bump1(double u) { return std::abs(u) < 1 ? std::exp(1 - 1 / (1 - u * u)) : 0.0; }

// integer offset k with a - b = k h, or throw
int cell_offset(double a, double b, double h) {
  const double k = (a - b) / h;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9) throw std::invalid_argument("grids are not aligned");
  return static_cast<int>(r);
}

}  // namespace

TestFunction TestFunction::operator+(const TestFunction& o) const {
  if (!same_grid(grid, o.grid)) throw std::invalid_argument("TestFunction: adding functions on different grids");
  TestFunction r = *this;
  r.values += o.values;
  r.support = box_union(support, o.support);
  return r;
}

TestFunction TestFunction::operator-() const { return *this * -1.0; }

TestFunction TestFunction::operator*(double c) const {
  TestFunction r = *this;
  r.values *= c;
  if (c == 0.0) r.support = Box{};
  return r;
}

TestFunction make_bump(const Grid& g, double tc, double xc, double rt, double rx, double amp) {
  if (!(rt > 0) || !(rx > 0)) throw std::invalid_argument("make_bump: radii must be positive");
  Box b;
  b.it0 = static_cast<int>(std::floor((tc - rt - g.t0) / g.dt)) + 1;
  b.it1 = static_cast<int>(std::ceil((tc + rt - g.t0) / g.dt)) - 1;
  b.ix0 = static_cast<int>(std::floor((xc - rx - g.x0) / g.dx)) + 1;
  b.ix1 = static_cast<int>(std::ceil((xc + rx - g.x0) / g.dx)) - 1;
  TestFunction f = TestFunction::sample(
      g, b, [&](double t, double x) { return amp * bump1((t - tc) / rt) * bump1((x - xc) / rx); });
  f.shrink_support();
  return f;
}

bool grids_compatible(const Grid& a, const Grid& b) {
  auto close = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(std::abs(u), std::abs(v)); };
  if (!close(a.dt, b.dt) || !close(a.dx, b.dx)) return false;
  if (a.periodic_x != b.periodic_x || (a.periodic_x && a.nx != b.nx)) return false;
  try {
    cell_offset(a.t0, b.t0, a.dt);
    cell_offset(a.x0, b.x0, a.dx);
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

double quadrature(const TestFunction& f, const TestFunction& g) {
  if (!grids_compatible(f.grid, g.grid)) throw std::invalid_argument("quadrature: incompatible grids");
  if (f.support.empty() || g.support.empty()) return 0.0;
  const int ot = cell_offset(f.grid.t0, g.grid.t0, f.grid.dt);
  const int ox = cell_offset(f.grid.x0, g.grid.x0, f.grid.dx);
  double acc = 0;
  for (int i = f.support.it0; i <= f.support.it1; ++i) {
    const int ig = i + ot;
    if (ig < g.support.it0 || ig > g.support.it1) continue;
    for (int j = f.support.ix0; j <= f.support.ix1; ++j) {
      const int jg = j + ox;
      if (jg < g.support.ix0 || jg > g.support.ix1) continue;
      acc += f.values(i, j) * g.values(ig, jg);
    }
  }
  return acc * f.grid.dt * f.grid.dx;
}

// ---- CSV with JSON sidecar ----

void write_csv(const TestFunction& f, const std::string& path) {
  f.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,x,value\n";
  char buf[96];
  if (!f.support.empty())
    for (int i = f.support.it0; i <= f.support.it1; ++i)
      for (int j = f.support.ix0; j <= f.support.ix1; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.t(i), f.grid.x(j), f.values(i, j));
        os << buf;
      }
  nlohmann::ordered_json side;
  side["columns"] = {"t", "x", "value"};
  side["t0"] = f.grid.t0;
  side["x0"] = f.grid.x0;
  side["dt"] = f.grid.dt;
  side["dx"] = f.grid.dx;
  side["nt"] = f.grid.nt;
  side["nx"] = f.grid.nx;
  side["periodic_x"] = f.grid.periodic_x;
  side["support"] = {{"it0", f.support.it0}, {"it1", f.support.it1}, {"ix0", f.support.ix0}, {"ix1", f.support.ix1}};
  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("cannot write " + path + ".json");
  js << side.dump(2) << "\n";
}

TestFunction read_csv(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw std::runtime_error("cannot read " + path + ".json");
  nlohmann::json side = nlohmann::json::parse(js);
  Grid g;
  g.t0 = side.at("t0");
  g.x0 = side.at("x0");
  g.dt = side.at("dt");
  g.dx = side.at("dx");
  g.nt = side.at("nt");
  g.nx = side.at("nx");
  g.periodic_x = side.value("periodic_x", false);
  TestFunction f = TestFunction::zeros(g);
  const auto& s = side.at("support");
  f.support = {s.at("it0"), s.at("it1"), s.at("ix0"), s.at("ix1")};

  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(is, line);
  if (line != "t,x,value") throw std::invalid_argument(path + ": expected header t,x,value");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t, x, v;
    char c1, c2;
    if (!(ls >> t >> c1 >> x >> c2 >> v) || c1 != ',' || c2 != ',')
      throw std::invalid_argument(path + ": malformed row: " + line);
    const int i = static_cast<int>(std::lround((t - g.t0) / g.dt));
    const int j = static_cast<int>(std::lround((x - g.x0) / g.dx));
    if (i < 0 || i >= g.nt || j < 0 || j >= g.nx) throw std::invalid_argument(path + ": sample off the grid");
    f.values(i, j) = v;
  }
  f.validate();
  return f;
}

// ---- continuum pairing ----

namespace {

using Gauss8 = boost::math::quadrature::gauss<double, 8>;

// int_{tlo}^{thi} int_{xlo}^{xhi} Delta_R dt dx. The x range is split where the
// inner t-limits max(tlo, |x|) and thi change form, so every piece is smooth.
double retarded_cell_integral(double m, double tlo, double thi, double xlo, double xhi) {
  if (thi <= 0) return 0.0;
  std::vector<double> br{xlo, xhi};
  for (double c : {0.0, tlo, -tlo, thi, -thi})
    if (c > xlo && c < xhi) br.push_back(c);
  std::sort(br.begin(), br.end());
  auto column = [&](double x) {
    const double lo = std::max(tlo, std::abs(x));
    if (lo >= thi) return 0.0;
    if (m == 0.0) return -0.5 * (thi - lo);
    return Gauss8::integrate(
        [&](double t) {
          const double s2 = std::max(t * t - x * x, 0.0);
          return -0.5 * std::cyl_bessel_j(0.0, m * std::sqrt(s2));
        },
        lo, thi);
  };
  double acc = 0;
  for (size_t k = 0; k + 1 < br.size(); ++k)
    if (br[k + 1] > br[k]) acc += Gauss8::integrate(column, br[k], br[k + 1]);
  return acc;
}

// forward-cone component of the displacement-cell value
double retarded_cell(double m, double tc, double xc, double dt, double dx) {
  const double ax = std::abs(xc);
  const double min_abs_x = ax <= dx / 2 ? 0.0 : ax - dx / 2;
  const double max_abs_x = ax + dx / 2;
  const double qmax = tc + dt / 2 - min_abs_x;
  const double qmin = tc - dt / 2 - max_abs_x;
  if (qmax <= 0) return 0.0;
  if (qmin >= 0) return retarded_open(m, tc, xc);
  return retarded_cell_integral(m, tc - dt / 2, tc + dt / 2, xc - dx / 2, xc + dx / 2) / (dt * dx);
}

int fft_size(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// 2D transform in place, rows then columns
void fft2(std::vector<cplx>& a, int h, int w, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<cplx> in(std::max(h, w)), out;
  auto pass = [&](int n, int count, auto at) {
    in.resize(n);
    for (int c = 0; c < count; ++c) {
      for (int k = 0; k < n; ++k) in[k] = at(c, k);
      if (inverse) fft.inv(out, in);
      else fft.fwd(out, in);
      for (int k = 0; k < n; ++k) at(c, k) = out[k];
    }
  };
  pass(w, h, [&](int r, int k) -> cplx& { return a[static_cast<size_t>(r) * w + k]; });
  pass(h, w, [&](int c, int k) -> cplx& { return a[static_cast<size_t>(k) * w + c]; });
}

// C = F * flip(G), the weights of the displacement table; same shape as the table
std::vector<double> support_correlation(const TestFunction& f, const TestFunction& g) {
  const Box& bf = f.support;
  const Box& bg = g.support;
  const int hf = bf.it1 - bf.it0 + 1, wf = bf.ix1 - bf.ix0 + 1;
  const int hg = bg.it1 - bg.it0 + 1, wg = bg.ix1 - bg.ix0 + 1;
  const int h = hf + hg - 1, w = wf + wg - 1;
  const int H = fft_size(h), W = fft_size(w);
  std::vector<cplx> A(static_cast<size_t>(H) * W), B(A.size());
  for (int p = 0; p < hf; ++p)
    for (int u = 0; u < wf; ++u) A[static_cast<size_t>(p) * W + u] = f.values(bf.it0 + p, bf.ix0 + u);
  for (int q = 0; q < hg; ++q)
    for (int v = 0; v < wg; ++v)
      B[static_cast<size_t>(hg - 1 - q) * W + (wg - 1 - v)] = g.values(bg.it0 + q, bg.ix0 + v);
  fft2(A, H, W, false);
  fft2(B, H, W, false);
  for (size_t k = 0; k < A.size(); ++k) A[k] *= B[k];
  fft2(A, H, W, true);
  std::vector<double> c(static_cast<size_t>(h) * w);
  for (int r = 0; r < h; ++r)
    for (int k = 0; k < w; ++k) c[static_cast<size_t>(r) * w + k] = A[static_cast<size_t>(r) * W + k].real();
  return c;
}

}  // namespace

double pairing(const TestFunction& f, const TestFunction& g, const KernelKind& kind) {
  if (kind.dim != Dimension::d1p1) throw std::invalid_argument("pairing: 1+1 kernels only");
  if (!grids_compatible(f.grid, g.grid)) throw std::invalid_argument("pairing: incompatible grids");
  if (f.support.empty() || g.support.empty()) return 0.0;
  const double dt = f.grid.dt, dx = f.grid.dx;
  const int ot = cell_offset(f.grid.t0, g.grid.t0, dt);
  const int ox = cell_offset(f.grid.x0, g.grid.x0, dx);
  const Box& bf = f.support;
  const Box& bg = g.support;
  // displacement index (i_f - i_g + ot, j_f - j_g + ox)
  const int di0 = bf.it0 - bg.it1 + ot, di1 = bf.it1 - bg.it0 + ot;
  const int dj0 = bf.ix0 - bg.ix1 + ox, dj1 = bf.ix1 - bg.ix0 + ox;
  const int wj = dj1 - dj0 + 1;
  std::vector<double> table(static_cast<size_t>(di1 - di0 + 1) * wj);
  for (int di = di0; di <= di1; ++di)
    for (int dj = dj0; dj <= dj1; ++dj) {
      const double tc = di * dt, xc = dj * dx;
      const double r = retarded_cell(kind.m, tc, xc, dt, dx);
      const double a = retarded_cell(kind.m, -tc, xc, dt, dx);
      table[static_cast<size_t>(di - di0) * wj + (dj - dj0)] = combine(kind.type, r, a);
    }
  const double scale = (dt * dx) * (dt * dx);
  // large supports: contract the table with the FFT correlation of the supports
  const double work = double(bf.it1 - bf.it0 + 1) * (bf.ix1 - bf.ix0 + 1) * (bg.it1 - bg.it0 + 1) *
                      (bg.ix1 - bg.ix0 + 1);
  if (work > 2e8) {
    const std::vector<double> c = support_correlation(f, g);
    double acc = 0;
    for (size_t k = 0; k < c.size(); ++k) acc += table[k] * c[k];
    return acc * scale;
  }
  // fixed summation order: deterministic
  double acc = 0;
  for (int i = bf.it0; i <= bf.it1; ++i)
    for (int j = bf.ix0; j <= bf.ix1; ++j) {
      const double fv = f.values(i, j);
      if (fv == 0.0) continue;
      double inner = 0;
      for (int ig = bg.it0; ig <= bg.it1; ++ig) {
        const double* row = &table[static_cast<size_t>(i - ig + ot - di0) * wj];
        const int base = j + ox - dj0;
        for (int jg = bg.ix0; jg <= bg.ix1; ++jg) inner += g.values(ig, jg) * row[base - jg];
      }
      acc += fv * inner;
    }
  return acc * scale;
}

TestFunction kg_apply(const TestFunction& f, double m) {
  f.validate();
  TestFunction r = TestFunction::zeros(f.grid);
  if (f.support.empty()) return r;
  const Box& b = f.support;
  const Grid& g = f.grid;
  // periodic grids wrap in x and need no spatial margin
  const bool px = g.periodic_x;
  if (b.it0 < 4 || b.it1 > g.nt - 5 || (!px && (b.ix0 < 4 || b.ix1 > g.nx - 5)))
    throw std::invalid_argument("kg_apply: test function needs 4 grid points of margin around its support");
  const double it2 = 1 / (g.dt * g.dt), ix2 = 1 / (g.dx * g.dx), m2 = m * m;
  const Eigen::MatrixXd& v = f.values;
  const int n = g.nx;
  const bool full = px && (b.ix0 < 1 || b.ix1 > n - 2);
  const int j0 = full ? 0 : b.ix0 - 1, j1 = full ? n - 1 : b.ix1 + 1;
  for (int i = b.it0 - 1; i <= b.it1 + 1; ++i)
    for (int j = j0; j <= j1; ++j) {
      const int jl = j == 0 ? (px ? n - 1 : 0) : j - 1;
      const int jr = j == n - 1 ? (px ? 0 : n - 1) : j + 1;
      r.values(i, j) = (v(i + 1, j) - 2 * v(i, j) + v(i - 1, j)) * it2 -
                       (v(i, jr) - 2 * v(i, j) + v(i, jl)) * ix2 + m2 * v(i, j);
    }
  r.support = {b.it0 - 1, b.it1 + 1, j0, j1};
  return r;
}

// ---- lattice counterparts ----

Grid lattice_grid(const LatticeModel& model, double dt, int n_begin, int nt) {
  // leapfrog is stable iff w_max dt < 2 for every lattice mode
  if (!(dt > 0) || !(model.omega().maxCoeff() * dt < 2.0))
    throw std::invalid_argument("lattice_grid: time step beyond the leapfrog stability limit");
  Grid g;
  g.dt = dt;
  g.t0 = n_begin * dt;
  g.dx = model.a();
  g.x0 = model.position(0);
  g.nt = nt;
  g.nx = model.N();
  g.periodic_x = true;
  return g;
}

bool on_lattice_grid(const TestFunction& f, const LatticeModel& model) {
  const Grid& g = f.grid;
  if (!g.periodic_x || g.nx != model.N()) return false;
  if (std::abs(g.dx - model.a()) > 1e-12 * model.a()) return false;
  if (std::abs(g.x0 - model.position(0)) > 1e-9 * model.a()) return false;
  const double k = g.t0 / g.dt;
  return std::abs(k - std::round(k)) < 1e-9 && model.omega().maxCoeff() * g.dt < 2.0;
}

int time_index(const Grid& g, int i) { return static_cast<int>(std::lround(g.t0 / g.dt)) + i; }

TestFunction to_lattice_window(const TestFunction& f, const LatticeModel& model, int n_lo, int n_hi) {
  if (!on_lattice_grid(f, model)) throw std::invalid_argument("to_lattice_window: not a lattice grid");
  TestFunction r = TestFunction::zeros(lattice_grid(model, f.grid.dt, n_lo, n_hi - n_lo + 1));
  if (f.support.empty()) return r;
  const int base = time_index(f.grid, 0);
  if (base + f.support.it0 < n_lo || base + f.support.it1 > n_hi)
    throw std::invalid_argument("to_lattice_window: support outside the window");
  for (int i = f.support.it0; i <= f.support.it1; ++i) r.values.row(base + i - n_lo) = f.values.row(i);
  r.support = f.support;
  r.support.it0 += base - n_lo;
  r.support.it1 += base - n_lo;
  return r;
}

namespace {

// (-D_xx + m^2) u on the periodic lattice
void apply_spatial(const rvec& u, double a, double m2, rvec& out) {
  const int n = static_cast<int>(u.size());
  const double ia2 = 1 / (a * a);
  for (int j = 0; j < n; ++j) {
    const double l = u[j == 0 ? n - 1 : j - 1], r = u[j == n - 1 ? 0 : j + 1];
    out[j] = -(l - 2 * u[j] + r) * ia2 + m2 * u[j];
  }
}

// Rows n_lo..n_hi of the retarded (forward = true) or advanced solution of P_h u = -f.
std::vector<rvec> march(const TestFunction& f, const LatticeModel& model, int n_lo, int n_hi, bool forward) {
  const int n = model.N();
  const double dt2 = f.grid.dt * f.grid.dt;
  std::vector<rvec> out(n_hi - n_lo + 1, rvec::Zero(n));
  if (f.support.empty()) return out;
  const int base = time_index(f.grid, 0);
  const int s0 = base + f.support.it0, s1 = base + f.support.it1;
  auto source = [&](int m, rvec& acc) {
    const int i = m - base;
    if (i >= f.support.it0 && i <= f.support.it1) acc += f.values.row(i).transpose();
  };
  rvec prev = rvec::Zero(n), cur = rvec::Zero(n), next(n), lap(n);
  if (forward) {
    // u = 0 for m <= s0
    for (int m = s0; m < n_hi; ++m) {
      apply_spatial(cur, model.a(), model.mass2(), lap);
      source(m, lap);
      next = 2 * cur - prev - dt2 * lap;
      prev.swap(cur);
      cur.swap(next);
      if (m + 1 >= n_lo) out[m + 1 - n_lo] = cur;
    }
  } else {
    for (int m = s1; m > n_lo; --m) {
      apply_spatial(cur, model.a(), model.mass2(), lap);
      source(m, lap);
      next = 2 * cur - prev - dt2 * lap;
      prev.swap(cur);
      cur.swap(next);
      if (m - 1 <= n_hi) out[m - 1 - n_lo] = cur;
    }
  }
  return out;
}

}  // namespace

TestFunction lattice_green_apply(const TestFunction& f, KernelType kind, const LatticeModel& model, int n_lo,
                                 int n_hi) {
  if (!on_lattice_grid(f, model)) throw std::invalid_argument("lattice_green_apply: not a lattice grid");
  if (n_hi < n_lo) throw std::invalid_argument("lattice_green_apply: empty window");
  std::vector<rvec> r, a;
  if (kind != KernelType::advanced) r = march(f, model, n_lo, n_hi, true);
  if (kind != KernelType::retarded) a = march(f, model, n_lo, n_hi, false);
  TestFunction u = TestFunction::zeros(lattice_grid(model, f.grid.dt, n_lo, n_hi - n_lo + 1));
  for (int i = 0; i <= n_hi - n_lo; ++i) {
    switch (kind) {
      case KernelType::retarded: u.values.row(i) = r[i].transpose(); break;
      case KernelType::advanced: u.values.row(i) = a[i].transpose(); break;
      case KernelType::pauli_jordan: u.values.row(i) = (r[i] - a[i]).transpose(); break;
      case KernelType::dyson_mean: u.values.row(i) = (0.5 * (r[i] + a[i])).transpose(); break;
    }
  }
  u.shrink_support();
  return u;
}

double lattice_pairing(const TestFunction& f, const TestFunction& g, KernelType kind,
                       const LatticeModel& model) {
  if (!on_lattice_grid(f, model) || !on_lattice_grid(g, model) || !grids_compatible(f.grid, g.grid))
    throw std::invalid_argument("lattice_pairing: both functions must live on the same lattice grid");
  if (f.support.empty() || g.support.empty()) return 0.0;
  const int base = time_index(f.grid, 0);
  const int n_lo = base + f.support.it0, n_hi = base + f.support.it1;
  TestFunction u = lattice_green_apply(g, kind, model, n_lo, n_hi);
  double acc = 0;
  for (int i = f.support.it0; i <= f.support.it1; ++i)
    acc += f.values.row(i).dot(u.values.row(base + i - n_lo));
  return acc * f.grid.dt * model.a();
}

CauchyData lattice_wave(const TestFunction& f, const LatticeModel& model) {
  TestFunction u = lattice_green_apply(f, KernelType::pauli_jordan, model, -1, 1);
  CauchyData w;
  w.phi = u.values.row(1).transpose();
  w.pi = (u.values.row(2) - u.values.row(0)).transpose() / (2 * f.grid.dt);
  return w;
}

// ---- mode sums ----

double sine_integral(double x) {
  if (x < 0) return -sine_integral(-x);
  if (x <= 4) {
    double term = x, acc = x;
    for (int n = 1; n < 40; ++n) {
      term *= -x * x / ((2.0 * n) * (2.0 * n + 1));
      const double add = term / (2 * n + 1);
      acc += add;
      if (std::abs(add) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
  }
  if (x <= 48) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double acc = sine_integral(4.0);
    const int pieces = static_cast<int>(std::ceil((x - 4) / 2));
    const double h = (x - 4) / pieces;
    for (int k = 0; k < pieces; ++k)
      acc += GK::integrate([](double t) { return std::sin(t) / t; }, 4 + k * h, 4 + (k + 1) * h, 0, 1e-15);
    return acc;
  }
  // pi/2 - f cos x - g sin x, asymptotic auxiliary functions
  const double ix2 = 1 / (x * x);
  const double fa = (1 - 2 * ix2 * (1 - 12 * ix2 * (1 - 30 * ix2))) / x;
  const double ga = ix2 * (1 - 6 * ix2 * (1 - 20 * ix2 * (1 - 42 * ix2)));
  return M_PI / 2 - fa * std::cos(x) - ga * std::sin(x);
}

double mode_sum_pauli_jordan(double t, double x, double m, int N, double a, bool continuum_dispersion) {
  long double acc = 0;
  for (int j = 0; j < N; ++j) {
    const int jj = j <= N / 2 ? j : j - N;
    const double k = 2 * M_PI * jj / (N * a);
    const double s = std::sin(k * a / 2);
    const double w = continuum_dispersion ? std::sqrt(m * m + k * k) : std::sqrt(m * m + 4 * s * s / (a * a));
    const double swt = w == 0.0 ? t : std::sin(w * t) / w;
    acc += swt * std::cos(k * x);
  }
  double v = -static_cast<double>(acc) / (N * a);
  if (continuum_dispersion) {
    // massless tail -(1/2pi) int_{|k| > K} sin(k t) cos(k x)/k dk
    const double K = M_PI / a;
    for (double al : {t + x, t - x})
      if (al != 0.0) v -= (al > 0 ? 1 : -1) * (M_PI / 2 - sine_integral(K * std::abs(al))) / (2 * M_PI);
  }
  return v;
}

// ---- 3+1 radial ----

RadialFunction make_radial_bump(double t0, double dt, int nt, double dr, int nr, double tc, double rc, double wt,
                                double wr, double amp) {
  if (!(dt > 0) || !(dr > 0) || nt <= 0 || nr <= 0) throw std::invalid_argument("radial grid must be positive");
  RadialFunction f;
  f.t0 = t0;
  f.dt = dt;
  f.dr = dr;
  f.nt = nt;
  f.nr = nr;
  f.values = Eigen::MatrixXd::Zero(nt, nr);
  Box b{nt, -1, nr, -1};
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nr; ++j) {
      const double v = amp * bump1((f.t(i) - tc) / wt) * bump1((f.r(j) - rc) / wr);
      if (v == 0.0) continue;
      if (i == 0 || j == nr - 1 || i == nt - 1) throw std::invalid_argument("radial bump leaves its grid");
      f.values(i, j) = v;
      b = {std::min(b.it0, i), std::max(b.it1, i), std::min(b.ix0, j), std::max(b.ix1, j)};
    }
  f.support = b.empty() ? Box{} : b;
  return f;
}

namespace {

void check_radial(const RadialFunction& f) {
  if (!(f.dt > 0) || !(f.dr > 0) || f.values.rows() != f.nt || f.values.cols() != f.nr)
    throw std::invalid_argument("radial function: malformed grid");
}

// G(tau, j) = int_{-inf}^{tau} g(s, r_j) ds of the piecewise-linear interpolant
struct Cumulative {
  const RadialFunction& g;
  Eigen::MatrixXd c;  // c(i, j) = G(t_i, j)
  explicit Cumulative(const RadialFunction& gg) : g(gg), c(Eigen::MatrixXd::Zero(gg.nt, gg.nr)) {
    for (int j = 0; j < g.nr; ++j)
      for (int i = 1; i < g.nt; ++i) c(i, j) = c(i - 1, j) + 0.5 * g.dt * (g.values(i - 1, j) + g.values(i, j));
  }
  double operator()(double tau, int j) const {
    const double u = (tau - g.t0) / g.dt;
    if (u <= 0) return 0.0;
    if (u >= g.nt - 1) return c(g.nt - 1, j);
    const int i = static_cast<int>(u);
    const double s = (u - i) * g.dt;
    const double g0 = g.values(i, j), g1 = g.values(i + 1, j);
    return c(i, j) + g0 * s + (g1 - g0) * s * s / (2 * g.dt);
  }
};

}  // namespace

bool cone_shadows_disjoint(const RadialFunction& f, const RadialFunction& g) {
  check_radial(f);
  check_radial(g);
  if (f.support.empty() || g.support.empty()) return true;
  // one time cell of slack on each side: the interpolant of g is nonzero there
  const double slack = g.dt;
  for (int i1 = f.support.it0; i1 <= f.support.it1; ++i1)
    for (int j1 = f.support.ix0; j1 <= f.support.ix1; ++j1)
      for (int i2 = g.support.it0; i2 <= g.support.it1; ++i2)
        for (int j2 = g.support.ix0; j2 <= g.support.ix1; ++j2) {
          const double T = std::abs(f.t(i1) - g.t(i2));
          const double r1 = f.r(j1), r2 = g.r(j2);
          if (T + slack >= std::abs(r1 - r2) && T - slack <= r1 + r2) return false;
        }
  return true;
}

double pair_massless_3p1(const RadialFunction& f, const RadialFunction& g) {
  check_radial(f);
  check_radial(g);
  if (f.support.empty() || g.support.empty()) return 0.0;
  if (cone_shadows_disjoint(f, g)) return 0.0;
  const Cumulative G(g);
  double acc = 0;
  for (int i1 = f.support.it0; i1 <= f.support.it1; ++i1) {
    const double t1 = f.t(i1);
    for (int j1 = f.support.ix0; j1 <= f.support.ix1; ++j1) {
      const double fv = f.values(i1, j1);
      const double r1 = f.r(j1);
      if (fv == 0.0 || r1 == 0.0) continue;
      double inner = 0;
      for (int j2 = g.support.ix0; j2 <= g.support.ix1; ++j2) {
        const double r2 = g.r(j2);
        if (r2 == 0.0) continue;
        const double D = std::abs(r1 - r2), S = r1 + r2;
        // retarded part: t2 in [t1 - S, t1 - D]; advanced part: t2 in [t1 + D, t1 + S]
        const double w = (G(t1 - D, j2) - G(t1 - S, j2)) - (G(t1 + S, j2) - G(t1 + D, j2));
        inner += r2 * w;
      }
      acc += fv * r1 * inner;
    }
  }
  return -2 * M_PI * acc * f.dt * f.dr * g.dr;
}

}  // namespace qftlab
