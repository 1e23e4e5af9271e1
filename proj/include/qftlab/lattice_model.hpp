#pragma once
// Periodic 1+1 lattice Klein-Gordon field at the one-particle level.
//
// Conventions (used by every module):
//   site n sits at x_n = (n - N/2) a  (integer division), momenta k_j = 2 pi j / (N a)
//   mode transform  f^_k = N^{-1/2} sum_n exp(-i k x_n) f_n   (unitary)
//   embed           z_k = sqrt(a/2) (w^{1/2} phi^_k + i w^{-1/2} pi^_k)
//   inner product   <z1, z2> = sum conj(z1) z2, so Im<embed w1, embed w2> = sigma(w1, w2)/2
//   U(t, s) z_k = exp(i (w_k t - k s a)) z_k

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "qftlab/precision.hpp"

namespace qftlab {

using cplx = std::complex<double>;
using rvec = Eigen::VectorXd;
using cvec = Eigen::VectorXcd;

struct LatticeSpec {
  int N = 0;
  double a = 1.0;
  double m = 0.0;
  std::optional<double> mu;  // infrared regulator, only used when m == 0
};

// Fills in mu = 1e-3/a for a massless spec without one.
LatticeSpec with_default_regulator(LatticeSpec s);

struct CauchyData {
  rvec phi;
  rvec pi;

  static CauchyData zeros(int n) { return {rvec::Zero(n), rvec::Zero(n)}; }
  int size() const { return static_cast<int>(phi.size()); }
  double norm() const { return std::sqrt(phi.squaredNorm() + pi.squaredNorm()); }
  CauchyData operator+(const CauchyData& o) const { return {phi + o.phi, pi + o.pi}; }
  CauchyData operator-(const CauchyData& o) const { return {phi - o.phi, pi - o.pi}; }
  CauchyData operator-() const { return {-phi, -pi}; }
  CauchyData operator*(double c) const { return {c * phi, c * pi}; }
};

// sigma(w1, w2) = a sum (phi1 pi2 - pi1 phi2)
double symplectic_form(const CauchyData& w1, const CauchyData& w2, double a);

struct Translation {
  double t = 0.0;
  int s = 0;
  // closed cone t >= |s a|; the lightlike boundary can be excluded
  bool in_future_cone(double a, bool allow_lightlike = true) const;
  Translation operator+(const Translation& o) const { return {t + o.t, s + o.s}; }
  Translation operator-(const Translation& o) const { return {t - o.t, s - o.s}; }
};

class LatticeModel {
 public:
  explicit LatticeModel(const LatticeSpec& spec);

  const LatticeSpec& spec() const { return spec_; }
  int N() const { return spec_.N; }
  double a() const { return spec_.a; }
  double mass2() const { return mass2_; }  // m^2, or mu^2 for the regulated massless chain
  const rvec& omega() const { return omega_; }
  const rvec& momenta() const { return k_; }
  double position(int n) const { return (n - spec_.N / 2) * spec_.a; }
  int origin_site() const { return spec_.N / 2; }

  cvec to_modes(const rvec& f) const;
  cvec to_modes(const cvec& f) const;
  cvec from_modes(const cvec& fk) const;
  // Real part of from_modes; exact for Hermitian-symmetric mode vectors.
  rvec from_modes_real(const cvec& fk) const;

  // First row c(d), d = 0..N-1, of the circulant operator with eigenvalues w_k^power.
  template <class Real>
  std::vector<Real> omega_row(int power) const;

 private:
  LatticeSpec spec_;
  double mass2_;
  rvec omega_;
  rvec k_;
};

LatticeModel build_model(const LatticeSpec& spec);

cvec embed(const LatticeModel& model, const CauchyData& w);
CauchyData unembed(const LatticeModel& model, const cvec& z);
cvec time_evolve(const LatticeModel& model, const cvec& z, const Translation& tau);

// Spectral solution of the lattice KG equation: data at time 0 -> data at time t.
CauchyData evolve_classical(const LatticeModel& model, const CauchyData& w, double t);
// (T_s w)_n = w_{n-s}
CauchyData shift_data(const CauchyData& w, int s);

// A one-particle translation operator, stored as its diagonal in the mode basis.
struct ModeOperator {
  cvec phases;
  cvec apply(const cvec& z) const { return phases.cwiseProduct(z); }
  ModeOperator operator*(const ModeOperator& o) const { return {phases.cwiseProduct(o.phases)}; }
  double distance(const ModeOperator& o) const { return (phases - o.phases).cwiseAbs().maxCoeff(); }
};

ModeOperator translation_operator(const LatticeModel& model, const Translation& tau);

struct Decomposition {
  Translation plus;   // tau_1
  Translation minus;  // tau_2
};

// U(x) = U0(tau_1) U0(tau_2)^{-1}, checked across all supplied decompositions.
ModeOperator extend_semigroup(const LatticeModel& model, const Translation& x,
                              const std::vector<Decomposition>& decompositions, double tol = 1e-10,
                              bool allow_lightlike = true);

struct SpectrumReport {
  double min_omega = 0;
  double max_omega = 0;
  double gap = 0;
  double max_formula_error = 0;  // table vs. direct evaluation of the dispersion
  int below_momentum = 0;        // modes with w_k < |k| (lattice artefact, informational)
  bool pass = false;
};

SpectrumReport energy_spectrum_check(const LatticeModel& model);

// ---- template implementation ----

template <class Real>
std::vector<Real> LatticeModel::omega_row(int power) const {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const int n = spec_.N;
  const Real pi = boost::math::constants::pi<Real>();
  const Real a = Real(spec_.a);
  const Real m2 = Real(mass2_);
  std::vector<Real> w(n), c(n);
  for (int j = 0; j < n; ++j) {
    Real s = sin(pi * j / n);
    Real om = sqrt(m2 + 4 * s * s / (a * a));
    w[j] = power == 1 ? om : (power == -1 ? 1 / om : pow(om, power));
    c[j] = cos(2 * pi * j / n);
  }
  std::vector<Real> row(n);
  for (int d = 0; d < n; ++d) {
    Real acc = 0;
    for (int j = 0; j < n; ++j) acc += w[j] * c[(static_cast<long>(j) * d) % n];
    row[d] = acc / n;
  }
  return row;
}

template <>
inline std::vector<double> LatticeModel::omega_row<double>(int power) const {
  const int n = spec_.N;
  std::vector<double> c(n);
  for (int j = 0; j < n; ++j) c[j] = std::cos(2 * M_PI * j / n);
  std::vector<double> row(n);
  for (int d = 0; d < n; ++d) {
    long double acc = 0;
    for (int j = 0; j < n; ++j) acc += std::pow(omega_[j], power) * c[(static_cast<long>(j) * d) % n];
    row[d] = static_cast<double>(acc / n);
  }
  return row;
}

}  // namespace qftlab
