#pragma once
// Real subspaces L of the one-particle space, their modular objects and the
// information functional.
//
// Vectors are stored in real ambient coordinates: lattice Cauchy data (phi, pi)
// for the chain, (Re, Im) for C^n. The complex structure is
// <u, v> = g(u, v) + (i/2) sigma(u, v), with multiplication by i acting as J0.
//
// Modular objects are computed in coordinates s of L + iL adapted to L: the
// element is sum_i (F s)_i b_i for the basis b of L, L is the real s, and the
// inner product is s^dagger (1 + iM) s' with M real antisymmetric. Then
// S s = conj(s), Delta = (1 + iM)^{-1} (1 - iM), log Delta = iN with N real,
// and everything is a function of -M^2 = Q diag(tau^2) Q^T.
// Arithmetic is mpfr, at a precision chosen from the modular spectrum.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qftlab/lattice_model.hpp"
#include "qftlab/precision.hpp"

namespace qftlab {

using mpmat = Eigen::Matrix<mpreal, Eigen::Dynamic, Eigen::Dynamic>;
using mpvec = Eigen::Matrix<mpreal, Eigen::Dynamic, 1>;

struct CMatrix {
  mpmat re, im;
};
struct CVector {
  mpvec re, im;
};

struct NotStandard : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotAFactor : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Region {
  std::vector<int> sites;  // sorted, distinct

  static Region interval(int l, int r);  // inclusive
  static Region of(std::vector<int> sites);
  int size() const { return static_cast<int>(sites.size()); }
  bool contains(const Region& o) const;
};

struct PhaseSpace {
  std::optional<LatticeSpec> lattice;  // otherwise C^n
  int n = 0;                           // complex dimension

  static PhaseSpace of(const LatticeModel& model);
  static PhaseSpace complex(int n);
  int real_dim() const { return 2 * n; }
  // at the current mpfr precision
  mpmat metric() const;
  mpmat sigma() const;
  mpmat complex_structure() const;
};

struct StandardSubspace {
  PhaseSpace space;
  Eigen::MatrixXd basis;         // real_dim x dim
  std::optional<Region> region;  // lattice region: columns are phi then pi unit vectors

  int dim() const { return static_cast<int>(basis.cols()); }
};

StandardSubspace make_subspace(const LatticeModel& model, const Region& region);
StandardSubspace subspace_from_basis(const PhaseSpace& space, const Eigen::MatrixXd& basis);
// real span of the given vectors of C^n (columns)
StandardSubspace subspace_from_complex(const Eigen::MatrixXcd& vectors);
StandardSubspace real_point_subspace(int n);

// sup over g-unit x in A of the g-distance from x to B
double subspace_distance(const StandardSubspace& A, const StandardSubspace& B);
StandardSubspace symplectic_complement(const StandardSubspace& L);

struct ConditionReport {
  int digits = 0;
  double log10_cond = 0;  // condition number of S is exp(max |log Delta|)
  double max_energy = 0;  // max |log Delta|
  bool extended = false;  // cond > 1e10

  std::string flag() const { return extended ? "extended" : "ok"; }
};

struct StandardnessReport {
  int dim = 0;
  int cap_dim = 0;   // dim_R (L cap iL)
  int span_dim = 0;  // dim_R (L + iL)
  int ambient_dim = 0;
  ConditionReport condition;

  bool standard() const { return cap_dim == 0; }
  bool dense() const { return span_dim == ambient_dim; }
};

class ModularData {
 public:
  const StandardSubspace& subspace() const { return L_; }
  int dim() const { return static_cast<int>(tau_.size()); }
  const ConditionReport& condition() const { return cond_; }
  const mpmat& coordinates() const { return F_; }  // y = F s
  const mpmat& M() const { return M_; }
  const mpvec& tau() const { return tau_; }

  // eps_j = 2 artanh tau_j >= 0 per column of Q; Delta has eigenvalues exp(+-eps)
  std::vector<double> energies() const;
  std::vector<double> delta_eigenvalues() const;  // ascending, one per complex dimension

  CMatrix delta_power(double alpha) const;
  mpmat delta_it(double t) const;  // real: Delta^{it} L = L
  CMatrix log_delta() const;
  CVector apply_J(const CVector& s) const;  // conj(Delta^{-1/2} s)
  CVector apply_delta_power(double alpha, const CVector& s) const;

  // coordinates of the orthogonal projection of the ambient vector w onto L + iL
  CVector to_coordinates(const rvec& w) const;
  rvec to_ambient(const CVector& s) const;
  Eigen::MatrixXd to_ambient(const mpmat& re, const mpmat& im) const;  // columnwise

  // f(tau, eps) as Q diag(f) Q^T
  using SpectralFn = std::function<mpreal(const mpreal& tau, const mpreal& eps)>;
  mpmat spectral_function(const SpectralFn& f) const;
  mpmat times_spectral(const mpmat& A, const SpectralFn& f) const;  // A Q diag(f) Q^T
  mpvec apply_spectral(const SpectralFn& f, const mpvec& v) const;
  mpvec apply_N(const mpvec& v) const;

  struct Residuals {
    double jdj = 0;       // |J Delta J - Delta^{-1}|_F
    double s_square = 0;  // |(J Delta^{1/2})^2 - 1|_F
    double max_invariance = 0;
  };
  Residuals residuals(const std::vector<double>& ts = {0.1, 0.5, 1.0}) const;

 private:
  friend struct ModularBuilder;
  StandardSubspace L_;
  ConditionReport cond_;
  mpmat F_, M_, Q_;
  bool q_identity_ = false;
  mpvec tau_, eps_, gamma_;  // gamma = 1 - tau^2
};

struct ModularAnalysis {
  StandardnessReport report;
  std::optional<ModularData> data;  // present iff standard
};

// digits_hint: starting precision, e.g. the digits of a neighbouring region
ModularAnalysis analyze(const StandardSubspace& L, int digits_hint = 0);
StandardnessReport standardness(const StandardSubspace& L);
ModularData tomita(const StandardSubspace& L, int digits_hint = 0);

class CuttingProjection {
 public:
  explicit CuttingProjection(const ModularData& md);

  // range L, kernel L'; acts on coordinates, the result is real
  mpvec apply(const CVector& y) const;
  mpmat matrix() const;  // on (Re y, Im y)

  struct Residuals {
    double idempotent = 0, range = 0, kernel = 0;
  };
  Residuals residuals() const;

 private:
  const ModularData* md_;
  mpmat minv_;
};

// Im <P i log Delta Phi, Phi>, the inner product antilinear in its first slot
double information(const ModularData& md, const CuttingProjection& P, const rvec& w);
double information(const ModularData& md, const rvec& w);
rvec to_ambient(const CauchyData& w);
CauchyData cauchy_from_ambient(const rvec& v);

std::string spectrum_csv(const ModularData& md);

}  // namespace qftlab
