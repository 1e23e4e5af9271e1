#include "qftlab/standard_subspace.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qftlab {

namespace {

constexpr int kMinDigits = 50;
constexpr int kMaxDigits = 3200;
// Delta eigenvalues within 1e-12 of 1 count as exactly 1
constexpr double kUnitEnergy = 1e-12;

mpreal ten_pow(int e) { return pow(mpreal(10), e); }

double frobenius(const mpmat& a) { return a.size() ? to_double(sqrt(a.squaredNorm())) : 0.0; }

// circulant c((i - j) mod N) restricted to rows ri, columns cj
mpmat circulant(const std::vector<mpreal>& row, const std::vector<int>& ri, const std::vector<int>& cj) {
  const int n = static_cast<int>(row.size());
  mpmat c(ri.size(), cj.size());
  for (size_t i = 0; i < ri.size(); ++i)
    for (size_t j = 0; j < cj.size(); ++j) c(i, j) = row[((ri[i] - cj[j]) % n + n) % n];
  return c;
}

std::vector<int> all_sites(int n) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = i;
  return s;
}

mpvec circulant_apply(const std::vector<mpreal>& row, const mpvec& v) {
  const int n = static_cast<int>(row.size());
  mpvec out(n);
  for (int i = 0; i < n; ++i) {
    mpreal acc = 0;
    for (int j = 0; j < n; ++j) acc += row[((i - j) % n + n) % n] * v(j);
    out(i) = acc;
  }
  return out;
}

struct Rows {
  std::vector<mpreal> w, wi;
};

Rows omega_rows(const LatticeSpec& spec) {
  const LatticeModel model = build_model(spec);
  return {model.omega_row<mpreal>(1), model.omega_row<mpreal>(-1)};
}

mpvec apply_metric(const PhaseSpace& sp, const mpvec& v) {
  if (!sp.lattice) return v;
  const int n = sp.n;
  const Rows r = omega_rows(*sp.lattice);
  const mpreal half_a = mpreal(sp.lattice->a) / 2;
  mpvec out(2 * n);
  out.head(n) = half_a * circulant_apply(r.w, v.head(n));
  out.tail(n) = half_a * circulant_apply(r.wi, v.tail(n));
  return out;
}

mpvec apply_sigma(const PhaseSpace& sp, const mpvec& v) {
  const int n = sp.n;
  const mpreal c = sp.lattice ? mpreal(sp.lattice->a) : mpreal(2);
  mpvec out(2 * n);
  out.head(n) = c * v.tail(n);
  out.tail(n) = -c * v.head(n);
  return out;
}

// J0 on each column
mpmat apply_J0(const PhaseSpace& sp, const mpmat& v) {
  const int n = sp.n;
  mpmat out(2 * n, v.cols());
  if (!sp.lattice) {
    out.topRows(n) = -v.bottomRows(n);
    out.bottomRows(n) = v.topRows(n);
    return out;
  }
  const Rows r = omega_rows(*sp.lattice);
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    out.col(c).head(n) = -circulant_apply(r.wi, v.col(c).tail(n));
    out.col(c).tail(n) = circulant_apply(r.w, v.col(c).head(n));
  }
  return out;
}

Eigen::MatrixXd metric_double(const PhaseSpace& sp) {
  PrecisionScope ps(30);
  return sp.metric().unaryExpr([](const mpreal& x) { return to_double(x); });
}

mpmat to_mp(const Eigen::MatrixXd& m) { return m.cast<mpreal>(); }

}  // namespace

// ---- regions and phase spaces ----

Region Region::interval(int l, int r) {
  if (r < l) throw std::invalid_argument("region: empty interval [" + std::to_string(l) + ", " + std::to_string(r) + "]");
  Region g;
  for (int n = l; n <= r; ++n) g.sites.push_back(n);
  return g;
}

Region Region::of(std::vector<int> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (sites.empty()) throw std::invalid_argument("region: empty site set");
  return {sites};
}

bool Region::contains(const Region& o) const {
  return std::includes(sites.begin(), sites.end(), o.sites.begin(), o.sites.end());
}

PhaseSpace PhaseSpace::of(const LatticeModel& model) { return {model.spec(), model.N()}; }

PhaseSpace PhaseSpace::complex(int n) { return {std::nullopt, n}; }

mpmat PhaseSpace::metric() const {
  if (!lattice) return mpmat::Identity(2 * n, 2 * n);
  const Rows r = omega_rows(*lattice);
  const auto s = all_sites(n);
  mpmat g = mpmat::Zero(2 * n, 2 * n);
  const mpreal half_a = mpreal(lattice->a) / 2;
  g.topLeftCorner(n, n) = half_a * circulant(r.w, s, s);
  g.bottomRightCorner(n, n) = half_a * circulant(r.wi, s, s);
  return g;
}

mpmat PhaseSpace::sigma() const {
  const mpreal c = lattice ? mpreal(lattice->a) : mpreal(2);
  mpmat s = mpmat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    s(i, n + i) = c;
    s(n + i, i) = -c;
  }
  return s;
}

mpmat PhaseSpace::complex_structure() const {
  mpmat j = mpmat::Zero(2 * n, 2 * n);
  if (!lattice) {
    for (int i = 0; i < n; ++i) {
      j(i, n + i) = -1;
      j(n + i, i) = 1;
    }
    return j;
  }
  const Rows r = omega_rows(*lattice);
  const auto s = all_sites(n);
  j.topRightCorner(n, n) = -circulant(r.wi, s, s);
  j.bottomLeftCorner(n, n) = circulant(r.w, s, s);
  return j;
}

// ---- subspaces ----

StandardSubspace make_subspace(const LatticeModel& model, const Region& region) {
  if (region.sites.empty()) throw std::invalid_argument("make_subspace: empty region");
  const int N = model.N();
  for (int n : region.sites)
    if (n < 0 || n >= N) throw std::invalid_argument("make_subspace: site " + std::to_string(n) + " outside the lattice");
  if (!std::is_sorted(region.sites.begin(), region.sites.end()) ||
      std::adjacent_find(region.sites.begin(), region.sites.end()) != region.sites.end())
    throw std::invalid_argument("make_subspace: region sites must be sorted and distinct");
  const int k = region.size();
  StandardSubspace L{PhaseSpace::of(model), Eigen::MatrixXd::Zero(2 * N, 2 * k), region};
  for (int j = 0; j < k; ++j) {
    L.basis(region.sites[j], j) = 1;
    L.basis(N + region.sites[j], k + j) = 1;
  }
  return L;
}

StandardSubspace subspace_from_basis(const PhaseSpace& space, const Eigen::MatrixXd& basis) {
  if (basis.rows() != space.real_dim())
    throw std::invalid_argument("subspace_from_basis: basis has " + std::to_string(basis.rows()) + " rows, expected " +
                                std::to_string(space.real_dim()));
  if (basis.cols() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
      throw std::invalid_argument("subspace_from_basis: basis is not linearly independent over R");
  }
  return {space, basis, std::nullopt};
}

StandardSubspace subspace_from_complex(const Eigen::MatrixXcd& vectors) {
  const int n = static_cast<int>(vectors.rows());
  Eigen::MatrixXd b(2 * n, vectors.cols());
  b.topRows(n) = vectors.real();
  b.bottomRows(n) = vectors.imag();
  return subspace_from_basis(PhaseSpace::complex(n), b);
}

StandardSubspace real_point_subspace(int n) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, n);
  b.topRows(n).setIdentity();
  return subspace_from_basis(PhaseSpace::complex(n), b);
}

double subspace_distance(const StandardSubspace& A, const StandardSubspace& B) {
  if (A.space.real_dim() != B.space.real_dim()) throw std::invalid_argument("subspace_distance: different spaces");
  if (A.dim() == 0) return 0.0;
  if (B.dim() == 0) return 1.0;
  const Eigen::MatrixXd g = metric_double(A.space);
  auto orthonormal = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
    const Eigen::MatrixXd gram = X.transpose() * g * X;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    return llt.matrixL().solve(X.transpose()).transpose();
  };
  const Eigen::MatrixXd qa = orthonormal(A.basis), qb = orthonormal(B.basis);
  const Eigen::MatrixXd r = qa - qb * (qb.transpose() * g * qa);
  const Eigen::MatrixXd e = r.transpose() * g * r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (e + e.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

StandardSubspace symplectic_complement(const StandardSubspace& L) {
  const int n2 = L.space.real_dim();
  if (L.dim() == 0) return subspace_from_basis(L.space, Eigen::MatrixXd::Identity(n2, n2));
  Eigen::MatrixXd s;
  {
    PrecisionScope ps(30);
    s = L.space.sigma().unaryExpr([](const mpreal& x) { return to_double(x); });
  }
  const Eigen::MatrixXd c = L.basis.transpose() * s;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  return subspace_from_basis(L.space, svd.matrixV().rightCols(n2 - rank));
}

rvec to_ambient(const CauchyData& w) {
  rvec v(2 * w.size());
  v << w.phi, w.pi;
  return v;
}

CauchyData cauchy_from_ambient(const rvec& v) {
  const Eigen::Index n = v.size() / 2;
  return {v.head(n), v.tail(n)};
}

// ---- spectral decomposition ----

struct ModularBuilder {
  struct Spectral {
    int digits = 0;
    mpmat F, M, Q;
    bool q_identity = false;
    mpvec tau, gamma;
  };

  // Lattice region: with W = omega_RR, V = (omega^{-1})_RR = R R^T and
  // R^T W R = O diag(lambda) O^T, the modes decouple in pairs with tau = lambda^{-1/2}.
  static Spectral region_route(const StandardSubspace& L, int digits) {
    PrecisionScope ps(digits);
    const LatticeSpec& spec = *L.space.lattice;
    const Rows r = omega_rows(spec);
    const auto& s = L.region->sites;
    const int k = static_cast<int>(s.size()), d = 2 * k;
    const mpmat W = circulant(r.w, s, s), V = circulant(r.wi, s, s);
    Eigen::LLT<mpmat> llt(V);
    if (llt.info() != Eigen::Success) throw IllConditioned("region metric is not positive definite");
    const mpmat R = llt.matrixL();
    mpmat K = R.transpose() * W * R;
    K = (K + K.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<mpmat> es(K);
    const mpmat X = R * es.eigenvectors();
    const mpmat Y = R.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());

    Spectral sp;
    sp.digits = digits;
    sp.q_identity = true;
    sp.F = mpmat::Zero(d, d);
    sp.M = mpmat::Zero(d, d);
    sp.tau.resize(d);
    sp.gamma.resize(d);
    const mpreal a = spec.a;
    for (int j = 0; j < k; ++j) {
      const mpreal lam = std::max(es.eigenvalues()(j), mpreal(1));
      const mpreal nu = sqrt(lam), q4 = sqrt(nu), c = sqrt(2 / (a * nu));
      sp.F.block(0, j, k, 1) = X.col(j) * (c / q4);
      sp.F.block(k, k + j, k, 1) = Y.col(j) * (c * q4);
      sp.M(j, k + j) = 1 / nu;
      sp.M(k + j, j) = -1 / nu;
      sp.tau(j) = sp.tau(k + j) = 1 / nu;
      sp.gamma(j) = sp.gamma(k + j) = (lam - 1) / lam;
    }
    return sp;
  }

  // Any basis: Gram A + iC, A = L L^T, M = L^{-1} C L^{-T}.
  static Spectral generic_route(const StandardSubspace& L, int digits) {
    PrecisionScope ps(digits);
    const int d = L.dim();
    const mpmat B = to_mp(L.basis);
    mpmat A = B.transpose() * L.space.metric() * B;
    mpmat C = B.transpose() * L.space.sigma() * B / 2;
    A = (A + A.transpose()) / 2;
    C = (C - C.transpose()) / 2;
    Eigen::LLT<mpmat> llt(A);
    if (llt.info() != Eigen::Success) throw IllConditioned("Gram matrix of L is not positive definite");
    const mpmat Linv = llt.matrixL().solve(mpmat::Identity(d, d));
    Spectral sp;
    sp.digits = digits;
    sp.F = Linv.transpose();
    sp.M = Linv * C * Linv.transpose();
    sp.M = (sp.M - sp.M.transpose()) / 2;
    mpmat K = sp.M.transpose() * sp.M;
    K = (K + K.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<mpmat> es(K);
    sp.Q = es.eigenvectors();
    sp.tau.resize(d);
    sp.gamma.resize(d);
    for (int j = 0; j < d; ++j) {
      const mpreal t2 = std::max(es.eigenvalues()(j), mpreal(0));
      sp.tau(j) = sqrt(t2);
      sp.gamma(j) = std::max(1 - t2, mpreal(0));
    }
    return sp;
  }

  static Spectral compute(const StandardSubspace& L, int digits) {
    return L.region ? region_route(L, digits) : generic_route(L, digits);
  }

  static mpreal threshold(int digits) { return ten_pow(-(digits - 20)); }

  static int saturated(const Spectral& sp) {
    PrecisionScope ps(sp.digits);
    const mpreal thr = threshold(sp.digits);
    int c = 0;
    for (int j = 0; j < sp.gamma.size(); ++j)
      if (sp.gamma(j) < thr) ++c;
    return c;
  }

  static mpreal energy(const mpreal& tau, const mpreal& gamma) {
    const mpreal e = log((1 + tau) * (1 + tau) / gamma);  // 2 artanh tau
    return e < kUnitEnergy ? mpreal(0) : e;
  }

  static double max_energy(const Spectral& sp) {
    PrecisionScope ps(sp.digits);
    const mpreal thr = threshold(sp.digits);
    mpreal e = 0;
    for (int j = 0; j < sp.gamma.size(); ++j)
      if (sp.gamma(j) >= thr) e = std::max(e, energy(sp.tau(j), sp.gamma(j)));
    return to_double(e);
  }

  static ModularData assemble(const StandardSubspace& L, Spectral sp, const ConditionReport& cond) {
    PrecisionScope ps(sp.digits);
    ModularData md;
    md.L_ = L;
    md.cond_ = cond;
    md.F_ = std::move(sp.F);
    md.M_ = std::move(sp.M);
    md.Q_ = std::move(sp.Q);
    md.q_identity_ = sp.q_identity;
    md.tau_ = std::move(sp.tau);
    md.gamma_ = std::move(sp.gamma);
    md.eps_.resize(md.tau_.size());
    for (int j = 0; j < md.tau_.size(); ++j) md.eps_(j) = energy(md.tau_(j), md.gamma_(j));
    return md;
  }
};

ModularAnalysis analyze(const StandardSubspace& L, int digits_hint) {
  using B = ModularBuilder;
  if (L.dim() == 0) throw std::invalid_argument("analyze: zero-dimensional subspace");
  if (L.region && !L.space.lattice) throw std::invalid_argument("analyze: region subspace without a lattice");
  B::Spectral sp = B::compute(L, std::max(kMinDigits, digits_hint));
  // Values of 1 - tau^2 at the rounding floor are either exact zeros (L cap iL
  // nonzero) or unresolved; doubling the precision tells them apart.
  bool confirmed = false;
  int zeros = 0;
  for (;;) {
    const int n0 = B::saturated(sp);
    if (n0 > 0 && !confirmed) {
      if (2 * sp.digits > kMaxDigits)
        throw IllConditioned("modular spectrum unresolved at " + std::to_string(sp.digits) + " digits");
      B::Spectral sp2 = B::compute(L, 2 * sp.digits);
      const int n1 = B::saturated(sp2);
      sp = std::move(sp2);
      if (n1 == n0) {
        confirmed = true;
        zeros = n1;
      }
      continue;
    }
    // the literal information formula cancels a factor exp(eps_max)
    const int target = static_cast<int>(std::ceil(B::max_energy(sp) / std::log(10.0))) + 40;
    if (target <= sp.digits) break;
    if (target > kMaxDigits)
      throw IllConditioned("modular spectrum needs " + std::to_string(target) + " digits (cap " +
                           std::to_string(kMaxDigits) + ")");
    sp = B::compute(L, target);
    if (confirmed && B::saturated(sp) != zeros) confirmed = false;
  }

  ModularAnalysis out;
  StandardnessReport& rep = out.report;
  rep.dim = L.dim();
  rep.cap_dim = B::saturated(sp);
  rep.span_dim = 2 * rep.dim - rep.cap_dim;
  rep.ambient_dim = L.space.real_dim();
  rep.condition.digits = sp.digits;
  rep.condition.max_energy = B::max_energy(sp);
  rep.condition.log10_cond = rep.condition.max_energy / std::log(10.0);
  rep.condition.extended = rep.condition.log10_cond > 10;
  if (rep.standard()) out.data = B::assemble(L, std::move(sp), rep.condition);
  return out;
}

StandardnessReport standardness(const StandardSubspace& L) { return analyze(L).report; }

ModularData tomita(const StandardSubspace& L, int digits_hint) {
  ModularAnalysis an = analyze(L, digits_hint);
  if (!an.data)
    throw NotStandard("tomita: L is not standard, dim_R(L cap iL) = " + std::to_string(an.report.cap_dim));
  return std::move(*an.data);
}

// ---- modular data ----

namespace {

CMatrix cmul(const CMatrix& a, const CMatrix& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

CMatrix cconj(const CMatrix& a) { return {a.re, -a.im}; }

double cfrobenius(const CMatrix& a) {
  return a.re.size() ? to_double(sqrt(a.re.squaredNorm() + a.im.squaredNorm())) : 0.0;
}

mpreal ratio(const mpreal& num, const mpreal& eps, const mpreal& limit) { return eps == 0 ? limit : num / eps; }

}  // namespace

std::vector<double> ModularData::energies() const {
  std::vector<double> e(dim());
  for (int j = 0; j < dim(); ++j) e[j] = to_double(eps_(j));
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (size_t i = 0; i < e.size();) {
    if (i + 1 < e.size() && std::abs(e[i + 1] - e[i]) <= 1e-6 * (1 + e[i])) {
      const double m = 0.5 * (e[i] + e[i + 1]);
      out.push_back(-m);
      out.push_back(m);
      i += 2;
    } else {
      out.push_back(e[i]);
      ++i;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> ModularData::delta_eigenvalues() const {
  std::vector<double> v = energies();
  for (double& x : v) x = std::exp(x);
  return v;
}

mpmat ModularData::spectral_function(const SpectralFn& f) const {
  PrecisionScope ps(cond_.digits);
  mpvec fv(dim());
  for (int j = 0; j < dim(); ++j) fv(j) = f(tau_(j), eps_(j));
  if (q_identity_) return mpmat(fv.asDiagonal());
  return Q_ * fv.asDiagonal() * Q_.transpose();
}

mpmat ModularData::times_spectral(const mpmat& A, const SpectralFn& f) const {
  PrecisionScope ps(cond_.digits);
  mpvec fv(dim());
  for (int j = 0; j < dim(); ++j) fv(j) = f(tau_(j), eps_(j));
  if (q_identity_) return A * fv.asDiagonal();
  return (A * Q_) * fv.asDiagonal() * Q_.transpose();
}

mpvec ModularData::apply_spectral(const SpectralFn& f, const mpvec& v) const {
  PrecisionScope ps(cond_.digits);
  mpvec fv(dim());
  for (int j = 0; j < dim(); ++j) fv(j) = f(tau_(j), eps_(j));
  if (q_identity_) return fv.cwiseProduct(v);
  return Q_ * fv.cwiseProduct(Q_.transpose() * v);
}

namespace {
// N = -M f with f = eps / tau
mpreal n_weight(const mpreal& tau, const mpreal& eps) { return tau > 0 ? eps / tau : mpreal(0); }
}  // namespace

mpvec ModularData::apply_N(const mpvec& v) const {
  PrecisionScope ps(cond_.digits);
  return -(M_ * apply_spectral(n_weight, v));
}

CMatrix ModularData::delta_power(double alpha) const {
  PrecisionScope ps(cond_.digits);
  const mpreal al = alpha;
  CMatrix out;
  out.re = spectral_function([&](const mpreal&, const mpreal& e) { return cosh(al * e); });
  out.im = -times_spectral(
      M_, [&](const mpreal& t, const mpreal& e) { return n_weight(t, e) * ratio(sinh(al * e), e, al); });
  return out;
}

mpmat ModularData::delta_it(double t) const {
  PrecisionScope ps(cond_.digits);
  const mpreal tt = t;
  return spectral_function([&](const mpreal&, const mpreal& e) { return cos(tt * e); }) +
         times_spectral(M_, [&](const mpreal& ta, const mpreal& e) { return n_weight(ta, e) * ratio(sin(tt * e), e, tt); });
}

CMatrix ModularData::log_delta() const {
  PrecisionScope ps(cond_.digits);
  return {mpmat::Zero(dim(), dim()), -times_spectral(M_, n_weight)};
}

CVector ModularData::apply_delta_power(double alpha, const CVector& s) const {
  PrecisionScope ps(cond_.digits);
  const mpreal al = alpha;
  auto ch = [&](const mpreal&, const mpreal& e) { return cosh(al * e); };
  auto sh = [&](const mpreal&, const mpreal& e) { return ratio(sinh(al * e), e, al); };
  const mpvec ur = apply_spectral(ch, s.re), ui = apply_spectral(ch, s.im);
  const mpvec vr = apply_spectral(sh, s.re), vi = apply_spectral(sh, s.im);
  return {ur - apply_N(vi), ui + apply_N(vr)};
}

CVector ModularData::apply_J(const CVector& s) const {
  CVector t = apply_delta_power(-0.5, s);
  PrecisionScope ps(cond_.digits);
  t.im = -t.im;
  return t;
}

CVector ModularData::to_coordinates(const rvec& w) const {
  if (w.size() != L_.space.real_dim()) throw std::invalid_argument("to_coordinates: vector has the wrong dimension");
  PrecisionScope ps(cond_.digits);
  const mpvec wm = w.cast<mpreal>();
  const mpmat B = to_mp(L_.basis);
  // b_i = <b_i, w>, then s = (1 + iM)^{-1} F^T b
  const mpvec cr = F_.transpose() * (B.transpose() * apply_metric(L_.space, wm));
  const mpvec ci = F_.transpose() * (B.transpose() * apply_sigma(L_.space, wm)) / 2;
  auto inv_gamma = [&](const mpvec& v) -> mpvec {
    if (q_identity_) return v.cwiseQuotient(gamma_);
    return Q_ * (Q_.transpose() * v).cwiseQuotient(gamma_);
  };
  const mpvec ur = inv_gamma(cr), ui = inv_gamma(ci);
  return {ur + M_ * ui, ui - M_ * ur};
}

rvec ModularData::to_ambient(const CVector& s) const {
  PrecisionScope ps(cond_.digits);
  return to_ambient(mpmat(s.re), mpmat(s.im)).col(0);
}

Eigen::MatrixXd ModularData::to_ambient(const mpmat& re, const mpmat& im) const {
  PrecisionScope ps(cond_.digits);
  const mpmat B = to_mp(L_.basis);
  const mpmat v = B * (F_ * re) + apply_J0(L_.space, B * (F_ * im));
  return v.unaryExpr([](const mpreal& x) { return to_double(x); });
}

ModularData::Residuals ModularData::residuals(const std::vector<double>& ts) const {
  // J Delta J passes through entries of size exp(2 eps_max)
  const int need = static_cast<int>(std::ceil(2 * cond_.max_energy / std::log(10.0))) + 30;
  if (need > cond_.digits) return tomita(L_, need).residuals(ts);
  PrecisionScope ps(cond_.digits);
  Residuals r;
  const int d = dim();
  const CMatrix D1 = delta_power(1), Dinv = delta_power(-1), Dm = delta_power(-0.5), Dh = delta_power(0.5);
  // J X J = conj(Delta^{-1/2} X) Delta^{-1/2} for complex-linear X
  const CMatrix jdj = cmul(cconj(cmul(Dm, D1)), Dm);
  r.jdj = cfrobenius({jdj.re - Dinv.re, jdj.im - Dinv.im});
  const CMatrix E = cmul(Dm, Dh);
  const CMatrix s2 = cmul(cconj(E), E);
  r.s_square = cfrobenius({s2.re - mpmat::Identity(d, d), s2.im});
  for (double t : ts) {
    const mpmat X = delta_it(t);
    const StandardSubspace moved{L_.space, to_ambient(X, mpmat::Zero(d, d)), std::nullopt};
    r.max_invariance = std::max(r.max_invariance, subspace_distance(moved, L_));
  }
  return r;
}

// ---- cutting projection and information ----

CuttingProjection::CuttingProjection(const ModularData& md) : md_(&md) {
  PrecisionScope ps(md.condition().digits);
  for (int j = 0; j < md.dim(); ++j)
    if (md.tau()(j) < 5e-13)
      throw NotAFactor("cutting projection: Delta has eigenvalue 1, L cap L' != {0} (not a factor)");
  minv_ = -md.times_spectral(md.M(), [](const mpreal& t, const mpreal&) { return 1 / (t * t); });
}

mpvec CuttingProjection::apply(const CVector& y) const {
  PrecisionScope ps(md_->condition().digits);
  return y.re + minv_ * y.im;
}

mpmat CuttingProjection::matrix() const {
  PrecisionScope ps(md_->condition().digits);
  const int d = md_->dim();
  mpmat P = mpmat::Zero(2 * d, 2 * d);
  P.topLeftCorner(d, d).setIdentity();
  P.topRightCorner(d, d) = minv_;
  return P;
}

CuttingProjection::Residuals CuttingProjection::residuals() const {
  PrecisionScope ps(md_->condition().digits);
  const int d = md_->dim();
  const mpmat P = matrix();
  Residuals r;
  r.idempotent = frobenius(P * P - P);
  mpmat inL = mpmat::Zero(2 * d, d);
  inL.topRows(d).setIdentity();
  r.range = frobenius(P * inL - inL);
  // L' = (1 - iM) R^d
  mpmat inLp(2 * d, d);
  inLp.topRows(d).setIdentity();
  inLp.bottomRows(d) = -md_->M();
  r.kernel = frobenius(P * inLp);
  return r;
}

double information(const ModularData& md, const CuttingProjection& P, const rvec& w) {
  const CVector s = md.to_coordinates(w);
  PrecisionScope ps(md.condition().digits);
  // i log Delta = i (iN) = -N
  const CVector v{-md.apply_N(s.re), -md.apply_N(s.im)};
  const mpvec r = P.apply(v);
  return to_double(r.dot(s.im) + r.dot(md.M() * s.re));
}

double information(const ModularData& md, const rvec& w) { return information(md, CuttingProjection(md), w); }

std::string spectrum_csv(const ModularData& md) {
  std::ostringstream os;
  os << "index,delta_eigenvalue\n";
  const auto ev = md.delta_eigenvalues();
  char buf[64];
  for (size_t i = 0; i < ev.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, ev[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace qftlab
