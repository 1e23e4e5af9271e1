#include "qftlab/lattice_model.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace qftlab {

LatticeSpec with_default_regulator(LatticeSpec s) {
  if (s.m == 0.0 && !s.mu && s.a > 0) s.mu = 1e-3 / s.a;
  return s;
}

double symplectic_form(const CauchyData& w1, const CauchyData& w2, double a) {
  if (w1.size() != w2.size()) throw std::invalid_argument("symplectic_form: dimension mismatch");
  return a * (w1.phi.dot(w2.pi) - w1.pi.dot(w2.phi));
}

bool Translation::in_future_cone(double a, bool allow_lightlike) const {
  const double r = std::abs(s * a);
  return allow_lightlike ? t >= r : t > r;
}

LatticeModel::LatticeModel(const LatticeSpec& spec) : spec_(spec) {
  if (spec.N < 2) throw std::invalid_argument("lattice: need N >= 2");
  if (!(spec.a > 0)) throw std::invalid_argument("lattice: spacing must be positive");
  if (!(spec.m >= 0)) throw std::invalid_argument("lattice: mass must be non-negative");
  if (spec.m == 0.0) {
    if (!spec.mu || !(*spec.mu > 0))
      throw std::invalid_argument("lattice: massless chain needs a positive infrared regulator mu");
    mass2_ = *spec.mu * *spec.mu;
  } else {
    mass2_ = spec.m * spec.m;
  }
  const int n = spec.N;
  omega_.resize(n);
  k_.resize(n);
  for (int j = 0; j < n; ++j) {
    const int jj = j <= n / 2 ? j : j - n;
    k_[j] = 2 * M_PI * jj / (n * spec.a);
    const double s = std::sin(M_PI * j / n);
    omega_[j] = std::sqrt(mass2_ + 4 * s * s / (spec.a * spec.a));
  }
}

LatticeModel build_model(const LatticeSpec& spec) { return LatticeModel(spec); }

namespace {

// exp(i 2 pi j n0 / N) / sqrt(N): turns the FFT (origin at site 0) into the
// transform with origin at x = 0.
cvec origin_phase(int n, int n0) {
  cvec p(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    const double ang = 2 * M_PI * static_cast<double>((static_cast<long>(j) * n0) % n) / n;
    p[j] = std::polar(norm, ang);
  }
  return p;
}

}  // namespace

cvec LatticeModel::to_modes(const cvec& f) const {
  if (f.size() != spec_.N) throw std::invalid_argument("to_modes: dimension mismatch");
  Eigen::FFT<double> fft;
  std::vector<cplx> in(f.data(), f.data() + f.size()), out;
  fft.fwd(out, in);
  cvec p = origin_phase(spec_.N, origin_site());
  cvec r(spec_.N);
  for (int j = 0; j < spec_.N; ++j) r[j] = p[j] * out[j];
  return r;
}

cvec LatticeModel::to_modes(const rvec& f) const { return to_modes(cvec(f.cast<cplx>())); }

cvec LatticeModel::from_modes(const cvec& fk) const {
  if (fk.size() != spec_.N) throw std::invalid_argument("from_modes: dimension mismatch");
  const int n = spec_.N;
  cvec p = origin_phase(n, origin_site());
  std::vector<cplx> in(n), out;
  // inverse of r_j = p_j F_j: 1/p_j = N conj(p_j), and fft.inv divides by N
  for (int j = 0; j < n; ++j) in[j] = fk[j] * std::conj(p[j]) * static_cast<double>(n);
  Eigen::FFT<double> fft;
  fft.inv(out, in);
  cvec r(n);
  for (int q = 0; q < n; ++q) r[q] = out[q];
  return r;
}

rvec LatticeModel::from_modes_real(const cvec& fk) const { return from_modes(fk).real(); }

cvec embed(const LatticeModel& model, const CauchyData& w) {
  if (w.phi.size() != model.N() || w.pi.size() != model.N())
    throw std::invalid_argument("embed: dimension mismatch");
  const cvec ph = model.to_modes(w.phi);
  const cvec pk = model.to_modes(w.pi);
  const double alpha = std::sqrt(model.a() / 2);
  cvec z(model.N());
  for (int j = 0; j < model.N(); ++j) {
    const double sw = std::sqrt(model.omega()[j]);
    z[j] = alpha * (sw * ph[j] + cplx(0, 1) * pk[j] / sw);
  }
  return z;
}

CauchyData unembed(const LatticeModel& model, const cvec& z) {
  const int n = model.N();
  if (z.size() != n) throw std::invalid_argument("unembed: dimension mismatch");
  const double alpha = std::sqrt(model.a() / 2);
  cvec ph(n), pk(n);
  for (int j = 0; j < n; ++j) {
    const int mj = (n - j) % n;
    const double sw = std::sqrt(model.omega()[j]);
    const cplx zc = std::conj(z[mj]);
    ph[j] = (z[j] + zc) / (2 * alpha * sw);
    pk[j] = (z[j] - zc) * sw / (2 * alpha * cplx(0, 1));
  }
  return {model.from_modes_real(ph), model.from_modes_real(pk)};
}

ModeOperator translation_operator(const LatticeModel& model, const Translation& tau) {
  const int n = model.N();
  ModeOperator u{cvec(n)};
  for (int j = 0; j < n; ++j) {
    // k s a is reduced mod 2 pi exactly through the integer j s
    const double ksa = 2 * M_PI * static_cast<double>((static_cast<long>(j) * tau.s) % n) / n;
    u.phases[j] = std::polar(1.0, model.omega()[j] * tau.t - ksa);
  }
  return u;
}

cvec time_evolve(const LatticeModel& model, const cvec& z, const Translation& tau) {
  if (z.size() != model.N()) throw std::invalid_argument("time_evolve: dimension mismatch");
  return translation_operator(model, tau).apply(z);
}

CauchyData evolve_classical(const LatticeModel& model, const CauchyData& w, double t) {
  const cvec ph = model.to_modes(w.phi);
  const cvec pk = model.to_modes(w.pi);
  const int n = model.N();
  cvec ph_t(n), pk_t(n);
  for (int j = 0; j < n; ++j) {
    const double om = model.omega()[j];
    const double c = std::cos(om * t), s = std::sin(om * t);
    ph_t[j] = c * ph[j] + s / om * pk[j];
    pk_t[j] = -om * s * ph[j] + c * pk[j];
  }
  return {model.from_modes_real(ph_t), model.from_modes_real(pk_t)};
}

CauchyData shift_data(const CauchyData& w, int s) {
  const int n = w.size();
  CauchyData r = CauchyData::zeros(n);
  for (int q = 0; q < n; ++q) {
    const int src = ((q - s) % n + n) % n;
    r.phi[q] = w.phi[src];
    r.pi[q] = w.pi[src];
  }
  return r;
}

ModeOperator extend_semigroup(const LatticeModel& model, const Translation& x,
                              const std::vector<Decomposition>& decompositions, double tol,
                              bool allow_lightlike) {
  if (decompositions.empty()) throw std::invalid_argument("extend_semigroup: no decomposition given");
  std::optional<ModeOperator> result;
  for (const auto& d : decompositions) {
    if (!d.plus.in_future_cone(model.a(), allow_lightlike) ||
        !d.minus.in_future_cone(model.a(), allow_lightlike))
      throw std::invalid_argument("extend_semigroup: decomposition leaves the future cone");
    const Translation diff = d.plus - d.minus;
    if (diff.s != x.s || std::abs(diff.t - x.t) > 1e-12 * (1 + std::abs(x.t)))
      throw std::invalid_argument("extend_semigroup: decomposition does not sum to x");
    ModeOperator up = translation_operator(model, d.plus);
    ModeOperator um = translation_operator(model, d.minus);
    ModeOperator u{up.phases.cwiseProduct(um.phases.conjugate())};
    if (!result) {
      result = u;
    } else if (result->distance(u) > tol) {
      throw std::runtime_error("extend_semigroup: decompositions disagree");
    }
  }
  return *result;
}

SpectrumReport energy_spectrum_check(const LatticeModel& model) {
  SpectrumReport r;
  const rvec& w = model.omega();
  r.min_omega = w.minCoeff();
  r.max_omega = w.maxCoeff();
  r.gap = r.min_omega;
  const double a = model.a();
  for (int j = 0; j < model.N(); ++j) {
    const double s = std::sin(model.momenta()[j] * a / 2);
    const double direct = std::sqrt(model.mass2() + 4 / (a * a) * s * s);
    r.max_formula_error = std::max(r.max_formula_error, std::abs(direct - w[j]));
    if (w[j] < std::abs(model.momenta()[j])) ++r.below_momentum;
  }
  r.pass = r.min_omega >= 0;
  return r;
}

}  // namespace qftlab
