#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qftlab/standard_subspace.hpp"

using namespace qftlab;

namespace {

// Delta = S^T S for the realified Tomita operator; each eigenvalue appears twice.
std::vector<double> brute_force_delta(const StandardSubspace& L) {
  const int n = L.space.n;
  Eigen::MatrixXd J0(2 * n, 2 * n);
  J0.setZero();
  J0.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  J0.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd E(2 * n, 2 * n);
  E << L.basis, J0 * L.basis;
  Eigen::VectorXd sgn(2 * n);
  sgn << Eigen::VectorXd::Ones(n), -Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd S = E * sgn.asDiagonal() * E.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.transpose() * S);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 2 * n);
  return ev;
}

std::vector<double> doubled(std::vector<double> v) {
  std::vector<double> out;
  for (double x : v) out.insert(out.end(), {x, x});
  std::sort(out.begin(), out.end());
  return out;
}

// relative entropy of the coherent state from the site covariance (a = 1)
double gaussian_oracle(const LatticeModel& model, const Region& R, const CauchyData& w) {
  const auto wr = model.omega_row<double>(1), wir = model.omega_row<double>(-1);
  const int N = model.N(), k = R.size();
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(2 * k, 2 * k), Om = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const int dd = ((R.sites[i] - R.sites[j]) % N + N) % N;
      G(i, j) = wir[dd] / 2;
      G(k + i, k + j) = wr[dd] / 2;
    }
  for (int i = 0; i < k; ++i) {
    Om(i, k + i) = 1;
    Om(k + i, i) = -1;
  }
  const cplx I(0, 1);
  // rho ~ exp(-r^T K r / 2), K = 2 i Om arccoth(2 i G Om); 2 i G Om has real spectrum outside [-1, 1]
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(2.0 * I * G * Om);
  Eigen::VectorXcd f(2 * k);
  for (int i = 0; i < 2 * k; ++i) {
    const cplx z = es.eigenvalues()(i);
    f(i) = 0.5 * std::log((z + 1.0) / (z - 1.0));
  }
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd K = 2.0 * I * Om * (V * f.asDiagonal() * V.inverse());
  Eigen::VectorXcd d(2 * k);
  for (int i = 0; i < k; ++i) {
    d(i) = w.phi(R.sites[i]);
    d(k + i) = w.pi(R.sites[i]);
  }
  return 0.5 * (d.transpose() * K * d)(0).real();
}

CauchyData random_wave(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> nd;
  CauchyData w = CauchyData::zeros(N);
  for (int i = 0; i < N; ++i) {
    w.phi(i) = nd(rng);
    w.pi(i) = nd(rng);
  }
  return w;
}

}  // namespace

TEST_CASE("regions and subspaces") {
  const LatticeModel model = build_model({16, 1.0, 1.0, {}});
  const auto L = make_subspace(model, Region::interval(3, 7));
  CHECK(L.dim() == 10);
  CHECK_THROWS_AS(Region::interval(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(Region::of({}), std::invalid_argument);
  CHECK_THROWS_AS(make_subspace(model, Region::interval(10, 16)), std::invalid_argument);
  CHECK(Region::of({5, 2, 2, 9}).sites == std::vector<int>{2, 5, 9});

  // isotony
  const auto Ls = make_subspace(model, Region::interval(4, 6));
  CHECK(subspace_distance(Ls, L) < 1e-12);
  CHECK(subspace_distance(L, Ls) > 0.5);

  // whole lattice: L + iL = everything, L' = {0}
  const auto all = make_subspace(model, Region::interval(0, 15));
  const auto rep = standardness(all);
  CHECK(rep.dense());
  CHECK(rep.cap_dim == 32);
  CHECK(symplectic_complement(all).dim() == 0);
}

TEST_CASE("tomita in C^2 against the realified brute force") {
  const double al = 0.7, be = 1.1;
  Eigen::MatrixXcd v(2, 2);
  v << 1, std::cos(al) * std::polar(1.0, be), 0, std::sin(al) * std::polar(1.0, be);
  const auto L = subspace_from_complex(v);
  const ModularData md = tomita(L);
  const auto ours = doubled(md.delta_eigenvalues());
  const auto bf = brute_force_delta(L);
  REQUIRE(ours.size() == bf.size());
  for (size_t i = 0; i < bf.size(); ++i) CHECK(ours[i] == doctest::Approx(bf[i]).epsilon(1e-12));
  CHECK(bf.front() < 0.9);
  const auto r = md.residuals();
  CHECK(r.jdj < 1e-30);
  CHECK(r.s_square < 1e-30);
  CHECK(r.max_invariance < 1e-12);
  CHECK(spectrum_csv(md).rfind("index,delta_eigenvalue\n0,", 0) == 0);
}

TEST_CASE("real-point subspace") {
  const auto L = real_point_subspace(3);
  const ModularData md = tomita(L);
  for (double e : md.delta_eigenvalues()) CHECK(e == 1.0);
  // J is componentwise conjugation
  CVector s{mpvec::Zero(3), mpvec::Zero(3)};
  s.re << 1, 2, 3;
  s.im << -1, 0.5, 4;
  const CVector js = md.apply_J(s);
  // coordinates are those of the original vectors up to F = 1
  CHECK(to_double(sqrt((js.re - s.re).squaredNorm() + (js.im + s.im).squaredNorm())) < 1e-30);
  CHECK_THROWS_AS(CuttingProjection{md}, NotAFactor);
  CHECK_THROWS_AS(information(md, rvec::Ones(6)), NotAFactor);
}

TEST_CASE("random standard subspace of C^4") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd v(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v(i, j) = cplx(nd(rng), nd(rng));
  const auto L = subspace_from_complex(v);
  const auto an = analyze(L);
  REQUIRE(an.data);
  CHECK(an.report.cap_dim == 0);
  CHECK(an.report.dense());
  const ModularData& md = *an.data;
  const auto ours = doubled(md.delta_eigenvalues());
  const auto bf = brute_force_delta(L);
  for (size_t i = 0; i < bf.size(); ++i) CHECK(ours[i] == doctest::Approx(bf[i]).epsilon(1e-9));
  const auto r = md.residuals();
  CHECK(r.jdj < 1e-30);
  CHECK(r.max_invariance < 1e-12);

  // L'' = L, J L = L'
  const auto Lp = symplectic_complement(L);
  CHECK(Lp.dim() == 4);
  const auto Lpp = symplectic_complement(Lp);
  CHECK(subspace_distance(Lpp, L) < 1e-10);
  CHECK(subspace_distance(L, Lpp) < 1e-10);
  Eigen::MatrixXd jl(8, 4);
  for (int j = 0; j < 4; ++j) {
    CVector e{mpvec::Zero(4), mpvec::Zero(4)};
    e.re(j) = 1;
    jl.col(j) = md.to_ambient(md.apply_J(e));
  }
  const auto JL = subspace_from_basis(L.space, jl);
  CHECK(subspace_distance(JL, Lp) < 1e-10);
  CHECK(subspace_distance(Lp, JL) < 1e-10);

  // cutting projection
  const CuttingProjection P(md);
  const auto pr = P.residuals();
  CHECK(pr.idempotent < 1e-30);
  CHECK(pr.range < 1e-30);
  CHECK(pr.kernel < 1e-30);
  for (int j = 0; j < 4; ++j) {
    const CVector y = md.to_coordinates(Lp.basis.col(j));
    CHECK(to_double(P.apply(y).norm()) < 1e-10);
  }
}

TEST_CASE("lattice intervals: standardness and routes") {
  const LatticeModel model = build_model({16, 1.0, 1.0, {}});
  for (int k = 1; k <= 16; ++k) {
    const auto rep = standardness(make_subspace(model, Region::interval(0, k - 1)));
    CHECK(rep.cap_dim == std::max(0, 2 * (2 * k - 16)));
    CHECK(rep.span_dim == 4 * k - rep.cap_dim);
  }
  // translation and the generic Gram route
  const auto L = make_subspace(model, Region::interval(3, 9));
  const auto Lg = subspace_from_basis(L.space, L.basis);
  const ModularData a = tomita(L), b = tomita(Lg);
  const ModularData c = tomita(make_subspace(model, Region::interval(9, 15)));
  const auto ea = a.delta_eigenvalues(), eb = b.delta_eigenvalues(), ec = c.delta_eigenvalues();
  for (size_t i = 0; i < ea.size(); ++i) {
    CHECK(eb[i] == doctest::Approx(ea[i]).epsilon(1e-20));
    CHECK(ec[i] == doctest::Approx(ea[i]).epsilon(1e-20));
  }
  CHECK(a.condition().extended);
  const auto r = a.residuals();
  CHECK(r.jdj < 1e-8);
  CHECK(r.s_square < 1e-8);
  CHECK(r.max_invariance < 1e-6);

  // factor: L cap L' = {0}
  const auto Lp = symplectic_complement(L);
  CHECK(Lp.dim() == 32 - 14);
  Eigen::MatrixXd both(32, 32);
  both << L.basis, Lp.basis;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(both);
  CHECK(svd.singularValues().minCoeff() > 1e-6);

  // J L lies in L'
  Eigen::MatrixXd jl(32, 14);
  for (int j = 0; j < 14; ++j) {
    CVector e{mpvec::Zero(14), mpvec::Zero(14)};
    e.re(j) = 1;
    jl.col(j) = a.to_ambient(a.apply_J(e));
  }
  CHECK(subspace_distance(subspace_from_basis(L.space, jl), Lp) < 1e-8);
}

TEST_CASE("information") {
  const LatticeModel model = build_model({16, 1.0, 1.0, {}});
  const Region R = Region::interval(3, 7);
  const ModularData md = tomita(make_subspace(model, R));
  const CuttingProjection P(md);
  std::mt19937_64 rng(11);

  CHECK(information(md, P, rvec::Zero(32)) == 0.0);
  for (int rep = 0; rep < 5; ++rep) {
    const CauchyData w = random_wave(rng, 16);
    const double I = information(md, P, to_ambient(w));
    CHECK(I > 0);
    CHECK(I == doctest::Approx(gaussian_oracle(model, R, w)).epsilon(1e-5));
    // only the data inside the region matter
    CauchyData w2 = w;
    for (int n = 0; n < 16; ++n)
      if (n < 3 || n > 7) w2.phi(n) = w2.pi(n) = 0;
    CHECK(information(md, P, to_ambient(w2)) == doctest::Approx(I).epsilon(1e-20));
    // symplectically decoupled
    CauchyData wo = w - w2;
    CHECK(std::abs(information(md, P, to_ambient(wo))) < 1e-10);
    // inclusion
    const ModularData small = tomita(make_subspace(model, Region::interval(4, 6)));
    CHECK(information(small, to_ambient(w)) <= I + 1e-7);
  }
}
