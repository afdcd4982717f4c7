#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gbdt/dirac.hpp"
#include "gbdt/residuals.hpp"
#include "test_util.hpp"

using namespace gbdt;
using testutil::random_cmat;
using testutil::random_hermitian;
using testutil::random_posdef;

namespace {

DiracSeed pe_seed(const CMat& a, const CMat& phi1, const CMat& phi2) {
  DiracSeed s;
  s.kind = DiracKind::SelfAdjoint;
  s.p1 = static_cast<int>(phi1.cols());
  s.p2 = static_cast<int>(phi2.cols());
  s.A = a;
  s.S0 = CMat::Identity(a.rows(), a.cols());
  s.Phi1 = phi1;
  s.Phi2 = phi2;
  return s;
}

// A = H + (i/2)(Phi1 Phi1* - Phi2 Phi2*) satisfies the class identity.
DiracSeed random_pe_seed(int n, int p, double scale1 = 1.0, double scale2 = 1.0) {
  CMat phi1 = random_cmat(n, p, scale1), phi2 = random_cmat(n, p, scale2);
  CMat a = random_hermitian(n) +
           Complex(0, 0.5) * (phi1 * phi1.adjoint() - phi2 * phi2.adjoint());
  return pe_seed(a, phi1, phi2);
}

DiracSeed random_pe2_seed(int n, int p) {
  CMat phi1 = random_cmat(n, p), phi2 = random_cmat(n, p);
  CMat pi(n, 2 * p);
  pi << phi1, phi2;
  CMat a = random_hermitian(n) + Complex(0, 0.5) * pi * pi.adjoint();
  DiracSeed s;
  s.kind = DiracKind::SkewSelfAdjoint;
  s.p1 = s.p2 = p;
  s.A = a;
  s.S0 = CMat::Identity(n, n);
  s.Phi1 = phi1;
  s.Phi2 = phi2;
  return s;
}

const DiracSeed& scalar_example_seed() {
  static DiracSeed s = [] {
    CMat a(1, 1), phi1(1, 1), phi2(1, 1);
    a << Complex(0, 1);
    phi1 << std::sqrt(3.0);
    phi2 << 1.0;
    return pe_seed(a, phi1, phi2);
  }();
  return s;
}

CMat dirac_V(const DiracSeed& seed, const DiracS& s, double x) {
  PotentialSample ps = potential_at(seed, s, x);
  CMat v = CMat::Zero(seed.m(), seed.m());
  v.topRightCorner(seed.p1, seed.p2) = ps.v;
  v.bottomLeftCorner(seed.p2, seed.p1) = ps.v.adjoint();
  return v;
}

}  // namespace

TEST_CASE("seed validation") {
  CHECK_NOTHROW(validate(scalar_example_seed()));
  DiracSeed bad = scalar_example_seed();
  bad.A(0, 0) = Complex(0, 2);  // identity broken
  CHECK_THROWS_AS(validate(bad), ValidationError);
  DiracSeed bad2 = scalar_example_seed();
  bad2.S0(0, 0) = 2.0;
  CHECK_THROWS_AS(validate(bad2), ValidationError);
}

TEST_CASE("pe_potential: zero Phi1 gives the zero potential") {
  CMat phi2 = random_cmat(3, 1);
  CMat a = random_hermitian(3) - Complex(0, 0.5) * phi2 * phi2.adjoint();
  DiracSeed s = pe_seed(a, CMat::Zero(3, 1), phi2);
  SolutionGrid g = pe_potential(s, GridSpec(0, 2, 21));
  for (const CMat& v : g.samples) CHECK(v.norm() == 0.0);
}

TEST_CASE("pe_potential: scalar example value at x = 0") {
  DiracS s(scalar_example_seed());
  PotentialSample ps = potential_at(scalar_example_seed(), s, 0.0);
  CHECK(std::abs(ps.v(0, 0) - Complex(0, -2.0 * std::sqrt(3.0))) < 1e-14);
}

TEST_CASE("DiracS closed form agrees with direct integration") {
  DiracSeed seed = scalar_example_seed();
  DiracS s(seed);
  CHECK(s.closed_form());
  auto rhs = [&](double x, const std::vector<CMat>& y) {
    CMat pi = dirac_Pi(seed, x);
    return std::vector<CMat>{CMat(pi * pi.adjoint())};
  };
  auto traj = integrate_matrix_ode(rhs, {seed.S0}, GridSpec(0, 3, 1501));
  CHECK((s(3.0) - traj.back()[0]).norm() <= 1e-9 * traj.back()[0].norm());

  // Real-spectrum seed forces the ODE path; check against closed scalar form:
  // A real, |Phi1| = |Phi2| -> S(x) = 1 + (|p1|^2 + |p2|^2) x.
  CMat a(1, 1), p1(1, 1), p2(1, 1);
  a << 0.7;
  p1 << 1.0;
  p2 << Complex(0, 1);
  DiracSeed flat = pe_seed(a, p1, p2);
  DiracS s2(flat);
  CHECK_FALSE(s2.closed_form());
  CHECK(std::abs(s2(1.7)(0, 0) - Complex(1 + 2 * 1.7, 0)) < 1e-10);
}

TEST_CASE("pe potential stays bounded and fundamental solution solves the ODE") {
  DiracSeed seed = scalar_example_seed();
  DiracS s(seed);
  for (double x = 0; x <= 5.0; x += 0.5)
    CHECK(potential_at(seed, s, x).v.norm() < 10.0);

  const Complex lambda(0.8, 0.0);
  const CMat j = signature_j(1, 1);
  auto u = [&](double x) {
    CMat w = dirac_transfer(seed, s, x, lambda);
    CMat e = CMat::Zero(2, 2);
    e(0, 0) = std::exp(Complex(0, 1) * lambda * x);
    e(1, 1) = std::exp(Complex(0, -1) * lambda * x);
    return CMat(w * e);
  };
  auto g = [&](double x) {
    return CMat(Complex(0, 1) * (lambda * j + j * dirac_V(seed, s, x)));
  };
  ResidualReport rep = ode_residual(u, g, GridSpec(0, 3, 601));
  CHECK(rep.order == doctest::Approx(2.0).epsilon(0.12));

  // Nondegeneracy at random (x, lambda).
  for (int k = 0; k < 20; ++k) {
    double x = testutil::urand(0.1, 4.0);
    Complex l(testutil::urand(-2, 2), testutil::urand(-2, 2));
    CMat uf = fundamental_solution(seed, x, l);
    CHECK(std::abs(uf.determinant()) > 1e-8);
  }
}

TEST_CASE("skew seed: unitarity-type identity for w_A") {
  DiracSeed seed = random_pe2_seed(2, 1);
  DiracS s(seed);
  for (int k = 0; k < 8; ++k) {
    double x = testutil::urand(0, 2);
    Complex lambda(testutil::urand(-2, 2), testutil::urand(-2, -0.5));
    CMat w = dirac_transfer(seed, s, x, lambda);
    CMat pi = dirac_Pi(seed, x);
    const int n = seed.n();
    CMat r1 = solve_linear(CMat(seed.A - lambda * CMat::Identity(n, n)), pi);
    CMat r2 = solve_linear(s(x), r1);
    CMat r3 = solve_linear(
        CMat(seed.A.adjoint() - std::conj(lambda) * CMat::Identity(n, n)),
        CMat::Identity(n, n));
    CMat correction = Complex(0, 1) * (lambda - std::conj(lambda)) *
                      pi.adjoint() * r3 * r2;
    CMat lhs = w.adjoint() * w;
    CHECK((lhs - (CMat::Identity(2, 2) - correction)).norm() <= 1e-9);
    // Contractivity in the lower half-plane.
    CHECK(w.operatorNorm() <= 1.0 + 1e-9);
  }
}

TEST_CASE("weyl_direct: scalar closed form and trivial case") {
  WeylFunction w = weyl_direct(scalar_example_seed());
  for (double y : {0.5, 1.0, 3.0, 10.0}) {
    Complex lambda(0.3, y);
    Complex expect =
        Complex(0, 1) + 2.0 * std::sqrt(3.0) / (lambda + Complex(0, 2 + std::sqrt(3.0)));
    CHECK(std::abs(eval(w.realization, lambda)(0, 0) - expect) < 1e-12);
  }

  CMat phi2 = random_cmat(2, 1);
  CMat a = random_hermitian(2) - Complex(0, 0.5) * phi2 * phi2.adjoint();
  WeylFunction triv = weyl_direct(pe_seed(a, CMat::Zero(2, 1), phi2));
  CHECK((eval(triv.realization, Complex(1, 1)) -
         Complex(0, 1) * CMat::Identity(1, 1)).norm() < 1e-14);
}

TEST_CASE("direct Weyl functions are Herglotz on the sampled half-plane grid") {
  for (int rep = 0; rep < 5; ++rep) {
    DiracSeed seed = random_pe_seed(1 + rep % 3, 1 + rep % 2);
    WeylFunction w = weyl_direct(seed);
    for (int k = 0; k < 30; ++k) {
      const double r = std::pow(10.0, 3.0 * k / 29.0);
      CMat val = eval(w.realization, Complex(0, r));
      CMat im = (val - val.adjoint()) / Complex(0, 2);
      CHECK(min_eig_hermitian(im) >= -1e-10 * std::max(1.0, val.norm()));
    }
  }
}

TEST_CASE("weyl_direct satisfies the defining half-line integrability") {
  // Integrand of the Weyl inequality at lambda = 2i decays along [0, 20].
  DiracSeed seed = scalar_example_seed();
  WeylFunction w = weyl_direct(seed);
  const Complex lambda(0, 2);
  CMat phi = eval(w.realization, lambda);
  const int p = seed.p1;
  CMat kmat(2 * p, 2 * p);
  kmat << CMat::Identity(p, p), -CMat::Identity(p, p), CMat::Identity(p, p),
      CMat::Identity(p, p);
  kmat /= std::sqrt(2.0);
  CMat row(p, 2 * p);
  row << CMat::Identity(p, p), Complex(0, 1) * phi.adjoint();
  CMat col = row.adjoint();

  // The integrand contains e^{+4x} intermediates that cancel down to
  // e^{-4x}; keep x modest so roundoff stays below the true value.
  double prev = 1e300;
  for (double x : {1.0, 2.0, 3.0, 4.0}) {
    CMat uu = fundamental_solution(seed, x, lambda);
    CMat integrand = row * kmat * uu.adjoint() * uu * kmat.adjoint() * col;
    double nrm = integrand.norm();
    CHECK(nrm < 0.25 * prev);
    prev = nrm;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("skew_weyl_direct: trivial, strict properness, integrability") {
  // Phi2 = 0: phi == 0 and v~ == 0.
  CMat phi1 = random_cmat(2, 1);
  CMat a = random_hermitian(2) + Complex(0, 0.5) * phi1 * phi1.adjoint();
  DiracSeed triv;
  triv.kind = DiracKind::SkewSelfAdjoint;
  triv.p1 = triv.p2 = 1;
  triv.A = a;
  triv.S0 = CMat::Identity(2, 2);
  triv.Phi1 = phi1;
  triv.Phi2 = CMat::Zero(2, 1);
  WeylFunction wt = skew_weyl_direct(triv);
  CHECK(eval(wt.realization, Complex(0, -3)).norm() == 0.0);
  CHECK(wt.bound_M <= 1e-14);

  DiracSeed seed = random_pe2_seed(3, 1);
  WeylFunction w = skew_weyl_direct(seed);
  CHECK(w.bound_M > 0.0);
  double datascale = seed.Phi1.norm() * seed.Phi2.norm();
  CHECK(eval(w.realization, Complex(0, 1e6)).norm() <= 1e-4 * std::max(1.0, datascale));

  // The defining half-line integrand decays below the working bound; the
  // e^{+2cx} intermediates limit how far out this stays above roundoff.
  const Complex lambda(0, -(w.bound_M + 1.0));
  CMat phi = eval(w.realization, lambda);
  double prev = 1e300;
  for (double x : {0.5, 1.0, 1.5, 2.0}) {
    CMat uu = fundamental_solution(seed, x, lambda);
    CMat col(2, 1);
    col << phi(0, 0), Complex(1, 0);
    CMat integrand = col.adjoint() * uu.adjoint() * uu * col;
    double nrm = integrand.norm();
    CHECK(nrm < prev);
    prev = nrm;
  }
}

TEST_CASE("reflection_from_weyl: trivial and scalar cases, round trip") {
  // phi == iI reflects nothing.
  WeylFunction triv;
  triv.realization = Realization::constant(CMat(Complex(0, 1) * CMat::Identity(1, 1)));
  triv.halfplane = WeylFunction::Halfplane::Upper;
  Realization r0 = reflection_from_weyl(triv);
  CHECK(r0.order() == 0);
  CHECK(eval(r0, Complex(0.5, 0)).norm() == 0.0);

  WeylFunction w = weyl_direct(scalar_example_seed());
  Realization rl = reflection_from_weyl(w);
  CHECK(rl.order() == 1);
  for (int k = 0; k < 50; ++k) {
    double lam = -25.0 + k;
    CMat val = eval(rl, Complex(lam, 0));
    CHECK(val.operatorNorm() <= 1.0 + 1e-12);
    // Closed form R_L = -sqrt(3) i / (lambda + 2i).
    Complex expect = -std::sqrt(3.0) * Complex(0, 1) / (Complex(lam, 0) + Complex(0, 2));
    CHECK(std::abs(val(0, 0) - expect) < 1e-10);
  }
  CHECK(eval(rl, Complex(1e6, 0)).norm() < 1e-5);
}

TEST_CASE("weyl_inverse: trivial input, scalar round trip, rejection") {
  Realization phi_triv =
      Realization::constant(CMat(Complex(0, 1) * CMat::Identity(2, 2)));
  DiracSeed z = weyl_inverse(phi_triv);
  CHECK(z.n() == 0);
  SolutionGrid g = pe_potential(z, GridSpec(0, 1, 11));
  for (const CMat& v : g.samples) CHECK(v.norm() == 0.0);

  // Scalar example round trip at the potential level.
  DiracSeed orig = scalar_example_seed();
  WeylFunction w = weyl_direct(orig);
  DiracSeed rec = weyl_inverse(w.realization);
  DiracS s1(orig), s2(rec);
  double dev = 0.0;
  for (double x = 0; x <= 5.0; x += 0.25)
    dev = std::max(dev,
                   (potential_at(orig, s1, x).v - potential_at(rec, s2, x).v).norm());
  CHECK(dev <= 1e-6);

  // Weyl functions agree pointwise.
  WeylFunction wrec = weyl_direct(rec);
  for (int k = 0; k < 30; ++k) {
    Complex lambda(testutil::urand(-3, 3), testutil::urand(0.5, 3));
    CHECK((eval(wrec.realization, lambda) - eval(w.realization, lambda)).norm() <=
          1e-8);
  }

  // A function with an interior upper-half-plane pole is not Herglotz.
  CMat a(1, 1), b(1, 1), c(1, 1);
  a << Complex(0, 2);
  b << 1.0;
  c << 1.0;
  Realization bad(a, b, c, CMat(Complex(0, 1) * CMat::Identity(1, 1)));
  CHECK_THROWS_AS(weyl_inverse(bad), ValidationError);
}

TEST_CASE("weyl round trips on random PE seeds") {
  for (int rep = 0; rep < 6; ++rep) {
    int n = 1 + rep % 3, p = 1 + rep % 2;
    DiracSeed seed = random_pe_seed(n, p);
    WeylFunction w = weyl_direct(seed);
    DiracSeed rec;
    try {
      rec = weyl_inverse(w.realization);
    } catch (const NumericalError& e) {
      FAIL("weyl_inverse failed: ", e.what());
      continue;
    }
    DiracS s1(seed), s2(rec);
    double dev = 0.0;
    for (double x = 0; x <= 5.0; x += 0.25)
      dev = std::max(
          dev, (potential_at(seed, s1, x).v - potential_at(rec, s2, x).v).norm());
    CHECK(dev <= 1e-6);
  }
}

TEST_CASE("skew_weyl_inverse: trivial, scalar family, random round trips") {
  Realization zero(CMat(0, 0), CMat(0, 1), CMat(1, 0), CMat::Zero(1, 1));
  DiracSeed z = skew_weyl_inverse(zero);
  CHECK(z.n() == 0);

  for (double c : {0.5, 1.0, 2.0}) {
    CMat a(1, 1), b(1, 1), cc(1, 1);
    a << Complex(0, c);
    b << 1.0;
    cc << 1.0;
    Realization phi(a, b, cc, CMat::Zero(1, 1));
    DiracSeed rec = skew_weyl_inverse(phi);
    WeylFunction wrec = skew_weyl_direct(rec);
    for (int k = 0; k < 10; ++k) {
      Complex lambda(testutil::urand(-3, 3), testutil::urand(-4, -1.5));
      CHECK((eval(wrec.realization, lambda) - eval(phi, lambda)).norm() <= 1e-8);
    }
  }

  for (int rep = 0; rep < 4; ++rep) {
    DiracSeed seed = random_pe2_seed(1 + rep % 3, 1);
    WeylFunction w = skew_weyl_direct(seed);
    DiracSeed rec = skew_weyl_inverse(w.realization);
    DiracS s1(seed), s2(rec);
    double dev = 0.0;
    for (double x = 0; x <= 5.0; x += 0.25)
      dev = std::max(
          dev, (potential_at(seed, s1, x).v - potential_at(rec, s2, x).v).norm());
    CHECK(dev <= 1e-6);
  }
}

namespace {

// Reflection data: random realization with poles at distance >= ~1 from the
// real axis, scaled to be contractive with margin.  The sup is measured on a
// coarse grid refined around every pole projection, so the scaling cannot
// miss a narrow peak.
Realization random_contractive(int n, int p1, int p2) {
  CMat a = random_cmat(n, n) + Complex(0, 2) * CMat::Identity(n, n);
  CMat b = random_cmat(n, p1), c = random_cmat(p2, n);
  Realization r(a, b, c, CMat::Zero(p2, p1));
  std::vector<double> probes;
  for (int k = 0; k <= 1000; ++k) probes.push_back(-50.0 + 0.1 * k);
  for (const Complex& mu : eigenvalues(a))
    for (double d : {0.0, -0.05, 0.05, -0.1, 0.1, -0.25, 0.25})
      probes.push_back(mu.real() + d);
  double sup = 0.0;
  for (double lam : probes)
    sup = std::max(sup, eval(r, Complex(lam, 0)).operatorNorm());
  return Realization(a, b, CMat(c * (0.85 / sup)), CMat::Zero(p2, p1));
}

}  // namespace

TEST_CASE("gpe: trivial empty seed scatters nothing") {
  DiracSeed seed;
  seed.kind = DiracKind::GeneralizedPE;
  seed.p1 = seed.p2 = 1;
  seed.A = CMat(0, 0);
  seed.S0 = CMat(0, 0);
  seed.Phi1 = CMat(0, 1);
  seed.Phi2 = CMat(0, 1);
  GpeScattering sc = gpe_scattering(seed);
  CHECK(eval(sc.RL, Complex(0.3, 0)).norm() == 0.0);
  CHECK((eval(sc.TL, Complex(0.3, 0)) - CMat::Identity(1, 1)).norm() == 0.0);
}

TEST_CASE("gpe inverse/direct round trip from reflection data") {
  for (int rep = 0; rep < 4; ++rep) {
    Realization r = random_contractive(1 + rep % 2, 1, 1);
    DiracSeed seed = gpe_inverse(r);
    GpeScattering sc = gpe_scattering(seed);
    for (int k = 0; k < 20; ++k) {
      Complex lambda(testutil::urand(-8, 8), 0);
      CHECK((eval(sc.RL, lambda) - eval(r, lambda)).norm() <= 1e-8);
    }
    // Contractivity of the produced reflection on the real axis.
    for (int k = 0; k < 50; ++k) {
      Complex lambda(testutil::urand(-30, 30), 0);
      CHECK(eval(sc.RL, lambda).operatorNorm() <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("gpe potential round trip (seed -> R_L -> seed)") {
  Realization r = random_contractive(2, 1, 1);
  DiracSeed seed = gpe_inverse(r);
  GpeScattering sc = gpe_scattering(seed);
  DiracSeed rec = gpe_inverse(minimal_realize(sc.RL));
  DiracS s1(seed), s2(rec);
  double dev = 0.0;
  for (double x = 0; x <= 5.0; x += 0.25) {
    PotentialSample v1 = potential_at(seed, s1, x), v2 = potential_at(rec, s2, x);
    if (v1.singular || v2.singular) continue;
    dev = std::max(dev, (v1.v - v2.v).norm());
  }
  CHECK(dev <= 1e-6);
}

TEST_CASE("gpe reflection matches the ODE shooting oracle") {
  // Direct random GPE seed with positive S0 (so S(x) > 0 on the half-line
  // and the oracle integrates through a smooth potential) and the spectrum
  // of A strictly above the axis (so the potential decays).
  DiracSeed seed;
  seed.kind = DiracKind::GeneralizedPE;
  seed.p1 = seed.p2 = 1;
  double beta = 0.0;
  for (int attempt = 0; attempt < 2000; ++attempt) {
    CMat s0 = random_posdef(2);
    CMat phi1 = random_cmat(2, 1), phi2 = random_cmat(2, 1, 0.6);
    CMat mj = phi1 * phi1.adjoint() - phi2 * phi2.adjoint();
    CMat a = (random_hermitian(2) + Complex(0, 0.5) * mj) *
             solve_linear(s0, CMat::Identity(2, 2));
    beta = 1e300;
    double beta_max = 0.0;
    for (const Complex& ev : eigenvalues(a)) {
      beta = std::min(beta, ev.imag());
      beta_max = std::max(beta_max, ev.imag());
    }
    // Lower bound keeps the potential decaying fast enough for the shot;
    // upper bound keeps e^{-ixA} representable over the shooting range.
    if (beta <= 0.2 || beta_max > 2.0) {
      beta = 0.0;
      continue;
    }
    seed.A = a;
    seed.S0 = s0;
    seed.Phi1 = phi1;
    seed.Phi2 = phi2;
    break;
  }
  REQUIRE(beta > 0.2);
  validate(seed);
  const double bigx = std::min(60.0, std::max(20.0, 9.0 / beta));

  GpeScattering sc = gpe_scattering(seed);
  DiracS s(seed);
  const CMat j = signature_j(1, 1);
  for (double lam : {-2.3, -0.7, 0.4, 1.1, 2.9}) {
    auto rhs = [&](double x, const std::vector<CMat>& y) {
      return std::vector<CMat>{
          CMat(Complex(0, 1) * (lam * j + j * dirac_V(seed, s, x)) * y[0])};
    };
    int steps = static_cast<int>(bigx * 700) + 1;
    auto traj = integrate_matrix_ode(rhs, {CMat::Identity(2, 2)},
                                     GridSpec(0, bigx, steps));
    CMat ux = traj.back()[0];
    CMat rhsv(2, 1);
    rhsv << std::exp(Complex(0, 1) * lam * bigx), 0.0;
    CMat d = solve_linear(ux, rhsv);
    Complex rl_shoot = d(1, 0) / d(0, 0);
    CHECK(std::abs(rl_shoot - eval(sc.RL, Complex(lam, 0))(0, 0)) <= 1e-6);
  }
}

TEST_CASE("gpe singular potential: flagged samples and recovery of positivity") {
  // n = 1 with negative S0: det S crosses zero once.
  // Identity: A S0 - S0 A* = 2i Im(A) S0 = i(|phi1|^2 - |phi2|^2).
  DiracSeed seed;
  seed.kind = DiracKind::GeneralizedPE;
  seed.p1 = seed.p2 = 1;
  seed.A = CMat(1, 1);
  seed.S0 = CMat(1, 1);
  seed.Phi1 = CMat(1, 1);
  seed.Phi2 = CMat(1, 1);
  seed.Phi1 << 0.5;
  seed.Phi2 << 2.0;
  seed.S0 << -1.0;
  seed.A << Complex(0.3, (0.25 - 4.0) / (2.0 * -1.0));
  validate(seed);

  // Locate the zero of det S, then lay the grid so one sample lands on it
  // (flagging marks samples within 1e-6 of a singularity).
  DiracS s(seed);
  double lo = 0.0, hi = 2.0;
  REQUIRE(s(lo)(0, 0).real() < 0.0);
  REQUIRE(s(hi)(0, 0).real() > 0.0);
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (s(mid)(0, 0).real() < 0.0 ? lo : hi) = mid;
  }
  const double xs = 0.5 * (lo + hi);
  GridSpec grid(xs - 0.5, xs + 0.5, 201);  // sample 100 sits on the zero

  SolutionGrid g = pe_potential(seed, grid);
  int flagged = 0;
  double last_flag_x = -1;
  for (int i = 0; i < g.grid.nx; ++i)
    if (g.flagged(i)) {
      ++flagged;
      last_flag_x = g.grid.x(i);
    }
  CHECK(flagged > 0);
  // S(x) > 0 beyond the last detected zero.
  bool after_clear = true;
  for (double x = last_flag_x + 0.05; x < xs + 0.5; x += 0.05)
    after_clear = after_clear && is_posdef(s(x));
  CHECK(after_clear);
}

TEST_CASE("trivial fundamental solution: zero Phi gives the bare exponential") {
  DiracSeed seed;
  seed.kind = DiracKind::SelfAdjoint;
  seed.p1 = seed.p2 = 1;
  seed.A = random_hermitian(2);  // zero Phi requires A = A*
  seed.S0 = CMat::Identity(2, 2);
  seed.Phi1 = CMat::Zero(2, 1);
  seed.Phi2 = CMat::Zero(2, 1);
  const Complex lambda(0.7, 0.4);
  const double x = 1.3;
  CMat u = fundamental_solution(seed, x, lambda);
  CMat e = CMat::Zero(2, 2);
  e(0, 0) = std::exp(Complex(0, 1) * lambda * x);
  e(1, 1) = std::exp(Complex(0, -1) * lambda * x);
  CHECK((u - e).norm() <= 1e-14 * e.norm());
}

TEST_CASE("gpe round trip with rectangular reflection data") {
  // p1 = 2 incoming channels, p2 = 1 outgoing: R_L is 1 x 2.  The omega
  // doubling needs the recovered spectrum at a margin from the real axis
  // and bounded above, so sample until it is.
  Realization r;
  DiracSeed seed;
  bool found = false;
  for (int attempt = 0; attempt < 200 && !found; ++attempt) {
    r = random_contractive(2, 2, 1);
    seed = gpe_inverse(r);
    double lo = 1e300, hi = 0.0;
    for (const Complex& ev : eigenvalues(seed.A)) {
      lo = std::min(lo, ev.imag());
      hi = std::max(hi, ev.imag());
    }
    found = lo > 0.15 && hi < 2.0;
  }
  REQUIRE(found);
  CHECK(seed.p1 == 2);
  CHECK(seed.p2 == 1);
  GpeScattering sc = gpe_scattering(seed);
  for (int k = 0; k < 20; ++k) {
    Complex lambda(testutil::urand(-8, 8), 0);
    CHECK((eval(sc.RL, lambda) - eval(r, lambda)).norm() <= 1e-8);
  }
}

TEST_CASE("gpe_inverse rejects non-contractive input") {
  Realization r = random_contractive(2, 1, 1);
  Realization inflated(r.A, r.B, CMat(r.C * 10.0), r.D);
  CHECK_THROWS_AS(gpe_inverse(inflated), ValidationError);
}
