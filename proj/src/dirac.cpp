#include "gbdt/dirac.hpp"

#include <algorithm>
#include <cmath>

#include "gbdt/snode.hpp"

namespace gbdt {

CMat signature_j(int p1, int p2) {
  CMat j = CMat::Identity(p1 + p2, p1 + p2);
  j.bottomRightCorner(p2, p2) *= -1.0;
  return j;
}

namespace {

CMat seed_identity_rhs(const DiracSeed& seed) {
  const CMat pi = (CMat(seed.n(), seed.m()) << seed.Phi1, seed.Phi2).finished();
  if (seed.kind == DiracKind::SkewSelfAdjoint)
    return Complex(0, 1) * pi * pi.adjoint();
  return Complex(0, 1) * pi * signature_j(seed.p1, seed.p2) * pi.adjoint();
}

double seed_identity_residual(const DiracSeed& seed) {
  return (seed.A * seed.S0 - seed.S0 * seed.A.adjoint() - seed_identity_rhs(seed))
      .norm();
}

}  // namespace

void validate(const DiracSeed& seed) {
  const int n = seed.n();
  if (seed.A.cols() != n || seed.S0.rows() != n || seed.S0.cols() != n ||
      seed.Phi1.rows() != n || seed.Phi2.rows() != n)
    throw ValidationError("DiracSeed: dimension mismatch");
  if (seed.Phi1.cols() != seed.p1 || seed.Phi2.cols() != seed.p2)
    throw ValidationError("DiracSeed: Phi block widths disagree with p1/p2");
  if (seed.kind != DiracKind::GeneralizedPE) {
    if (seed.p1 != seed.p2)
      throw ValidationError("DiracSeed: p1 == p2 required for this class");
    if ((seed.S0 - CMat::Identity(n, n)).norm() > 1e-12 * std::max(1.0, double(n)))
      throw ValidationError("DiracSeed: S0 must be the identity for this class");
  }
  const double scale =
      seed.A.norm() * std::max(1.0, seed.S0.norm()) +
      seed.Phi1.norm() * seed.Phi1.norm() + seed.Phi2.norm() * seed.Phi2.norm() +
      1e-300;
  if (seed_identity_residual(seed) > 1e-10 * scale)
    throw ValidationError("DiracSeed: seed identity violated");
  if (seed.kind == DiracKind::GeneralizedPE) {
    // S0 is only Hermitian here; indefinite S0 produces the singular
    // potentials this class exists for.
    if ((seed.S0 - seed.S0.adjoint()).norm() > 1e-10 * std::max(1.0, seed.S0.norm()))
      throw ValidationError("DiracSeed: S0 must be Hermitian");
    if (!is_controllable(seed.A, seed.Phi1) || !is_controllable(seed.A, seed.Phi2))
      throw ValidationError("DiracSeed: full-range conditions fail");
    for (const Complex& ev : eigenvalues(seed.A))
      if (ev.imag() < -1e-10 * std::max(1.0, seed.A.norm()))
        throw ValidationError(
            "DiracSeed: spectrum must lie in the closed upper half-plane");
  }
}

CMat dirac_Pi(const DiracSeed& seed, double x) {
  CMat pi(seed.n(), seed.m());
  pi.leftCols(seed.p1) = expm(CMat(Complex(0, -1) * seed.A), x) * seed.Phi1;
  pi.rightCols(seed.p2) = expm(CMat(Complex(0, 1) * seed.A), x) * seed.Phi2;
  return pi;
}

DiracS::DiracS(const DiracSeed& seed) : seed_(seed) {
  sign2_ = (seed.kind == DiracKind::SkewSelfAdjoint) ? -1 : 1;
  double gap = 1e300;
  for (const Complex& a : eigenvalues(seed.A))
    for (const Complex& b : eigenvalues(seed.A))
      gap = std::min(gap, std::abs(a - std::conj(b)));
  closed_ = gap >= 1e-6 && seed.n() > 0;
  if (closed_) {
    CMat m1 = seed.Phi1 * seed.Phi1.adjoint();
    CMat m2 = seed.Phi2 * seed.Phi2.adjoint();
    n1_ = solve_sylvester(seed.A, seed.A.adjoint(), CMat(Complex(0, 1) * m1), 1e-7);
    n2_ = solve_sylvester(seed.A, seed.A.adjoint(), CMat(Complex(0, -1) * m2), 1e-7);
  } else {
    cache_.push_back(seed.S0);
  }
}

CMat DiracS::rhs(double x) const {
  CMat pi = dirac_Pi(seed_, x);
  if (sign2_ < 0)
    return pi * signature_j(seed_.p1, seed_.p2) * pi.adjoint();
  return pi * pi.adjoint();
}

void DiracS::extend(double x) const {
  while ((static_cast<double>(cache_.size()) - 1.0) * h_ < x) {
    if (cache_.size() > 2'200'000)
      throw NumericalError("DiracS: ODE range cap exceeded (spectra too close "
                           "to the real axis for the closed form)");
    const double x0 = (cache_.size() - 1) * h_;
    // One RK4 step for S' = rhs(x) (state-independent right-hand side).
    CMat k1 = rhs(x0), k2 = rhs(x0 + 0.5 * h_), k4 = rhs(x0 + h_);
    cache_.push_back(cache_.back() + (h_ / 6.0) * (k1 + 4.0 * k2 + k4));
  }
}

CMat DiracS::ode_eval(double x) const {
  if (x < 0) throw NumericalError("DiracS: negative x unsupported in ODE mode");
  extend(x);
  const int k = static_cast<int>(x / h_);
  const double x0 = k * h_, dx = x - x0;
  CMat s = cache_[k];
  if (dx > 1e-14) {
    CMat k1 = rhs(x0), k2 = rhs(x0 + 0.5 * dx), k4 = rhs(x0 + dx);
    s += (dx / 6.0) * (k1 + 4.0 * k2 + k4);
  }
  return s;
}

CMat DiracS::operator()(double x) const {
  if (seed_.n() == 0) return CMat(0, 0);
  if (!closed_) return ode_eval(x);
  CMat em = expm(CMat(Complex(0, -1) * seed_.A), x);  // e^{-ixA}
  CMat ep = expm(CMat(Complex(0, 1) * seed_.A), x);   // e^{+ixA}
  // e^{ixA*} = (e^{-ixA})*, e^{-ixA*} = (e^{ixA})*.
  CMat v1 = em * n1_ * em.adjoint() - n1_;
  CMat v2 = ep * n2_ * ep.adjoint() - n2_;
  return seed_.S0 + v1 + double(sign2_) * v2;
}

PotentialSample potential_at(const DiracSeed& seed, const DiracS& s, double x) {
  PotentialSample out;
  if (seed.n() == 0) {
    out.v = CMat::Zero(seed.p1, seed.p2);
    return out;
  }
  CMat sx = s(x);
  Eigen::JacobiSVD<CMat> svd(sx);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * std::max(sv(0), 1e-300)) {
    out.v = CMat::Constant(seed.p1, seed.p2,
                           std::numeric_limits<double>::quiet_NaN());
    out.singular = true;
    return out;
  }
  // Phi1* e^{ixA*} S^{-1} e^{ixA} Phi2; note Phi1* e^{ixA*} = (e^{-ixA} Phi1)*.
  CMat ep = expm(CMat(Complex(0, 1) * seed.A), x);
  CMat left = (expm(CMat(Complex(0, -1) * seed.A), x) * seed.Phi1).adjoint();
  CMat mid = solve_linear(sx, CMat(ep * seed.Phi2));
  const Complex factor = (seed.kind == DiracKind::SkewSelfAdjoint)
                             ? Complex(2, 0)
                             : Complex(0, -2);
  out.v = factor * left * mid;
  return out;
}

SolutionGrid pe_potential(const DiracSeed& seed, const GridSpec& grid) {
  validate(seed);
  DiracS s(seed);
  SolutionGrid out;
  const char* sys = seed.kind == DiracKind::SelfAdjoint    ? "dirac-sa"
                    : seed.kind == DiracKind::GeneralizedPE ? "dirac-gpe"
                                                            : "dirac-skew";
  out.init(grid, seed.p1, seed.p2, sys);
  out.meta["seed_identity_residual"] = {seed_identity_residual(seed)};

  // Locate sign changes of det S (real for Hermitian S) and flag their
  // neighborhoods; only the generalized class can lose invertibility.
  std::vector<double> singular_x;
  if (seed.kind == DiracKind::GeneralizedPE && seed.n() > 0) {
    auto det_re = [&](double x) { return s(x).determinant().real(); };
    double prev = det_re(grid.x(0));
    for (int i = 1; i < grid.nx; ++i) {
      double cur = det_re(grid.x(i));
      if (prev == 0.0) singular_x.push_back(grid.x(i - 1));
      if (prev * cur < 0.0) {
        double lo = grid.x(i - 1), hi = grid.x(i), flo = prev;
        while (hi - lo > 1e-10) {
          double mid = 0.5 * (lo + hi), fm = det_re(mid);
          if (fm == 0.0) { lo = hi = mid; break; }
          if (flo * fm < 0.0)
            hi = mid;
          else {
            lo = mid;
            flo = fm;
          }
        }
        singular_x.push_back(0.5 * (lo + hi));
      }
      prev = cur;
    }
  }

  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    bool near_singular = false;
    for (double xs : singular_x)
      if (std::abs(x - xs) < 1e-6) near_singular = true;
    PotentialSample ps = potential_at(seed, s, x);
    if (near_singular && !ps.singular) {
      ps.v = CMat::Constant(seed.p1, seed.p2,
                            std::numeric_limits<double>::quiet_NaN());
      ps.singular = true;
    }
    if (ps.singular && seed.kind != DiracKind::GeneralizedPE)
      throw NumericalError("pe_potential: S(x) lost positivity unexpectedly");
    out.samples[i] = ps.v;
    out.flags[i] = ps.singular ? 1 : 0;
  }
  return out;
}

CMat dirac_transfer(const DiracSeed& seed, const DiracS& s, double x, Complex lambda) {
  const int n = seed.n(), m = seed.m();
  if (n == 0) return CMat::Identity(m, m);
  CMat pi = dirac_Pi(seed, x);
  CMat shifted = seed.A - lambda * CMat::Identity(n, n);
  CMat z = solve_linear(shifted, pi);
  CMat w = solve_linear(s(x), z);
  if (seed.kind == DiracKind::SkewSelfAdjoint)
    return CMat::Identity(m, m) - Complex(0, 1) * pi.adjoint() * w;
  return CMat::Identity(m, m) -
         Complex(0, 1) * signature_j(seed.p1, seed.p2) * pi.adjoint() * w;
}

namespace {

CMat exp_ixlj(const DiracSeed& seed, double x, Complex lambda) {
  CMat e = CMat::Zero(seed.m(), seed.m());
  const Complex up = std::exp(Complex(0, 1) * lambda * x);
  const Complex dn = std::exp(Complex(0, -1) * lambda * x);
  e.topLeftCorner(seed.p1, seed.p1) = up * CMat::Identity(seed.p1, seed.p1);
  e.bottomRightCorner(seed.p2, seed.p2) = dn * CMat::Identity(seed.p2, seed.p2);
  return e;
}

// w_A(0, lambda)^{-1} = I + Pi2*(A2 - lambda I)^{-1} S^{-1} Pi1 with the
// class-specific Pi2.
CMat transfer_inverse_at0(const DiracSeed& seed, const DiracS& s, Complex lambda) {
  const int n = seed.n(), m = seed.m();
  if (n == 0) return CMat::Identity(m, m);
  CMat pi0 = dirac_Pi(seed, 0.0);
  CMat pi2star = (seed.kind == DiracKind::SkewSelfAdjoint)
                     ? CMat(Complex(0, 1) * pi0.adjoint())
                     : CMat(Complex(0, 1) * signature_j(seed.p1, seed.p2) *
                            pi0.adjoint());
  CMat y = solve_linear(s(0.0), pi0);
  CMat shifted = seed.A.adjoint() - lambda * CMat::Identity(n, n);
  return CMat::Identity(m, m) + pi2star * solve_linear(shifted, y);
}

}  // namespace

CMat fundamental_solution(const DiracSeed& seed, double x, Complex lambda) {
  validate(seed);
  DiracS s(seed);
  CMat w = dirac_transfer(seed, s, x, lambda);
  CMat e = exp_ixlj(seed, x, lambda);
  if (seed.kind == DiracKind::GeneralizedPE) return w * e;
  return w * e * transfer_inverse_at0(seed, s, lambda);
}

WeylFunction weyl_direct(const DiracSeed& seed) {
  if (seed.kind != DiracKind::SelfAdjoint)
    throw ValidationError("weyl_direct: self-adjoint seed required");
  validate(seed);
  const int p = seed.p1;
  CMat a_shifted = seed.A - Complex(0, 1) * seed.Phi1 * (seed.Phi1 + seed.Phi2).adjoint();
  WeylFunction out;
  out.realization = Realization(a_shifted, seed.Phi1, CMat(2.0 * seed.Phi2.adjoint()),
                                CMat(Complex(0, 1) * CMat::Identity(p, p)));
  out.halfplane = WeylFunction::Halfplane::Upper;
  return out;
}

WeylFunction skew_weyl_direct(const DiracSeed& seed, double x1, int nx) {
  if (seed.kind != DiracKind::SkewSelfAdjoint)
    throw ValidationError("skew_weyl_direct: skew seed required");
  validate(seed);
  const int p = seed.p1;
  CMat a_shifted = seed.A - Complex(0, 1) * seed.Phi2 * seed.Phi2.adjoint();
  WeylFunction out;
  out.realization = Realization(a_shifted, seed.Phi2,
                                CMat(Complex(0, 1) * seed.Phi1.adjoint()),
                                CMat::Zero(p, p));
  out.halfplane = WeylFunction::Halfplane::Lower;

  DiracS s(seed);
  double sup = 0.0;
  GridSpec grid(0.0, x1, nx);
  for (int i = 0; i < nx; ++i) {
    PotentialSample ps = potential_at(seed, s, grid.x(i));
    if (!ps.singular) sup = std::max(sup, ps.v.operatorNorm());
  }
  out.bound_M = sup;
  return out;
}

Realization reflection_from_weyl(const WeylFunction& phi) {
  if (phi.halfplane != WeylFunction::Halfplane::Upper)
    throw ValidationError("reflection_from_weyl: upper-half-plane Weyl required");
  const Realization& r = phi.realization;
  const int p = r.out_dim();
  if ((r.D - Complex(0, 1) * CMat::Identity(p, p)).norm() > 1e-8 * std::max(1.0, r.D.norm()))
    throw ValidationError("reflection_from_weyl: phi(infinity) = iI required");

  // I + i phi is strictly proper (its D part vanishes); I - i phi has D = 2I.
  Realization num(r.A, r.B, CMat(Complex(0, -1) * r.C), CMat::Zero(p, p));
  Realization den(r.A, r.B, CMat(Complex(0, -1) * r.C),
                  CMat(2.0 * CMat::Identity(p, p)));
  Realization rl = minimal_realize(product(num, invert_biproper(den)));

  // Contractivity spot-check on the real axis.
  for (int k = 0; k < 50; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double lam = sign * std::pow(10.0, -1.0 + 4.0 * k / 49.0);
    CMat val;
    try {
      val = eval(rl, Complex(lam, 0));
    } catch (const NumericalError&) {
      throw NumericalError("reflection_from_weyl: Cayley transform singular on "
                           "the sample set");
    }
    if (val.operatorNorm() > 1.0 + 1e-6)
      throw NumericalError("reflection_from_weyl: reflection not contractive");
  }
  return rl;
}

namespace {

void require_herglotz_samples(const Realization& phi) {
  for (int k = 0; k < 30; ++k) {
    const double r = std::pow(10.0, 3.0 * k / 29.0);
    CMat val = eval(phi, Complex(0, r));
    CMat im = (val - val.adjoint()) / Complex(0, 2);
    if (min_eig_hermitian(im) < -1e-10 * std::max(1.0, val.norm()))
      throw ValidationError("weyl_inverse: sampled function is not Herglotz");
  }
}

}  // namespace

DiracSeed weyl_inverse(const Realization& phi) {
  const int p = phi.out_dim();
  if (phi.in_dim() != p) throw ValidationError("weyl_inverse: phi must be square");
  if ((phi.D - Complex(0, 1) * CMat::Identity(p, p)).norm() >
      1e-8 * std::max(1.0, phi.D.norm()))
    throw ValidationError("weyl_inverse: phi(infinity) = iI required");
  require_herglotz_samples(phi);

  WeylFunction wf;
  wf.realization = phi;
  wf.halfplane = WeylFunction::Halfplane::Upper;
  Realization rl = reflection_from_weyl(wf);

  const int n = rl.order();
  DiracSeed seed;
  seed.kind = DiracKind::SelfAdjoint;
  seed.p1 = seed.p2 = p;
  if (n == 0) {
    seed.A = CMat(0, 0);
    seed.S0 = CMat(0, 0);
    seed.Phi1 = CMat(0, p);
    seed.Phi2 = CMat(0, p);
    return seed;
  }
  CMat x = solve_inverse_riccati(RiccatiForm::SaDirac, rl.A, rl.B, rl.C);
  CMat xh = sqrtm_posdef(x), xih = inv_sqrtm_posdef(x);
  seed.A = xih * rl.A * xh + Complex(0, 1) * xih * rl.B * rl.B.adjoint() * xih;
  seed.S0 = CMat::Identity(n, n);
  seed.Phi1 = xih * rl.B;
  seed.Phi2 = Complex(0, -1) * xh * rl.C.adjoint();
  validate(seed);
  return seed;
}

GpeScattering gpe_scattering(const DiracSeed& seed) {
  if (seed.kind != DiracKind::GeneralizedPE)
    throw ValidationError("gpe_scattering: generalized seed required");
  validate(seed);
  const int n = seed.n();
  const int p1 = seed.p1, p2 = seed.p2;
  CMat s0inv = solve_linear(seed.S0, CMat::Identity(n, n));
  CMat theta = seed.A - Complex(0, 1) * seed.Phi1 * seed.Phi1.adjoint() * s0inv;

  // omega = lim (e^{-ixA} S(x) e^{ixA*})^{-1} by doubling with a Cauchy stop.
  DiracS s(seed);
  CMat omega = CMat::Zero(n, n);
  bool converged = n == 0;
  double x = 1.0;
  CMat prev;
  bool have_prev = false;
  while (x <= 32768.0 && !converged) {
    CMat ep, sx;
    try {
      ep = expm(CMat(Complex(0, 1) * seed.A), x);
      sx = s(x);
    } catch (const NumericalError&) {
      break;
    }
    if (!all_finite(ep) || !all_finite(sx)) break;
    CMat cur;
    try {
      // (e^{-ixA} S e^{ixA*})^{-1} = e^{-ixA*} S^{-1} e^{ixA}, and
      // e^{-ixA*} = (e^{ixA})*.  S(x) grows exponentially here, so no
      // condition cap: the Cauchy criterion below is the accuracy gate.
      cur = ep.adjoint() * solve_linear(sx, ep, 1e300);
    } catch (const NumericalError&) {
      break;
    }
    if (!all_finite(cur)) break;
    if (have_prev && (cur - prev).norm() <= 1e-8 * std::max(1.0, cur.norm())) {
      omega = cur;
      converged = true;
      break;
    }
    prev = cur;
    have_prev = true;
    x *= 2.0;
  }
  if (!converged && n > 0) {
    if (have_prev && prev.norm() <= 1e-10)
      omega = CMat::Zero(n, n);  // overflow after a decayed iterate: limit is 0
    else
      throw NumericalError("gpe_scattering: omega limit did not converge");
  }
  omega = 0.5 * (omega + omega.adjoint());

  GpeScattering out;
  out.omega = omega;
  CMat c1 = Complex(0, -1) * seed.Phi1.adjoint() * s0inv;
  CMat c2 = Complex(0, -1) * seed.Phi2.adjoint() * s0inv;
  CMat bo = (CMat::Identity(n, n) - seed.S0 * omega) * seed.Phi2;
  out.TL = Realization(theta, seed.Phi1, c1, CMat::Identity(p1, p1));
  out.RL = Realization(theta, seed.Phi1, c2, CMat::Zero(p2, p1));
  out.TR = Realization(theta, bo, c2, CMat::Identity(p2, p2));
  // R_R is the sum of two first-order parts: direct-sum realization.
  CMat arr = CMat::Zero(2 * n, 2 * n);
  arr.topLeftCorner(n, n) = theta;
  arr.bottomRightCorner(n, n) = seed.A.adjoint();
  CMat brr(2 * n, p2);
  brr.topRows(n) = bo;
  brr.bottomRows(n) = omega * seed.Phi2;
  CMat crr(p1, 2 * n);
  crr.leftCols(n) = c1;
  crr.rightCols(n) = Complex(0, -1) * seed.Phi1.adjoint();
  out.RR = Realization(arr, brr, crr, CMat::Zero(p1, p2));
  return out;
}

namespace {

void require_contractive_on_real_axis(const Realization& r, int samples) {
  for (int k = 0; k < samples; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double mag = std::pow(10.0, -2.0 + 5.0 * k / (samples - 1.0));
    CMat val = eval(r, Complex(sign * mag, 0));
    if (val.operatorNorm() > 1.0 + 1e-9)
      throw ValidationError("reflection data not contractive on the real axis");
  }
}

}  // namespace

DiracSeed gpe_inverse(const Realization& r) {
  if (r.D.norm() > 1e-12 * std::max(1.0, r.C.norm() * r.B.norm()))
    throw ValidationError("gpe_inverse: reflection must be strictly proper");
  require_contractive_on_real_axis(r, 100);
  Realization rmin = minimal_realize(r);
  const int n = rmin.order();
  const int p1 = r.in_dim(), p2 = r.out_dim();

  DiracSeed seed;
  seed.kind = DiracKind::GeneralizedPE;
  seed.p1 = p1;
  seed.p2 = p2;
  if (n == 0) {
    seed.A = CMat(0, 0);
    seed.S0 = CMat(0, 0);
    seed.Phi1 = CMat(0, p1);
    seed.Phi2 = CMat(0, p2);
    return seed;
  }
  CMat x = solve_inverse_riccati(RiccatiForm::Gpe, rmin.A, rmin.B, rmin.C);
  CMat s0 = solve_linear(x, CMat::Identity(n, n));
  s0 = 0.5 * (s0 + s0.adjoint());
  seed.A = rmin.A + Complex(0, 1) * rmin.B * rmin.B.adjoint() * x;
  seed.S0 = s0;
  seed.Phi1 = rmin.B;
  seed.Phi2 = Complex(0, -1) * s0 * rmin.C.adjoint();
  try {
    validate(seed);
  } catch (const ValidationError& e) {
    throw NumericalError(std::string("gpe_inverse: recovered seed inadmissible (") +
                         e.what() + ")");
  }
  return seed;
}

DiracSeed skew_weyl_inverse(const Realization& phi) {
  const int p = phi.out_dim();
  if (phi.in_dim() != p) throw ValidationError("skew_weyl_inverse: phi must be square");
  if (phi.D.norm() > 1e-12 * std::max(1.0, phi.C.norm() * phi.B.norm()))
    throw ValidationError("skew_weyl_inverse: phi must be strictly proper");
  Realization rmin = minimal_realize(phi);
  const int n = rmin.order();

  DiracSeed seed;
  seed.kind = DiracKind::SkewSelfAdjoint;
  seed.p1 = seed.p2 = p;
  if (n == 0) {
    seed.A = CMat(0, 0);
    seed.S0 = CMat(0, 0);
    seed.Phi1 = CMat(0, p);
    seed.Phi2 = CMat(0, p);
    return seed;
  }
  CMat x = solve_inverse_riccati(RiccatiForm::Skew, rmin.A, rmin.B, rmin.C);
  CMat xh = sqrtm_posdef(x), xih = inv_sqrtm_posdef(x);
  seed.A = xih * rmin.A * xh + Complex(0, 1) * xih * rmin.B * rmin.B.adjoint() * xih;
  seed.S0 = CMat::Identity(n, n);
  seed.Phi1 = Complex(0, 1) * xh * rmin.C.adjoint();
  seed.Phi2 = xih * rmin.B;
  validate(seed);
  return seed;
}

}  // namespace gbdt
