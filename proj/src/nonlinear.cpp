#include "gbdt/nonlinear.hpp"

#include <cmath>

#include "gbdt/snode.hpp"

namespace gbdt {

namespace {

CMat diag_real(const Eigen::VectorXd& d) {
  CMat m = CMat::Zero(d.size(), d.size());
  for (int i = 0; i < d.size(); ++i) m(i, i) = d(i);
  return m;
}

double spectral_selfgap(const CMat& a) {
  double gap = 1e300;
  auto ev = eigenvalues(a);
  for (const Complex& x : ev)
    for (const Complex& y : ev) gap = std::min(gap, std::abs(x - std::conj(y)));
  return gap;
}

// Smallest-to-largest singular value ratio; empty matrices count as regular.
double sv_ratio(const CMat& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::JacobiSVD<CMat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

}  // namespace

void validate(const NWaveSeed& seed, bool weyl_subcase) {
  if (seed.A.rows() != seed.n || seed.A.cols() != seed.n ||
      seed.S0.rows() != seed.n || seed.Pi0.rows() != seed.n ||
      seed.Pi0.cols() != seed.m || seed.D.size() != seed.m ||
      seed.Dhat.size() != seed.m || seed.B.size() != seed.m)
    throw ValidationError("NWaveSeed: dimension mismatch");
  for (int i = 0; i < seed.m; ++i)
    if (std::abs(std::abs(seed.B(i)) - 1.0) > 0)
      throw ValidationError("NWaveSeed: B must be a +-1 signature diagonal");
  const CMat rhs =
      Complex(0, 1) * seed.Pi0 * diag_real(seed.B) * seed.Pi0.adjoint();
  const double scale = seed.A.norm() * std::max(1.0, seed.S0.norm()) +
                       seed.Pi0.norm() * seed.Pi0.norm() + 1e-300;
  if ((seed.A * seed.S0 - seed.S0 * seed.A.adjoint() - rhs).norm() > 1e-10 * scale)
    throw ValidationError("NWaveSeed: seed identity violated");
  if (!is_posdef(seed.S0))
    throw ValidationError("NWaveSeed: S0 must be positive definite");
  if (weyl_subcase) {
    for (int i = 0; i < seed.m; ++i) {
      if (seed.B(i) != 1.0)
        throw ValidationError("NWaveSeed: Weyl subcase needs B = I");
      if (seed.D(i) <= 0.0 || (i > 0 && seed.D(i - 1) <= seed.D(i)))
        throw ValidationError("NWaveSeed: Weyl subcase needs d_1 > ... > d_m > 0");
    }
  }
}

CMat nwave_Pi(const NWaveSeed& seed, double x, double t) {
  CMat pi(seed.n, seed.m);
  for (int k = 0; k < seed.m; ++k) {
    const double phase = seed.D(k) * x + seed.Dhat(k) * t;
    pi.col(k) = expm(CMat(Complex(0, -1) * seed.A), phase) * seed.Pi0.col(k);
  }
  return pi;
}

NWaveS::NWaveS(const NWaveSeed& seed) : seed_(seed) {
  closed_ = seed.n > 0 && spectral_selfgap(seed.A) >= 1e-6;
}

CMat NWaveS::integrate_line(double s_from, double s_to, double fixed, bool sweep_x,
                            const CMat& from) const {
  // State-independent right-hand side: Simpson steps give RK4 accuracy.
  const double len = std::abs(s_to - s_from);
  if (len < 1e-15) return from;
  const int steps = std::max(4, static_cast<int>(len * 1000));
  const double h = (s_to - s_from) / steps;
  const CMat db = diag_real(sweep_x ? seed_.D : seed_.Dhat) * diag_real(seed_.B);
  auto rhs = [&](double s) {
    CMat pi = sweep_x ? nwave_Pi(seed_, s, fixed) : nwave_Pi(seed_, fixed, s);
    return CMat(pi * db * pi.adjoint());
  };
  CMat acc = from;
  for (int i = 0; i < steps; ++i) {
    const double s0 = s_from + i * h;
    acc += (h / 6.0) * (rhs(s0) + 4.0 * rhs(s0 + 0.5 * h) + rhs(s0 + h));
  }
  return acc;
}

CMat NWaveS::operator()(double x, double t) const {
  if (seed_.n == 0) return CMat(0, 0);
  if (closed_) {
    CMat pi = nwave_Pi(seed_, x, t);
    CMat rhs = Complex(0, 1) * pi * diag_real(seed_.B) * pi.adjoint();
    return solve_sylvester(seed_.A, CMat(seed_.A.adjoint()), rhs, 1e-7);
  }
  CMat s_line = integrate_line(0.0, t, 0.0, false, seed_.S0);  // along x = 0
  return integrate_line(0.0, x, t, true, s_line);              // then in x
}

NWaveSolution nwave_solution(const NWaveSeed& seed, const GridSpec& grid) {
  validate(seed, false);
  if (!grid.has_t) throw ValidationError("nwave_solution: 2-D grid required");
  NWaveS s(seed);

  NWaveSolution out;
  out.xi_gauge.init(grid, seed.m, seed.m, "nwave");
  out.xi_weyl.init(grid, seed.m, seed.m, "nwave");
  std::vector<double> dv(seed.D.data(), seed.D.data() + seed.m);
  std::vector<double> dhv(seed.Dhat.data(), seed.Dhat.data() + seed.m);
  std::vector<double> bv(seed.B.data(), seed.B.data() + seed.m);
  for (auto* g : {&out.xi_gauge, &out.xi_weyl}) {
    g->meta["D"] = dv;
    g->meta["Dhat"] = dhv;
    g->meta["B"] = bv;
  }

  const CMat bmat = diag_real(seed.B);
  for (int k = 0; k < grid.nt; ++k) {
    // In the swept (non-closed-form) mode, carry S along each t-slice instead
    // of re-integrating per sample.
    CMat s_carry;
    if (!s.closed_form()) s_carry = s(grid.x0, grid.t(k));
    for (int i = 0; i < grid.nx; ++i) {
      const size_t idx = out.xi_gauge.index(i, k);
      CMat sx;
      if (s.closed_form()) {
        sx = s(grid.x(i), grid.t(k));
      } else {
        if (i > 0)
          s_carry = s.integrate_line(grid.x(i - 1), grid.x(i), grid.t(k), true,
                                     s_carry);
        sx = s_carry;
      }
      CMat pi = nwave_Pi(seed, grid.x(i), grid.t(k));
      if (sv_ratio(sx) <= 1e-10) {
        out.xi_gauge.samples[idx] =
            CMat::Constant(seed.m, seed.m, std::numeric_limits<double>::quiet_NaN());
        out.xi_weyl.samples[idx] = out.xi_gauge.samples[idx];
        out.xi_gauge.flags[idx] = out.xi_weyl.flags[idx] = 1;
        continue;
      }
      CMat core = pi.adjoint() * solve_linear(sx, pi);
      out.xi_gauge.samples[idx] = -bmat * core;
      out.xi_weyl.samples[idx] = core;
    }
  }
  return out;
}

Realization nwave_weyl(const NWaveSeed& seed, double t) {
  validate(seed, true);
  NWaveS s(seed);
  CMat st = s(0.0, t);
  if (!is_posdef(st))
    throw NumericalError("nwave_weyl: S(0,t) lost positivity");
  CMat pi = nwave_Pi(seed, 0.0, t);
  CMat c = Complex(0, 1) *
           solve_linear(st.adjoint(), pi).adjoint();  // i Pi* S^{-1}
  return Realization(seed.A, pi, c, CMat::Identity(seed.m, seed.m));
}

NWaveSeed nwave_inverse(const Realization& phi, const Eigen::VectorXd& d,
                        const Eigen::VectorXd& dh) {
  const int m = phi.out_dim();
  if (phi.in_dim() != m) throw ValidationError("nwave_inverse: phi must be square");
  if ((phi.D - CMat::Identity(m, m)).norm() > 1e-8 * std::max(1.0, phi.D.norm()))
    throw ValidationError("nwave_inverse: phi(infinity) = I required");

  // Sampled admissibility: phi(lambda) phi(conj lambda)* = I and
  // contractivity in the lower half-plane.
  for (int k = 0; k < 20; ++k) {
    const double re = -5.0 + 10.0 * k / 19.0;
    const Complex lambda(re, -1.5 - 0.1 * k);
    CMat p1 = eval(phi, lambda);
    CMat p2 = eval(phi, std::conj(lambda));
    if ((p1 * p2.adjoint() - CMat::Identity(m, m)).norm() > 1e-8 * std::max(1.0, p1.norm()))
      throw ValidationError("nwave_inverse: phi(lambda) phi(conj lambda)* != I");
    if (p1.operatorNorm() > 1.0 + 1e-8)
      throw ValidationError("nwave_inverse: phi not contractive in the lower half-plane");
  }

  Realization rmin = minimal_realize(phi);
  const int n = rmin.order();
  NWaveSeed seed;
  seed.n = n;
  seed.m = m;
  seed.D = d.size() == m ? d : [&] {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = m - i;
    return v;
  }();
  seed.Dhat = dh.size() == m ? dh : [&] {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = 1.0 + 0.5 * i;
    return v;
  }();
  seed.B = Eigen::VectorXd::Ones(m);
  if (n == 0) {
    seed.A = CMat(0, 0);
    seed.S0 = CMat(0, 0);
    seed.Pi0 = CMat(0, m);
    return seed;
  }
  for (const Complex& ev : eigenvalues(rmin.A))
    if (ev.imag() <= 1e-12 * std::max(1.0, rmin.A.norm()))
      throw NumericalError(
          "nwave_inverse: spectrum not in the open upper half-plane; the "
          "recovery identity has no unique positive solution");
  CMat s0 = solve_sylvester(rmin.A, CMat(rmin.A.adjoint()),
                            CMat(Complex(0, 1) * rmin.B * rmin.B.adjoint()));
  s0 = 0.5 * (s0 + s0.adjoint());
  if (!is_posdef(s0))
    throw NumericalError("nwave_inverse: recovered S0 not positive definite");
  seed.A = rmin.A;
  seed.S0 = s0;
  seed.Pi0 = rmin.B;
  validate(seed, true);
  return seed;
}

void validate(const NlsSeed& seed) {
  const int n = static_cast<int>(seed.a.size());
  if (static_cast<int>(seed.f.size()) != n)
    throw ValidationError("NlsSeed: a and f lengths differ");
  for (int k = 0; k < n; ++k) {
    if (seed.f[k].norm() == 0.0) throw ValidationError("NlsSeed: f_k must be nonzero");
    for (int l = 0; l < n; ++l)
      if (std::abs(seed.a[k] - std::conj(seed.a[l])) < 1e-12)
        throw ValidationError("NlsSeed: a_k = conj(a_l) breaks the S formula");
  }
}

bool global_positivity(const NlsSeed& seed) {
  const int n = static_cast<int>(seed.a.size());
  for (int k = 0; k < n; ++k) {
    if (seed.a[k].imag() <= 0.0) return false;
    for (int l = k + 1; l < n; ++l)
      if (std::abs(seed.a[k] - seed.a[l]) < 1e-12) return false;
  }
  return true;
}

namespace {

// Column solution u(x,t,lambda) f of the auxiliary systems for the chosen
// background, evaluated entrywise in closed form.
Eigen::Vector2cd nls_u_times(const NlsSeed& seed, double x, double t, Complex lambda,
                             const Eigen::Vector2cd& f) {
  if (seed.background == NlsSeed::Background::Zero) {
    const Complex ph = Complex(0, 1) * (lambda * x + lambda * lambda * t);
    return {std::exp(ph) * f(0), std::exp(-ph) * f(1)};
  }
  const Complex root = std::sqrt(Complex(1, 0) + lambda * lambda);
  const Complex e1 = std::exp(Complex(0, -1) * root * (x + lambda * t));
  const Complex e2 = std::exp(Complex(0, 1) * root * (x + lambda * t));
  // C0(lambda) columns weighted by the diagonal exponential, then f.
  const Complex c021 = Complex(0, -1) * (root + lambda);
  const Complex c022 = Complex(0, 1) * (root - lambda);
  Eigen::Vector2cd col1(e1, c021 * e1), col2(e2, c022 * e2);
  Eigen::Vector2cd pre = col1 * f(0) + col2 * f(1);
  pre(0) *= std::exp(Complex(0, -t / 2.0));
  pre(1) *= std::exp(Complex(0, t / 2.0));
  return pre;
}

}  // namespace

CMat nls_background_u(const NlsSeed& seed, double x, double t, Complex lambda) {
  CMat u(2, 2);
  u.col(0) = nls_u_times(seed, x, t, lambda, Eigen::Vector2cd(1.0, 0.0));
  u.col(1) = nls_u_times(seed, x, t, lambda, Eigen::Vector2cd(0.0, 1.0));
  return u;
}

CMat nls_Pi(const NlsSeed& seed, double x, double t) {
  const int n = static_cast<int>(seed.a.size());
  CMat pi(n, 2);
  for (int k = 0; k < n; ++k) {
    Eigen::Vector2cd y = nls_u_times(seed, x, t, std::conj(seed.a[k]), seed.f[k]);
    pi(k, 0) = std::conj(y(0));
    pi(k, 1) = std::conj(y(1));
  }
  return pi;
}

CMat nls_S(const NlsSeed& seed, double x, double t) {
  const int n = static_cast<int>(seed.a.size());
  CMat pi = nls_Pi(seed, x, t);
  CMat s(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      Complex dot = pi.row(k).dot(pi.row(j));  // conjugates the first factor
      s(k, j) = Complex(0, 1) * std::conj(dot) / (seed.a[k] - std::conj(seed.a[j]));
    }
  return s;
}

SolutionGrid nls_solution(const NlsSeed& seed, const GridSpec& grid) {
  validate(seed);
  if (!grid.has_t) throw ValidationError("nls_solution: 2-D grid required");
  const int n = static_cast<int>(seed.a.size());
  SolutionGrid out;
  out.init(grid, 1, 1, "nls");

  for (int k = 0; k < grid.nt; ++k)
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i), t = grid.t(k);
      Complex v = seed.background == NlsSeed::Background::PlaneWave
                      ? std::exp(Complex(0, -t))
                      : Complex(0, 0);
      const size_t idx = out.index(i, k);
      if (n == 0) {
        out.samples[idx](0, 0) = v;
        continue;
      }
      CMat pi = nls_Pi(seed, x, t);
      CMat s = nls_S(seed, x, t);
      if (sv_ratio(s) <= 1e-12) {
        out.samples[idx](0, 0) = std::numeric_limits<double>::quiet_NaN();
        out.flags[idx] = 1;
        continue;
      }
      CMat core = pi.adjoint() * solve_linear(s, pi);
      out.samples[idx](0, 0) = v + 2.0 * core(0, 1);
    }
  return out;
}

ChiralResult chiral_transform(const ChiralSeed& seed, const ChiralBackground& bg,
                              const GridSpec& grid, int substeps) {
  const int n = static_cast<int>(seed.A1.rows());
  const int m = bg.m;
  if (!grid.has_t) throw ValidationError("chiral_transform: 2-D grid required");
  if (std::abs(seed.A1.determinant()) < 1e-12 || std::abs(seed.A2.determinant()) < 1e-12)
    throw ValidationError("chiral_transform: A1, A2 must be invertible");

  RationalCoeffs2 g, f;
  g.m = f.m = m;
  g.poly.push_back([m](double, double) { return CMat::Zero(m, m); });
  f.poly.push_back([m](double, double) { return CMat::Zero(m, m); });
  RationalCoeffs2::PoleGroup pg;
  pg.c = Complex(1, 0);
  pg.parts.push_back([&bg](double x, double t) {
    return CMat(bg.zx(x, t) * solve_linear(bg.z(x, t),
                                           CMat::Identity(bg.m, bg.m)));
  });
  g.poles.push_back(pg);
  RationalCoeffs2::PoleGroup pf;
  pf.c = Complex(-1, 0);
  pf.parts.push_back([&bg](double x, double t) {
    return CMat(-bg.zt(x, t) * solve_linear(bg.z(x, t),
                                            CMat::Identity(bg.m, bg.m)));
  });
  f.poles.push_back(pf);

  Gbdt2D st = evolve_2d(g, f, seed.A1, seed.A2, seed.S0, seed.Pi1_0, seed.Pi2_0,
                        grid, substeps);

  ChiralResult out;
  out.ztilde.init(grid, m, m, "chiral");
  out.min_abs_det_w = 1e300;
  for (int k = 0; k < grid.nt; ++k)
    for (int i = 0; i < grid.nx; ++i) {
      const size_t idx = st.index(i, k);
      CMat sx = st.S[idx];
      if (sv_ratio(sx) <= 1e-12) {
        out.ztilde.samples[idx] =
            CMat::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
        out.ztilde.flags[idx] = 1;
        continue;
      }
      // w_A(x,t,0) = I - Pi2* S^{-1} A1^{-1} Pi1
      CMat w = CMat::Identity(m, m) -
               st.Pi2star[idx] * solve_linear(sx, solve_linear(seed.A1, st.Pi1[idx]));
      const double det = std::abs(w.determinant());
      out.min_abs_det_w = std::min(out.min_abs_det_w, det);
      CMat zt = w * bg.z(grid.x(i), grid.t(k));
      if (det < 1e-12) {
        out.ztilde.samples[idx] =
            CMat::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
        out.ztilde.flags[idx] = 1;
      } else {
        out.ztilde.samples[idx] = zt;
      }
    }
  return out;
}

void validate(const EllipticSeed& seed) {
  const int n = seed.n;
  if (seed.A.rows() != n || seed.A.cols() != n || seed.Pi0.rows() != n ||
      seed.Pi0.cols() != 2 || seed.S0.rows() != n || seed.S0.cols() != n ||
      seed.U.rows() != n || seed.U.cols() != n)
    throw ValidationError("EllipticSeed: dimension mismatch");
  if (n == 0) return;
  if (std::abs(seed.A.determinant()) < 1e-12)
    throw ValidationError("EllipticSeed: A must be invertible");
  const double sscale = std::max(1.0, seed.S0.norm());
  if ((seed.S0 - seed.S0.adjoint()).norm() > 1e-10 * sscale)
    throw ValidationError("EllipticSeed: S0 must be Hermitian");

  const CMat jj = pauli(1);  // J with p = 1
  const CMat ainv = solve_linear(seed.A, CMat::Identity(n, n));
  const double ascale = std::max(1.0, seed.A.norm());
  if ((seed.A.conjugate() - seed.U * ainv * solve_linear(seed.U, CMat::Identity(n, n)))
          .norm() > 1e-10 * ascale)
    throw ValidationError("EllipticSeed: conjugation symmetry of A fails");
  const CMat sconj_expect = seed.U * seed.A * seed.S0 * seed.A.adjoint() * seed.U.adjoint();
  if ((seed.S0.conjugate() - sconj_expect).norm() > 1e-10 * std::max(1.0, sconj_expect.norm()))
    throw ValidationError("EllipticSeed: conjugation symmetry of S0 fails");

  const double pscale = std::max(1.0, seed.Pi0.norm());
  CMat lhs = seed.A * seed.S0 * seed.A.adjoint() + seed.S0;
  if (seed.variant == EllipticSeed::Variant::SineGordon) {
    if ((seed.Pi0.conjugate() - seed.U * seed.Pi0).norm() > 1e-10 * pscale)
      throw ValidationError("EllipticSeed: conjugation symmetry of Pi0 fails");
    if ((lhs - seed.Pi0 * jj * seed.Pi0.adjoint()).norm() > 1e-10 * std::max(1.0, lhs.norm()))
      throw ValidationError("EllipticSeed: seed identity (sine-Gordon) fails");
  } else {
    if ((seed.Pi0.conjugate() - seed.U * seed.Pi0 * jj).norm() > 1e-10 * pscale)
      throw ValidationError("EllipticSeed: conjugation symmetry of Pi0 fails");
    if ((lhs - seed.Pi0 * seed.Pi0.adjoint()).norm() > 1e-10 * std::max(1.0, lhs.norm()))
      throw ValidationError("EllipticSeed: seed identity (sinh-Gordon) fails");
  }
}

EllipticResult elliptic_transform(const EllipticSeed& seed, const ScalarBackground& bg,
                                  const GridSpec& grid, int substeps) {
  validate(seed);
  if (!grid.has_t) throw ValidationError("elliptic_transform: 2-D grid required");
  const int n = seed.n;
  const CMat jj = pauli(1);
  const CMat j3 = pauli(3);
  const bool sine = seed.variant == EllipticSeed::Variant::SineGordon;

  auto zeta = [&](double x, double t) {
    const double v = bg.v(x, t);
    CMat z = CMat::Zero(2, 2);
    if (sine) {
      z(0, 1) = std::exp(Complex(0, -v / 2.0));
      z(1, 0) = std::exp(Complex(0, v / 2.0));
    } else {
      z(0, 1) = std::exp(-v / 2.0);
      z(1, 0) = std::exp(v / 2.0);
    }
    return z;
  };

  RationalCoeffs2 g, f;
  g.m = f.m = 2;
  if (sine) {
    g.poly.push_back([&](double x, double t) { return CMat(-bg.vt(x, t) / 4.0 * j3); });
    g.poly.push_back([&](double x, double t) { return CMat(Complex(0, -0.25) * zeta(x, t)); });
    RationalCoeffs2::PoleGroup pg;
    pg.c = Complex(0, 0);
    pg.parts.push_back([&](double x, double t) {
      return CMat(Complex(0, 0.25) * jj * zeta(x, t) * jj);
    });
    g.poles.push_back(pg);

    f.poly.push_back([&](double x, double t) { return CMat(bg.vx(x, t) / 4.0 * j3); });
    f.poly.push_back([&](double x, double t) { return CMat(0.25 * zeta(x, t)); });
    RationalCoeffs2::PoleGroup pf;
    pf.c = Complex(0, 0);
    pf.parts.push_back([&](double x, double t) {
      return CMat(0.25 * jj * zeta(x, t) * jj);
    });
    f.poles.push_back(pf);
  } else {
    g.poly.push_back([&](double x, double t) {
      return CMat(Complex(0, -0.25) * bg.vt(x, t) * j3);
    });
    g.poly.push_back([&](double x, double t) { return CMat(0.25 * zeta(x, t)); });
    RationalCoeffs2::PoleGroup pg;
    pg.c = Complex(0, 0);
    pg.parts.push_back([&](double x, double t) {
      return CMat(0.25 * zeta(x, t).adjoint());
    });
    g.poles.push_back(pg);

    f.poly.push_back([&](double x, double t) {
      return CMat(Complex(0, 0.25) * bg.vx(x, t) * j3);
    });
    f.poly.push_back([&](double x, double t) {
      return CMat(Complex(0, -0.25) * zeta(x, t));
    });
    RationalCoeffs2::PoleGroup pf;
    pf.c = Complex(0, 0);
    pf.parts.push_back([&](double x, double t) {
      return CMat(Complex(0, 0.25) * zeta(x, t).adjoint());
    });
    f.poles.push_back(pf);
  }

  const CMat a2 = -solve_linear(CMat(seed.A.adjoint()), CMat::Identity(n, n));
  const CMat pi2_0 = sine ? CMat(solve_linear(seed.A, seed.Pi0) * jj)
                          : CMat(solve_linear(seed.A, seed.Pi0));
  Gbdt2D st = evolve_2d(g, f, seed.A, a2, seed.S0, seed.Pi0, pi2_0, grid, substeps);

  EllipticResult out;
  out.vhat.init(grid, 1, 1, sine ? "sine-gordon" : "sinh-gordon");
  out.Z.assign(st.S.size(), CMat());

  // Z(x,t) = w_A(x,t,0) = I - Pi2* S^{-1} A^{-1} Pi1 at every sample.
  std::vector<Complex> phase(st.S.size(), Complex(0, 0));
  for (int k = 0; k < grid.nt; ++k)
    for (int i = 0; i < grid.nx; ++i) {
      const size_t idx = st.index(i, k);
      CMat sx = st.S[idx];
      if (sv_ratio(sx) <= 1e-12) {
        out.vhat.flags[idx] = 1;
        out.Z[idx] = CMat::Zero(2, 2);
        continue;
      }
      CMat z = CMat::Identity(2, 2) -
               st.Pi2star[idx] *
                   solve_linear(sx, solve_linear(seed.A, st.Pi1[idx]));
      out.Z[idx] = z;
      if (sine) {
        const Complex oneb = z(0, 0);  // 1 + b
        if (std::abs(oneb) < 1e-12) {
          out.vhat.flags[idx] = 1;
          continue;
        }
        phase[idx] = oneb;
      } else {
        if (std::abs(z(0, 0)) < 1e-12) {
          out.vhat.flags[idx] = 1;
          continue;
        }
      }
    }

  // Assemble v^: sine-Gordon needs the argument unwrapped continuously from
  // the (0,0) corner, rows first then columns.
  auto arg0 = [](Complex w) { return std::atan2(w.imag(), w.real()); };
  std::vector<double> theta(st.S.size(), 0.0);
  if (sine) {
    double ref = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      const size_t idx = st.index(i, 0);
      if (out.vhat.flags[idx]) {
        theta[idx] = ref;  // placeholder, sample is flagged anyway
        continue;
      }
      double raw = arg0(phase[idx]);
      theta[idx] = raw + 2 * M_PI * std::round((ref - raw) / (2 * M_PI));
      ref = theta[idx];
    }
    for (int i = 0; i < grid.nx; ++i) {
      ref = theta[st.index(i, 0)];
      for (int k = 1; k < grid.nt; ++k) {
        const size_t idx = st.index(i, k);
        if (out.vhat.flags[idx]) {
          theta[idx] = ref;
          continue;
        }
        double raw = arg0(phase[idx]);
        theta[idx] = raw + 2 * M_PI * std::round((ref - raw) / (2 * M_PI));
        ref = theta[idx];
      }
    }
  }

  for (int k = 0; k < grid.nt; ++k)
    for (int i = 0; i < grid.nx; ++i) {
      const size_t idx = st.index(i, k);
      if (out.vhat.flags[idx]) {
        out.vhat.samples[idx](0, 0) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double v = bg.v(grid.x(i), grid.t(k));
      if (sine)
        out.vhat.samples[idx](0, 0) = v + 2.0 * theta[idx];
      else
        out.vhat.samples[idx](0, 0) = v + 2.0 * std::log(std::abs(out.Z[idx](0, 0)));
    }
  return out;
}

}  // namespace gbdt
