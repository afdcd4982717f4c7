#include "gbdt/gbdt_core.hpp"

#include <cmath>

namespace gbdt {

CMat RationalCoeffs::eval_G(double x, Complex lambda) const {
  CMat acc = CMat::Zero(m, m);
  Complex lp = 1.0;
  for (size_t k = 0; k < poly.size(); ++k) {
    acc += lp * poly[k](x);
    lp *= lambda;
  }
  for (const auto& pg : poles) {
    Complex w = 1.0;
    for (size_t k = 0; k < pg.parts.size(); ++k) {
      w /= (lambda - pg.c);
      acc += w * pg.parts[k](x);
    }
  }
  return -acc;
}

RationalCoeffs RationalCoeffs2::freeze_t(double t) const {
  RationalCoeffs out;
  out.m = m;
  for (const auto& q : poly)
    out.poly.push_back([q, t](double x) { return q(x, t); });
  for (const auto& pg : poles) {
    RationalCoeffs::PoleGroup g;
    g.c = pg.c;
    for (const auto& q : pg.parts)
      g.parts.push_back([q, t](double x) { return q(x, t); });
    out.poles.push_back(std::move(g));
  }
  return out;
}

RationalCoeffs RationalCoeffs2::freeze_x(double x) const {
  RationalCoeffs out;
  out.m = m;
  for (const auto& q : poly)
    out.poly.push_back([q, x](double t) { return q(x, t); });
  for (const auto& pg : poles) {
    RationalCoeffs::PoleGroup g;
    g.c = pg.c;
    for (const auto& q : pg.parts)
      g.parts.push_back([q, x](double t) { return q(x, t); });
    out.poles.push_back(std::move(g));
  }
  return out;
}

namespace {

// Nonnegative and inverse powers of A and of the shifted matrices A - c_s I,
// shared by the evolution equations and the coefficient transforms.
struct PowerCache {
  std::vector<CMat> pos;                      // A^0 .. A^r
  std::vector<std::vector<CMat>> pole_inv;    // per pole: (A - c I)^{-1..-r_s}

  PowerCache(const CMat& a, const RationalCoeffs& coeffs, bool right_side) {
    const int n = static_cast<int>(a.rows());
    const int r = coeffs.r();
    pos.resize(std::max(r, 0) + 1);
    pos[0] = CMat::Identity(n, n);
    for (int k = 1; k <= r; ++k) pos[k] = pos[k - 1] * a;
    for (const auto& pg : coeffs.poles) {
      const int rs = static_cast<int>(pg.parts.size());
      CMat shifted = a - pg.c * CMat::Identity(n, n);
      CMat inv;
      try {
        inv = solve_linear(shifted, CMat::Identity(n, n));
      } catch (const NumericalError&) {
        throw ValidationError(
            "gbdt evolve: pole collides with the spectrum of A" +
            std::string(right_side ? "2" : "1"));
      }
      std::vector<CMat> invs(rs);
      for (int k = 0; k < rs; ++k) invs[k] = (k == 0) ? inv : CMat(invs[k - 1] * inv);
      pole_inv.push_back(std::move(invs));
    }
  }

  const CMat& inv_power(int pole, int k) const {  // (A - c I)^{-k}, k >= 1
    return pole_inv[pole][k - 1];
  }
};

}  // namespace

GbdtState evolve(const RationalCoeffs& coeffs, const CMat& a1, const CMat& a2,
                 const CMat& s0, const CMat& pi1_0, const CMat& pi2_0,
                 const GridSpec& grid, int substeps, double init_tol) {
  const int n = static_cast<int>(a1.rows());
  if (a2.rows() != n || s0.rows() != n || pi1_0.rows() != n || pi2_0.rows() != n)
    throw ValidationError("gbdt evolve: dimension mismatch");
  if (pi1_0.cols() != coeffs.m || pi2_0.cols() != coeffs.m)
    throw ValidationError("gbdt evolve: Pi width must match coefficient size");
  if (coeffs.poly.empty()) throw ValidationError("gbdt evolve: need q_0 at least");

  const double scale =
      a1.norm() * s0.norm() + pi1_0.norm() * pi2_0.norm() + 1e-300;
  const double init_res =
      (a1 * s0 - s0 * a2 - pi1_0 * pi2_0.adjoint()).norm();
  if (init_res > init_tol * scale)
    throw ValidationError("gbdt evolve: node identity violated at x = 0");

  PowerCache p1(a1, coeffs, false), p2(a2, coeffs, true);
  const int r = coeffs.r();

  auto rhs = [&](double x, const std::vector<CMat>& y) {
    const CMat& pi1 = y[0];
    const CMat& pi2s = y[1];

    std::vector<CMat> q(r + 1);
    for (int k = 0; k <= r; ++k) q[k] = coeffs.poly[k](x);

    CMat dpi1 = CMat::Zero(pi1.rows(), pi1.cols());
    CMat dpi2s = CMat::Zero(pi2s.rows(), pi2s.cols());
    CMat ds = CMat::Zero(n, n);

    for (int k = 0; k <= r; ++k) {
      dpi1 += p1.pos[k] * pi1 * q[k];
      dpi2s -= q[k] * pi2s * p2.pos[k];
    }
    for (int k = 1; k <= r; ++k)
      for (int j = 1; j <= k; ++j)
        ds += p1.pos[k - j] * pi1 * q[k] * pi2s * p2.pos[j - 1];

    for (size_t s = 0; s < coeffs.poles.size(); ++s) {
      const auto& pg = coeffs.poles[s];
      const int rs = static_cast<int>(pg.parts.size());
      for (int k = 1; k <= rs; ++k) {
        CMat qsk = pg.parts[k - 1](x);
        dpi1 += p1.inv_power(s, k) * pi1 * qsk;
        dpi2s -= qsk * pi2s * p2.inv_power(s, k);
        for (int j = 1; j <= k; ++j)
          ds -= p1.inv_power(s, k + 1 - j) * pi1 * qsk * pi2s * p2.inv_power(s, j);
      }
    }
    return std::vector<CMat>{dpi1, dpi2s, ds};
  };

  auto traj = integrate_matrix_ode(rhs, {pi1_0, CMat(pi2_0.adjoint()), s0}, grid,
                                   substeps);

  GbdtState st;
  st.grid = grid;
  st.A1 = a1;
  st.A2 = a2;
  st.Pi1.resize(grid.nx);
  st.Pi2star.resize(grid.nx);
  st.S.resize(grid.nx);
  double maxres = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    st.Pi1[i] = traj[i][0];
    st.Pi2star[i] = traj[i][1];
    st.S[i] = traj[i][2];
    const double sc =
        a1.norm() * st.S[i].norm() + st.Pi1[i].norm() * st.Pi2star[i].norm() + 1e-300;
    maxres = std::max(
        maxres,
        (a1 * st.S[i] - st.S[i] * a2 - st.Pi1[i] * st.Pi2star[i]).norm() / sc);
  }
  st.identity_residual = maxres;
  return st;
}

namespace {

struct StateSample {
  CMat pi1, pi2s, s;
};

StateSample sample_state(const GbdtState& state, double x) {
  const double h = state.grid.hx();
  double pos = (x - state.grid.x0) / h;
  int i = static_cast<int>(std::floor(pos));
  if (i < 0 || pos > state.grid.nx - 1 + 1e-9)
    throw ValidationError("gbdt state: x outside the evolved grid");
  i = std::min(i, state.grid.nx - 2);
  double w = pos - i;
  if (w < 1e-9) return {state.Pi1[i], state.Pi2star[i], state.S[i]};
  if (w > 1 - 1e-9) return {state.Pi1[i + 1], state.Pi2star[i + 1], state.S[i + 1]};
  StateSample out;
  out.pi1 = (1 - w) * state.Pi1[i] + w * state.Pi1[i + 1];
  out.pi2s = (1 - w) * state.Pi2star[i] + w * state.Pi2star[i + 1];
  out.s = (1 - w) * state.S[i] + w * state.S[i + 1];
  return out;
}

CMat mat_power_signed(const CMat& a, int k) {
  const int n = static_cast<int>(a.rows());
  if (k == 0) return CMat::Identity(n, n);
  CMat base = k > 0 ? a : solve_linear(a, CMat::Identity(n, n));
  CMat acc = base;
  for (int i = 1; i < std::abs(k); ++i) acc = acc * base;
  return acc;
}

CMat x_of(const StateSample& st, const CMat& a1, int k) {
  CMat p2s_sinv = solve_linear(st.s.adjoint(), st.pi2s.adjoint()).adjoint();
  return p2s_sinv * mat_power_signed(a1, k) * st.pi1;
}

CMat y_of(const StateSample& st, const CMat& a2, int k) {
  CMat sinv_pi1 = solve_linear(st.s, st.pi1);
  return st.pi2s * mat_power_signed(a2, k) * sinv_pi1;
}

}  // namespace

CMat coeff_X(const GbdtState& state, int i, int k) {
  return x_of({state.Pi1[i], state.Pi2star[i], state.S[i]}, state.A1, k);
}
CMat coeff_Y(const GbdtState& state, int i, int k) {
  return y_of({state.Pi1[i], state.Pi2star[i], state.S[i]}, state.A2, k);
}
CMat coeff_X_pole(const GbdtState& state, int i, Complex c, int k) {
  const int n = state.n();
  return x_of({state.Pi1[i], state.Pi2star[i], state.S[i]},
              CMat(state.A1 - c * CMat::Identity(n, n)), k);
}
CMat coeff_Y_pole(const GbdtState& state, int i, Complex c, int k) {
  const int n = state.n();
  return y_of({state.Pi1[i], state.Pi2star[i], state.S[i]},
              CMat(state.A2 - c * CMat::Identity(n, n)), k);
}

CMat CoeffSample::eval_G(Complex lambda) const {
  CMat acc = CMat::Zero(poly[0].rows(), poly[0].cols());
  Complex lp = 1.0;
  for (size_t k = 0; k < poly.size(); ++k) {
    acc += lp * poly[k];
    lp *= lambda;
  }
  for (const auto& pg : poles) {
    Complex w = 1.0;
    for (size_t k = 0; k < pg.parts.size(); ++k) {
      w /= (lambda - pg.c);
      acc += w * pg.parts[k];
    }
  }
  return -acc;
}

CoeffSample sample_coeffs(const RationalCoeffs& coeffs, double x) {
  CoeffSample out;
  for (const auto& q : coeffs.poly) out.poly.push_back(q(x));
  for (const auto& pg : coeffs.poles) {
    CoeffSample::PoleGroup g;
    g.c = pg.c;
    for (const auto& q : pg.parts) g.parts.push_back(q(x));
    out.poles.push_back(std::move(g));
  }
  return out;
}

CoeffSample transformed_coeffs(const GbdtState& state, const RationalCoeffs& coeffs,
                               double x) {
  const StateSample st = sample_state(state, x);
  const int r = coeffs.r();
  const int m = coeffs.m;

  CoeffSample out;
  out.poly.resize(r + 1);

  std::vector<CMat> q(r + 1);
  for (int k = 0; k <= r; ++k) q[k] = coeffs.poly[k](x);
  out.poly[r] = q[r];  // top coefficient passes through untouched

  if (r > 0) {
    std::vector<CMat> X(r), Y(r);
    for (int k = 0; k < r; ++k) {
      X[k] = x_of(st, state.A1, k);
      Y[k] = y_of(st, state.A2, k);
    }
    for (int k = 0; k < r; ++k) {
      CMat acc = q[k];
      for (int j = k + 1; j <= r; ++j) {
        acc -= q[j] * Y[j - k - 1] - X[j - k - 1] * q[j];
        for (int i = k + 2; i <= j; ++i) acc -= X[j - i] * q[j] * Y[i - k - 2];
      }
      out.poly[k] = acc;
    }
  }

  const int n = state.n();
  for (const auto& pg : coeffs.poles) {
    const int rs = static_cast<int>(pg.parts.size());
    CoeffSample::PoleGroup g;
    g.c = pg.c;
    g.parts.resize(rs);

    CMat a1s = state.A1 - pg.c * CMat::Identity(n, n);
    CMat a2s = state.A2 - pg.c * CMat::Identity(n, n);
    std::vector<CMat> Xs(rs + 1), Ys(rs + 1);  // index j holds power -j
    for (int j = 1; j <= rs; ++j) {
      Xs[j] = x_of(st, a1s, -j);
      Ys[j] = y_of(st, a2s, -j);
    }
    std::vector<CMat> qs(rs + 1);
    for (int k = 1; k <= rs; ++k) qs[k] = pg.parts[k - 1](x);

    for (int k = 1; k <= rs; ++k) {
      CMat acc = qs[k];
      for (int j = k; j <= rs; ++j) {
        acc += qs[j] * Ys[j + 1 - k] - Xs[j + 1 - k] * qs[j];
        for (int i = k; i <= j; ++i) acc -= Xs[j + 1 - i] * qs[j] * Ys[i + 1 - k];
      }
      g.parts[k - 1] = acc;
    }
    (void)m;
    out.poles.push_back(std::move(g));
  }
  return out;
}

double darboux_residual(const GbdtState& state, const RationalCoeffs& coeffs,
                        Complex lambda) {
  const int nx = state.grid.nx;
  if (nx < 3) throw ValidationError("darboux_residual: grid too coarse");
  const double h = state.grid.hx();
  const int n = state.n(), m = state.m();
  const CMat id = CMat::Identity(m, m);

  auto w_at = [&](int i) {
    CMat shifted = state.A1 - lambda * CMat::Identity(n, n);
    CMat z = solve_linear(shifted, state.Pi1[i]);
    return CMat(id - state.Pi2star[i] * solve_linear(state.S[i], z));
  };
  auto y_at = [&](int i) {  // Pi_2* S^{-1}
    return CMat(
        solve_linear(state.S[i].adjoint(), state.Pi2star[i].adjoint()).adjoint());
  };

  PowerCache p1(state.A1, coeffs, false);

  double maxres = 0.0;
  CMat wprev = w_at(0), wcur = w_at(1), wnext;
  CMat yprev = y_at(0), ycur = y_at(1), ynext;
  for (int i = 1; i + 1 < nx; ++i) {
    wnext = w_at(i + 1);
    ynext = y_at(i + 1);
    const double x = state.grid.x(i);

    CoeffSample tc = transformed_coeffs(state, coeffs, x);
    CMat gt = tc.eval_G(lambda);
    CMat g = coeffs.eval_G(x, lambda);

    CMat dw = (wnext - wprev) / (2.0 * h);
    maxres = std::max(maxres, (dw - (gt * wcur - wcur * g)).norm());

    // Transformed generalized eigenfunction: (Pi_2* S^{-1})_x =
    // -( sum q~_k (Pi_2* S^{-1}) A_1^k + sum q~_{sk} (Pi_2* S^{-1}) (A_1-c_s)^{-k} ).
    CMat dy = (ynext - yprev) / (2.0 * h);
    CMat rhs = CMat::Zero(m, n);
    for (int k = 0; k <= coeffs.r(); ++k) rhs -= tc.poly[k] * ycur * p1.pos[k];
    for (size_t s = 0; s < coeffs.poles.size(); ++s)
      for (size_t k = 1; k <= coeffs.poles[s].parts.size(); ++k)
        rhs -= tc.poles[s].parts[k - 1] * ycur * p1.inv_power(s, static_cast<int>(k));
    maxres = std::max(maxres, (dy - rhs).norm());

    wprev = wcur;
    wcur = wnext;
    yprev = ycur;
    ycur = ynext;
  }
  return maxres;
}

namespace {

Gbdt2D sweep_2d(const RationalCoeffs2& first_coeffs, const RationalCoeffs2& slice_coeffs,
                const CMat& a1, const CMat& a2, const CMat& s0, const CMat& pi1_0,
                const CMat& pi2_0, const GridSpec& grid, int substeps, bool t_first) {
  if (!grid.has_t) throw ValidationError("evolve_2d: need a 2-D grid");

  // March along the initial line in the `first` variable, then sweep each
  // slice in the other variable.  The line may be sampled much more coarsely
  // than the slices (few t-values, fine x-grids), so refine its integration
  // substeps to the slice resolution.
  GridSpec line = t_first ? GridSpec(grid.t0, grid.t1, grid.nt)
                          : GridSpec(grid.x0, grid.x1, grid.nx);
  const double slice_h = (t_first ? GridSpec(grid.x0, grid.x1, grid.nx).hx()
                                  : GridSpec(grid.t0, grid.t1, grid.nt).hx()) /
                         substeps;
  const int line_substeps = std::max(
      substeps, static_cast<int>(std::ceil(line.hx() / std::max(slice_h, 1e-12))));
  RationalCoeffs linec = t_first ? first_coeffs.freeze_x(grid.x0)
                                 : first_coeffs.freeze_t(grid.t0);
  GbdtState lstate = evolve(linec, a1, a2, s0, pi1_0, pi2_0, line, line_substeps);

  Gbdt2D out;
  out.grid = grid;
  out.A1 = a1;
  out.A2 = a2;
  const size_t total = static_cast<size_t>(grid.nx) * grid.nt;
  out.Pi1.resize(total);
  out.Pi2star.resize(total);
  out.S.resize(total);

  const int nslices = t_first ? grid.nt : grid.nx;
  double maxres = 0.0;
  for (int k = 0; k < nslices; ++k) {
    GridSpec slice = t_first ? GridSpec(grid.x0, grid.x1, grid.nx)
                             : GridSpec(grid.t0, grid.t1, grid.nt);
    RationalCoeffs sc = t_first ? slice_coeffs.freeze_t(grid.t(k))
                                : slice_coeffs.freeze_x(grid.x(k));
    GbdtState sstate = evolve(sc, a1, a2, lstate.S[k], lstate.Pi1[k],
                              CMat(lstate.Pi2star[k].adjoint()), slice, substeps,
                              1e-6);
    maxres = std::max(maxres, sstate.identity_residual);
    for (int i = 0; i < (t_first ? grid.nx : grid.nt); ++i) {
      size_t idx = t_first ? out.index(i, k) : out.index(k, i);
      out.Pi1[idx] = sstate.Pi1[i];
      out.Pi2star[idx] = sstate.Pi2star[i];
      out.S[idx] = sstate.S[i];
    }
  }
  out.identity_residual = std::max(maxres, lstate.identity_residual);
  return out;
}

}  // namespace

Gbdt2D evolve_2d(const RationalCoeffs2& gcoeffs, const RationalCoeffs2& fcoeffs,
                 const CMat& a1, const CMat& a2, const CMat& s0, const CMat& pi1_0,
                 const CMat& pi2_0, const GridSpec& grid, int substeps) {
  return sweep_2d(fcoeffs, gcoeffs, a1, a2, s0, pi1_0, pi2_0, grid, substeps, true);
}

Gbdt2D evolve_2d_swapped(const RationalCoeffs2& gcoeffs, const RationalCoeffs2& fcoeffs,
                         const CMat& a1, const CMat& a2, const CMat& s0,
                         const CMat& pi1_0, const CMat& pi2_0, const GridSpec& grid,
                         int substeps) {
  return sweep_2d(gcoeffs, fcoeffs, a1, a2, s0, pi1_0, pi2_0, grid, substeps, false);
}

}  // namespace gbdt
