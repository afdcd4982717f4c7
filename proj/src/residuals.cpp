#include "gbdt/residuals.hpp"

#include <cmath>

namespace gbdt {

namespace {

double order_estimate(double rh, double rh2) {
  if (rh <= 0.0 || rh2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(rh / rh2);
}

ResidualReport ode_residual_single(const MatSampler& u, const MatSampler& g,
                                   const GridSpec& grid) {
  if (grid.nx < 5) throw ValidationError("ode_residual: grid too coarse (nx < 5)");
  const double h = grid.hx();
  ResidualReport rep;
  rep.h = h;
  CMat prev = u(grid.x(0)), cur = u(grid.x(1)), next;
  for (int i = 1; i + 1 < grid.nx; ++i) {
    next = u(grid.x(i + 1));
    CMat dh = (next - prev) / (2.0 * h);
    double r = (dh - g(grid.x(i)) * cur).norm();
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.max_index = i;
    }
    prev = cur;
    cur = next;
  }
  return rep;
}

}  // namespace

ResidualReport ode_residual(const MatSampler& u, const MatSampler& g,
                            const GridSpec& grid) {
  ResidualReport rep = ode_residual_single(u, g, grid);
  GridSpec fine(grid.x0, grid.x1, 2 * grid.nx - 1);
  ResidualReport rep2 = ode_residual_single(u, g, fine);
  rep.order = order_estimate(rep.max_residual, rep2.max_residual);
  return rep;
}

namespace {

ResidualReport zc_single(const MatSampler2& g, const MatSampler2& f,
                         const GridSpec& grid) {
  if (grid.nx < 3 || !grid.has_t || grid.nt < 3)
    throw ValidationError("zero_curvature_residual: need a 2-D grid, nx,nt >= 3");
  const double hx = grid.hx(), ht = grid.ht();
  ResidualReport rep;
  rep.h = std::max(hx, ht);
  for (int k = 1; k + 1 < grid.nt; ++k)
    for (int i = 1; i + 1 < grid.nx; ++i) {
      const double x = grid.x(i), t = grid.t(k);
      CMat gc = g(x, t), fc = f(x, t);
      CMat gt = (g(x, t + ht) - g(x, t - ht)) / (2.0 * ht);
      CMat fx = (f(x + hx, t) - f(x - hx, t)) / (2.0 * hx);
      double r = (gt - fx + gc * fc - fc * gc).norm();
      if (r > rep.max_residual) {
        rep.max_residual = r;
        rep.max_index = k * grid.nx + i;
      }
    }
  return rep;
}

}  // namespace

ResidualReport zero_curvature_residual(const MatSampler2& g, const MatSampler2& f,
                                       const GridSpec& grid) {
  ResidualReport rep = zc_single(g, f, grid);
  GridSpec fine(grid.x0, grid.x1, 2 * grid.nx - 1, grid.t0, grid.t1,
                2 * grid.nt - 1);
  ResidualReport rep2 = zc_single(g, f, fine);
  rep.order = order_estimate(rep.max_residual, rep2.max_residual);
  return rep;
}

namespace {

struct FieldView {
  const SolutionGrid* g;
  int stride;  // 1 = native sampling, 2 = decimated (doubles h)
  int nx, nt;
  double hx, ht;

  FieldView(const SolutionGrid& field, int s) : g(&field), stride(s) {
    nx = (field.grid.nx - 1) / s + 1;
    nt = field.grid.has_t ? (field.grid.nt - 1) / s + 1 : 1;
    hx = field.grid.hx() * s;
    ht = field.grid.has_t ? field.grid.ht() * s : 0.0;
  }
  const CMat& at(int i, int k) const { return g->at(i * stride, k * stride); }
  bool ok(int i, int k) const { return !g->flagged(i * stride, k * stride); }
};

using PointResidual = std::function<double(const FieldView&, int, int)>;

ResidualReport scan(const FieldView& v, const PointResidual& f) {
  ResidualReport rep;
  rep.h = std::max(v.hx, v.ht);
  for (int k = 1; k + 1 < std::max(v.nt, 3); ++k)
    for (int i = 1; i + 1 < v.nx; ++i) {
      if (v.nt > 1 && k + 1 >= v.nt) continue;
      bool usable = v.ok(i - 1, k) && v.ok(i, k) && v.ok(i + 1, k);
      if (v.nt > 1)
        usable = usable && v.ok(i, k - 1) && v.ok(i, k + 1) &&
                 v.ok(i - 1, k - 1) && v.ok(i - 1, k + 1) && v.ok(i + 1, k - 1) &&
                 v.ok(i + 1, k + 1);
      if (!usable) continue;
      double r = f(v, i, k);
      if (r > rep.max_residual) {
        rep.max_residual = r;
        rep.max_index = k * v.nx + i;
      }
    }
  return rep;
}

CMat dx(const FieldView& v, int i, int k) {
  return (v.at(i + 1, k) - v.at(i - 1, k)) / (2.0 * v.hx);
}
CMat dt(const FieldView& v, int i, int k) {
  return (v.at(i, k + 1) - v.at(i, k - 1)) / (2.0 * v.ht);
}
CMat dxx(const FieldView& v, int i, int k) {
  return (v.at(i + 1, k) - 2.0 * v.at(i, k) + v.at(i - 1, k)) / (v.hx * v.hx);
}
CMat dtt(const FieldView& v, int i, int k) {
  return (v.at(i, k + 1) - 2.0 * v.at(i, k) + v.at(i, k - 1)) / (v.ht * v.ht);
}
CMat dxt(const FieldView& v, int i, int k) {
  return (v.at(i + 1, k + 1) - v.at(i + 1, k - 1) - v.at(i - 1, k + 1) +
          v.at(i - 1, k - 1)) /
         (4.0 * v.hx * v.ht);
}

CMat commutator(const CMat& a, const CMat& b) { return a * b - b * a; }

PointResidual make_point_residual(PdeKind kind, const SolutionGrid& field) {
  switch (kind) {
    case PdeKind::NWave: {
      auto itd = field.meta.find("D");
      auto ith = field.meta.find("Dhat");
      if (itd == field.meta.end() || ith == field.meta.end())
        throw ValidationError("pde_residual(NWave): field.meta needs D and Dhat");
      const int m = field.rows;
      CMat d = CMat::Zero(m, m), dh = CMat::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        d(i, i) = itd->second.at(i);
        dh(i, i) = ith->second.at(i);
      }
      return [d, dh](const FieldView& v, int i, int k) {
        CMat xi = v.at(i, k);
        CMat lhs = commutator(d, dt(v, i, k)) - commutator(dh, dx(v, i, k));
        CMat rhs = commutator(commutator(d, xi), commutator(dh, xi));
        return (lhs - rhs).norm();
      };
    }
    case PdeKind::Fnls:
      // 2 v_t + i (v_xx + 2 v v* v) = 0
      return [](const FieldView& v, int i, int k) {
        CMat val = v.at(i, k);
        CMat r = 2.0 * dt(v, i, k) +
                 Complex(0, 1) * (dxx(v, i, k) + 2.0 * val * val.adjoint() * val);
        return r.norm();
      };
    case PdeKind::Chiral:
      // 2 z_xt = z_x z^{-1} z_t + z_t z^{-1} z_x
      return [](const FieldView& v, int i, int k) {
        CMat z = v.at(i, k);
        CMat zx = dx(v, i, k), zt = dt(v, i, k);
        CMat zi = solve_linear(z, CMat::Identity(z.rows(), z.cols()));
        CMat r = 2.0 * dxt(v, i, k) - zx * zi * zt - zt * zi * zx;
        return r.norm();
      };
    case PdeKind::SineGordon:
      return [](const FieldView& v, int i, int k) {
        Complex val = v.at(i, k)(0, 0);
        Complex r = dtt(v, i, k)(0, 0) + dxx(v, i, k)(0, 0) - std::sin(val);
        return std::abs(r);
      };
    case PdeKind::SinhGordon:
      return [](const FieldView& v, int i, int k) {
        Complex val = v.at(i, k)(0, 0);
        Complex r = dtt(v, i, k)(0, 0) + dxx(v, i, k)(0, 0) - std::sinh(val);
        return std::abs(r);
      };
  }
  throw ValidationError("pde_residual: unknown kind");
}

}  // namespace

ResidualReport pde_residual(PdeKind kind, const SolutionGrid& field) {
  const bool need_t = true;
  if (need_t && !field.grid.has_t)
    throw ValidationError("pde_residual: field must be sampled on a 2-D grid");
  if (field.grid.nx < 5 || field.grid.nt < 5)
    throw ValidationError("pde_residual: insufficient grid margin");
  PointResidual f = make_point_residual(kind, field);
  ResidualReport fine = scan(FieldView(field, 1), f);
  ResidualReport rep = fine;
  if ((field.grid.nx - 1) % 2 == 0 && (field.grid.nt - 1) % 2 == 0 &&
      field.grid.nx >= 9 && field.grid.nt >= 9) {
    ResidualReport coarse = scan(FieldView(field, 2), f);
    rep.order = order_estimate(coarse.max_residual, fine.max_residual);
  }
  return rep;
}

}  // namespace gbdt
