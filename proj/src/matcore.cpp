#include "gbdt/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace gbdt {

GridSpec::GridSpec(double x0_, double x1_, int nx_) : x0(x0_), x1(x1_), nx(nx_) {
  if (!(x0 < x1) || nx < 2) throw ValidationError("GridSpec: need x0 < x1 and nx >= 2");
}

GridSpec::GridSpec(double x0_, double x1_, int nx_, double t0_, double t1_, int nt_)
    : x0(x0_), x1(x1_), nx(nx_), has_t(true), t0(t0_), t1(t1_), nt(nt_) {
  if (!(x0 < x1) || nx < 2) throw ValidationError("GridSpec: need x0 < x1 and nx >= 2");
  if (!(t0 < t1) || nt < 2) throw ValidationError("GridSpec: need t0 < t1 and nt >= 2");
}

bool all_finite(const CMat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex& z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  return true;
}

void require_finite(const CMat& m, const std::string& what) {
  if (!all_finite(m)) throw ValidationError(what + ": non-finite entries");
}

double fnorm(const CMat& m) { return m.norm(); }

CMat identity(int n) { return CMat::Identity(n, n); }

namespace {

// Diagonal Pade approximant of exp at order 13, Higham-style ladder for
// smaller norms.
CMat pade_expm(const CMat& a) {
  const int n = static_cast<int>(a.rows());
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();  // 1-norm-ish
  const CMat id = CMat::Identity(n, n);

  auto pade = [&](const CMat& m, const std::vector<double>& b) {
    const CMat m2 = m * m;
    CMat u = b[1] * id, v = b[0] * id;
    CMat pw = id;
    for (size_t k = 2; k + 1 < b.size(); k += 2) {
      pw = pw * m2;
      v += b[k] * pw;
      u += b[k + 1] * pw;
    }
    u = m * u;
    return solve_linear(v - u, v + u, 1e300);
  };

  if (nrm < 1.495585217958292e-2)
    return pade(a, {120, 60, 12, 1});
  if (nrm < 2.539398330063230e-1)
    return pade(a, {30240, 15120, 3360, 420, 30, 1});
  if (nrm < 9.504178996162932e-1)
    return pade(a, {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1});
  if (nrm < 2.097847961257068)
    return pade(a, {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                    2162160., 110880., 3960., 90., 1.});

  const double theta13 = 5.371920351148152;
  int squarings = 0;
  CMat m = a;
  if (nrm > theta13) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / theta13))));
    m = a / std::pow(2.0, squarings);
  }
  const std::vector<double> b13 = {
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
      129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
      1323241920.,        40840800.,          960960.,           16380.,
      182.,               1.};
  const CMat m2 = m * m, m4 = m2 * m2, m6 = m4 * m2;
  CMat u = m * (m6 * (b13[13] * m6 + b13[11] * m4 + b13[9] * m2) + b13[7] * m6 +
                b13[5] * m4 + b13[3] * m2 + b13[1] * id);
  CMat v = m6 * (b13[12] * m6 + b13[10] * m4 + b13[8] * m2) + b13[6] * m6 +
           b13[4] * m4 + b13[2] * m2 + b13[0] * id;
  CMat r = solve_linear(v - u, v + u, 1e300);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

}  // namespace

CMat expm(const CMat& m) {
  if (m.rows() != m.cols()) throw ValidationError("expm: matrix must be square");
  if (m.rows() == 0) return m;
  return pade_expm(m);
}

CMat expm(const CMat& m, double t) {
  if (m.rows() != m.cols()) throw ValidationError("expm: matrix must be square");
  if (t == 0.0) return CMat::Identity(m.rows(), m.cols());
  return expm(CMat(t * m));
}

CMat solve_linear(const CMat& m, const CMat& rhs, double cond_cap) {
  if (m.rows() != m.cols()) throw ValidationError("solve_linear: matrix must be square");
  if (m.rows() != rhs.rows())
    throw ValidationError("solve_linear: RHS row count mismatch");
  if (m.rows() == 0) return CMat(0, rhs.cols());
  if (cond_cap < 1e299) {
    Eigen::JacobiSVD<CMat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > cond_cap)
      throw NumericalError("solve_linear: matrix singular to tolerance");
  }
  return m.partialPivLu().solve(rhs);
}

CMat solve_sylvester(const CMat& a, const CMat& b, const CMat& c, double sep_tol) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw ValidationError("solve_sylvester: A, B must be square");
  if (c.rows() != a.rows() || c.cols() != b.cols())
    throw ValidationError("solve_sylvester: C dimensions mismatch");
  const int n = static_cast<int>(a.rows()), p = static_cast<int>(b.rows());
  if (n == 0 || p == 0) return CMat(n, p);

  Eigen::ComplexSchur<CMat> sa(a), sb(b);
  const CMat& ta = sa.matrixT();
  const CMat& tb = sb.matrixT();
  const CMat& qa = sa.matrixU();
  const CMat& qb = sb.matrixU();

  const double scale = std::max(1.0, std::max(ta.norm(), tb.norm()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      if (std::abs(ta(i, i) - tb(j, j)) < sep_tol * scale)
        throw NumericalError("solve_sylvester: spectra of A and B overlap");

  CMat ct = qa.adjoint() * c * qb;
  CMat y(n, p);
  for (int j = 0; j < p; ++j) {
    CVec rhs = ct.col(j);
    for (int k = 0; k < j; ++k) rhs += y.col(k) * tb(k, j);
    CMat tshift = ta;
    tshift.diagonal().array() -= tb(j, j);
    y.col(j) = tshift.triangularView<Eigen::Upper>().solve(rhs);
  }
  return qa * y * qb.adjoint();
}

double min_eig_hermitian(const CMat& s) {
  if (s.rows() == 0) return 0.0;
  CMat h = 0.5 * (s + s.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_posdef(const CMat& s) {
  if (s.rows() != s.cols()) throw ValidationError("is_posdef: matrix must be square");
  if (s.rows() == 0) return true;
  const double nrm = s.norm();
  if ((s - s.adjoint()).norm() > 1e-10 * std::max(nrm, 1e-300))
    throw ValidationError("is_posdef: matrix not Hermitian to tolerance");
  if (nrm == 0.0) return false;
  CMat h = 0.5 * (s + s.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double tol = 1e-12 * nrm;
  return ev.minCoeff() > -tol && ev.cwiseAbs().minCoeff() > tol;
}

std::vector<Complex> eigenvalues(const CMat& m) {
  if (m.rows() != m.cols()) throw ValidationError("eigenvalues: matrix must be square");
  std::vector<Complex> out;
  if (m.rows() == 0) return out;
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  out.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

namespace {

// Reorders a complex Schur form so that eigenvalues flagged by `select` end up
// in the leading block (stable partition, adjacent swaps by unitary 2x2
// rotations as in LAPACK ztrexc).
void ordered_schur(CMat& t, CMat& q, const std::vector<bool>& select) {
  const int n = static_cast<int>(t.rows());
  auto swap_adjacent = [&](int k) {
    // Brings t(k+1,k+1) to position k.
    const Complex t11 = t(k, k), t12 = t(k, k + 1), t22 = t(k + 1, k + 1);
    Eigen::Matrix2cd g;
    Complex x1 = t12, x2 = t22 - t11;
    double nx = std::sqrt(std::norm(x1) + std::norm(x2));
    if (nx == 0.0) return;  // equal eigenvalues, t12 == 0: already diagonal
    x1 /= nx;
    x2 /= nx;
    g << x1, -std::conj(x2), x2, std::conj(x1);
    t.block(0, k, n, 2) = t.block(0, k, n, 2) * g;
    t.block(k, 0, 2, n) = g.adjoint() * t.block(k, 0, 2, n);
    q.block(0, k, n, 2) = q.block(0, k, n, 2) * g;
    t(k + 1, k) = 0.0;
  };

  std::vector<bool> sel = select;
  for (int target = 0; target < n; ++target) {
    int src = -1;
    for (int i = target; i < n; ++i)
      if (sel[i]) {
        src = i;
        break;
      }
    if (src < 0) break;
    for (int k = src - 1; k >= target; --k) {
      swap_adjacent(k);
      std::swap(sel[k], sel[k + 1]);
    }
  }
}

struct QuadTerms {
  // X F X + X G + H X + K = 0
  CMat f, g, h, k;
};

QuadTerms riccati_terms(RiccatiForm form, const CMat& a, const CMat& b, const CMat& c) {
  const Complex iu(0.0, 1.0);
  QuadTerms q;
  switch (form) {
    case RiccatiForm::SaDirac:
      q.f = c.adjoint() * c;
      q.g = iu * a.adjoint();
      q.h = -iu * a;
      q.k = b * b.adjoint();
      break;
    case RiccatiForm::Gpe:
      q.f = b * b.adjoint();
      q.g = -iu * a;
      q.h = iu * a.adjoint();
      q.k = c.adjoint() * c;
      break;
    case RiccatiForm::Skew:
      q.f = c.adjoint() * c;
      q.g = -iu * a.adjoint();
      q.h = iu * a;
      q.k = -(b * b.adjoint());
      break;
  }
  return q;
}

CMat riccati_residual(const QuadTerms& q, const CMat& x) {
  return x * q.f * x + x * q.g + q.h * x + q.k;
}

}  // namespace

CMat solve_inverse_riccati(RiccatiForm form, const CMat& a, const CMat& b,
                           const CMat& c) {
  const int n = static_cast<int>(a.rows());
  if (a.rows() != a.cols()) throw ValidationError("riccati: A must be square");
  if (b.rows() != n || c.cols() != n) throw ValidationError("riccati: B/C shape mismatch");
  if (n == 0) return CMat(0, 0);

  const QuadTerms q = riccati_terms(form, a, b, c);
  CMat m(2 * n, 2 * n);
  m << q.g, q.f, -q.k, -q.h;

  Eigen::ComplexSchur<CMat> schur(m);
  CMat t = schur.matrixT(), u = schur.matrixU();

  // Half-plane selection: the graph subspace of the admissible solution
  // carries the closed-loop spectrum required by the class (stable for
  // SaDirac, anti-stable for Gpe and Skew; for Gpe that is the closed-loop
  // spectrum in the closed upper half-plane, the branch that keeps the
  // recovered potential in the class and decaying).
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < 2 * n; ++i) order.push_back({t(i, i).real(), i});
  std::sort(order.begin(), order.end());
  std::vector<bool> select(2 * n, false);
  if (form == RiccatiForm::SaDirac) {
    for (int i = 0; i < n; ++i) select[order[i].second] = true;
  } else {
    for (int i = 0; i < n; ++i) select[order[2 * n - 1 - i].second] = true;
  }
  ordered_schur(t, u, select);

  CMat u1 = u.topLeftCorner(n, n), u2 = u.bottomLeftCorner(n, n);
  CMat x;
  try {
    x = solve_linear(u1.adjoint(), u2.adjoint(), 1e12).adjoint();
  } catch (const NumericalError&) {
    throw NumericalError("riccati: no admissible solution found (graph subspace degenerate)");
  }
  x = 0.5 * (x + x.adjoint());

  // Newton refinement through Sylvester solves.
  const double scale =
      std::max({1.0, q.f.norm(), q.g.norm(), q.h.norm(), q.k.norm()});
  for (int it = 0; it < 25; ++it) {
    CMat r = riccati_residual(q, x);
    if (r.norm() <= 1e-13 * scale * std::max(1.0, x.norm())) break;
    CMat as = x * q.f + q.h;
    CMat bs = -(q.f * x + q.g);
    CMat dx;
    try {
      dx = solve_sylvester(as, bs, -r, 1e-12);
    } catch (const NumericalError&) {
      break;  // keep the Schur-based solution as-is
    }
    CMat xn = x + dx;
    xn = 0.5 * (xn + xn.adjoint());
    if (riccati_residual(q, xn).norm() >= r.norm()) break;
    x = xn;
  }

  const CMat res = riccati_residual(q, x);
  if (!all_finite(x) || res.norm() > 1e-9 * scale * std::max(1.0, x.norm() * x.norm()))
    throw NumericalError("riccati: iteration did not reach residual tolerance");

  // Side conditions.
  const double xnrm = std::max(x.norm(), 1e-300);
  if ((x - x.adjoint()).norm() > 1e-8 * xnrm)
    throw NumericalError("riccati: no admissible solution (not Hermitian)");
  if (form == RiccatiForm::SaDirac || form == RiccatiForm::Skew) {
    if (min_eig_hermitian(x) <= 1e-10 * xnrm)
      throw NumericalError("riccati: no admissible solution (X not positive definite)");
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (x + x.adjoint())),
                                           Eigen::EigenvaluesOnly);
    if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * xnrm)
      throw NumericalError("riccati: no admissible solution (X not invertible)");
    const Complex iu(0.0, 1.0);
    CMat closed = a + iu * b * b.adjoint() * x;
    for (const Complex& ev : eigenvalues(closed))
      if (ev.imag() < -1e-8 * std::max(1.0, closed.norm()))
        throw NumericalError("riccati: side condition on closed-loop spectrum failed");
  }
  return x;
}

std::vector<std::vector<CMat>> integrate_matrix_ode(const MatOdeRhs& rhs,
                                                    const std::vector<CMat>& init,
                                                    const GridSpec& grid,
                                                    int substeps) {
  if (substeps < 1) throw ValidationError("integrate_matrix_ode: substeps >= 1");
  const size_t nstate = init.size();
  std::vector<std::vector<CMat>> out(grid.nx);
  std::vector<CMat> y = init;
  out[0] = y;

  auto axpy = [&](const std::vector<CMat>& base, double w,
                  const std::vector<CMat>& d) {
    std::vector<CMat> r(nstate);
    for (size_t k = 0; k < nstate; ++k) r[k] = base[k] + w * d[k];
    return r;
  };

  const double h = grid.hx() / substeps;
  for (int i = 1; i < grid.nx; ++i) {
    for (int s = 0; s < substeps; ++s) {
      const double x = grid.x(i - 1) + s * h;
      std::vector<CMat> k1 = rhs(x, y);
      std::vector<CMat> k2 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k1));
      std::vector<CMat> k3 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k2));
      std::vector<CMat> k4 = rhs(x + h, axpy(y, h, k3));
      for (size_t k = 0; k < nstate; ++k) {
        y[k] += (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        if (!all_finite(y[k]))
          throw NumericalError("integrate_matrix_ode: non-finite state");
      }
    }
    out[i] = y;
  }
  return out;
}

CMat sqrtm_posdef(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (x + x.adjoint())));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("sqrtm_posdef: matrix not positive definite");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal().toDenseMatrix().cast<Complex>() *
         es.eigenvectors().adjoint();
}

CMat inv_sqrtm_posdef(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (x + x.adjoint())));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("inv_sqrtm_posdef: matrix not positive definite");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() *
         es.eigenvectors().adjoint();
}

}  // namespace gbdt
