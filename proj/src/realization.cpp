#include "gbdt/realization.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gbdt {

Realization::Realization(CMat a, CMat b, CMat c, CMat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  if (A.rows() != A.cols()) throw ValidationError("Realization: A must be square");
  if (B.rows() != A.rows()) throw ValidationError("Realization: B row mismatch");
  if (C.cols() != A.rows()) throw ValidationError("Realization: C column mismatch");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw ValidationError("Realization: D dimension mismatch");
  require_finite(A, "Realization.A");
  require_finite(B, "Realization.B");
  require_finite(C, "Realization.C");
  require_finite(D, "Realization.D");
}

CMat eval(const Realization& r, Complex lambda) {
  if (r.order() == 0) return r.D;
  const double scale = std::max(1.0, r.A.norm());
  for (const Complex& ev : eigenvalues(r.A))
    if (std::abs(lambda - ev) < 1e-12 * scale)
      throw NumericalError("realization eval: lambda at/near a pole");
  CMat shifted = lambda * CMat::Identity(r.order(), r.order()) - r.A;
  return r.D + r.C * solve_linear(shifted, r.B, 1e300);
}

namespace {

// Orthonormal basis of the column space at relative threshold `tol`, with the
// rank decision nudged toward keeping states when the singular-value gap is
// not decisive (< 1e3).
CMat range_basis(const CMat& m, double tol) {
  if (m.cols() == 0 || m.rows() == 0 || m.norm() == 0.0) return CMat(m.rows(), 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = tol * sv(0);
  int r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  if (r > 0 && r < sv.size() && sv(r) > 0.0 && sv(r - 1) / sv(r) < 1e3) {
    while (r < sv.size() && sv(r) > 0.0 && sv(r - 1) / sv(r) < 1e3) ++r;
  }
  return svd.matrixU().leftCols(r);
}

CMat krylov(const CMat& a, const CMat& b) {
  const int n = static_cast<int>(a.rows());
  CMat k(n, n * b.cols());
  CMat cur = b;
  for (int i = 0; i < n; ++i) {
    k.middleCols(i * b.cols(), b.cols()) = cur;
    if (i + 1 < n) cur = a * cur;
  }
  return k;
}

}  // namespace

bool is_controllable(const CMat& a, const CMat& b, double rank_tol) {
  if (a.rows() != a.cols() || b.rows() != a.rows())
    throw ValidationError("is_controllable: dimension mismatch");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return true;
  CMat k = krylov(a, b);
  if (k.norm() == 0.0) return false;
  Eigen::JacobiSVD<CMat> svd(k);
  const auto& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv(r) > rank_tol * sv(0)) ++r;
  return r == n;
}

bool is_observable(const CMat& c, const CMat& a, double rank_tol) {
  return is_controllable(a.adjoint(), c.adjoint(), rank_tol);
}

Realization minimal_realize(const Realization& r, double rank_tol) {
  // Controllable part.
  CMat u = range_basis(krylov(r.A, r.B), rank_tol);
  CMat a1 = u.adjoint() * r.A * u;
  CMat b1 = u.adjoint() * r.B;
  CMat c1 = r.C * u;
  // Observable part of the reduced system.
  CMat v = range_basis(krylov(a1.adjoint(), c1.adjoint()), rank_tol);
  Realization out(v.adjoint() * a1 * v, v.adjoint() * b1, c1 * v, r.D);
  return out;
}

Realization invert(const Realization& r) {
  if (r.D.rows() != r.D.cols() ||
      (r.D - CMat::Identity(r.D.rows(), r.D.cols())).norm() > 1e-12 * std::max(1.0, r.D.norm()))
    throw ValidationError("invert: D must equal the identity");
  return Realization(r.A - r.B * r.C, r.B, -r.C, r.D);
}

Realization similar(const Realization& r, const CMat& t) {
  if (t.rows() != t.cols() || t.rows() != r.order())
    throw ValidationError("similar: T dimension mismatch");
  CMat tinv;
  try {
    tinv = solve_linear(t, CMat::Identity(t.rows(), t.cols()));
  } catch (const NumericalError&) {
    throw ValidationError("similar: T is singular");
  }
  return Realization(t * r.A * tinv, t * r.B, r.C * tinv, r.D);
}

Realization product(const Realization& r1, const Realization& r2) {
  if (r1.in_dim() != r2.out_dim()) throw ValidationError("product: dimension mismatch");
  const int n1 = r1.order(), n2 = r2.order();
  CMat a = CMat::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = r1.A;
  a.topRightCorner(n1, n2) = r1.B * r2.C;
  a.bottomRightCorner(n2, n2) = r2.A;
  CMat b(n1 + n2, r2.in_dim());
  b.topRows(n1) = r1.B * r2.D;
  b.bottomRows(n2) = r2.B;
  CMat c(r1.out_dim(), n1 + n2);
  c.leftCols(n1) = r1.C;
  c.rightCols(n2) = r1.D * r2.C;
  return Realization(a, b, c, r1.D * r2.D);
}

Realization invert_biproper(const Realization& r) {
  if (r.D.rows() != r.D.cols()) throw ValidationError("invert_biproper: D must be square");
  CMat dinv = solve_linear(r.D, CMat::Identity(r.D.rows(), r.D.cols()));
  return Realization(r.A - r.B * dinv * r.C, r.B * dinv, -dinv * r.C, dinv);
}

Realization scale_shift(const Realization& r, Complex a, const CMat& e) {
  return Realization(r.A, r.B, a * r.C, a * r.D + e);
}

}  // namespace gbdt
