#include "gbdt/snode.hpp"

namespace gbdt {

CMat symplectic_j() {
  CMat j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

CMat wave_frame_k() {
  const double s = 1.0 / std::sqrt(2.0);
  CMat k(2, 2);
  k << Complex(s, 0), Complex(s, 0), Complex(0, -s), Complex(0, s);
  return k;
}

CMat pauli(int k) {
  CMat m(2, 2);
  switch (k) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0); break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw ValidationError("pauli: index must be 1, 2, or 3");
  }
  return m;
}

namespace {

void check_dims(const CMat& a1, const CMat& a2, const CMat& s, const CMat& pi1,
                const CMat& pi2) {
  const auto n = a1.rows();
  if (a1.cols() != n || a2.rows() != n || a2.cols() != n || s.rows() != n ||
      s.cols() != n || pi1.rows() != n || pi2.rows() != n ||
      pi1.cols() != pi2.cols())
    throw ValidationError("SNode: inconsistent dimensions");
}

}  // namespace

SNode::SNode(CMat a1, CMat a2, CMat s, CMat pi1, CMat pi2)
    : A1(std::move(a1)), A2(std::move(a2)), S(std::move(s)), Pi1(std::move(pi1)),
      Pi2(std::move(pi2)) {
  check_dims(A1, A2, S, Pi1, Pi2);
  const double scale =
      A1.norm() * S.norm() + Pi1.norm() * Pi2.norm() + 1e-300;
  if (verify_identity(*this) > 1e-9 * scale)
    throw ValidationError("SNode: identity A1 S - S A2 = Pi1 Pi2* violated");
}

SNode SNode::new_unchecked(CMat a1, CMat a2, CMat s, CMat pi1, CMat pi2) {
  check_dims(a1, a2, s, pi1, pi2);
  SNode node;
  node.A1 = std::move(a1);
  node.A2 = std::move(a2);
  node.S = std::move(s);
  node.Pi1 = std::move(pi1);
  node.Pi2 = std::move(pi2);
  return node;
}

double verify_identity(const SNode& node) {
  return (node.A1 * node.S - node.S * node.A2 - node.Pi1 * node.Pi2.adjoint()).norm();
}

CMat transfer_eval(const SNode& node, Complex lambda) {
  const int n = node.n(), m = node.m();
  if (n == 0) return CMat::Identity(m, m);
  CMat shifted = node.A1 - lambda * CMat::Identity(n, n);
  CMat z = solve_linear(shifted, node.Pi1);
  CMat w = solve_linear(node.S, z);
  return CMat::Identity(m, m) - node.Pi2.adjoint() * w;
}

CMat transfer_inverse_eval(const SNode& node, Complex lambda) {
  const int n = node.n(), m = node.m();
  if (n == 0) return CMat::Identity(m, m);
  CMat y = solve_linear(node.S, node.Pi1);
  CMat shifted = node.A2 - lambda * CMat::Identity(n, n);
  CMat z = solve_linear(shifted, y);
  return CMat::Identity(m, m) + node.Pi2.adjoint() * z;
}

namespace {

void require_radial_structure(const SNode& node, const char* who) {
  const double tol = 1e-9;
  if (node.m() != 2) throw ValidationError(std::string(who) + ": m = 2 required");
  double sa = std::max(1.0, node.A1.norm());
  if ((node.A2 - node.A1.adjoint()).norm() > tol * sa)
    throw ValidationError(std::string(who) + ": A2 = A1* required");
  if ((node.S - node.S.adjoint()).norm() > tol * std::max(1.0, node.S.norm()))
    throw ValidationError(std::string(who) + ": S Hermitian required");
  // Pi2* = J Pi1*  <=>  Pi2 = -Pi1 J
  if ((node.Pi2 + node.Pi1 * symplectic_j()).norm() > tol * std::max(1.0, node.Pi1.norm()))
    throw ValidationError(std::string(who) + ": Pi2* = J Pi1* structure required");
}

}  // namespace

std::pair<SNode, SNode> factorize(const SNode& node, int n1) {
  require_radial_structure(node, "factorize");
  const int n = node.n();
  if (n1 <= 0 || n1 > n) throw ValidationError("factorize: invalid split");
  const CMat bj = symplectic_j();

  if (n1 == n) {
    SNode trivial = SNode::new_unchecked(CMat(0, 0), CMat(0, 0), CMat(0, 0),
                                         CMat(0, 2), CMat(0, 2));
    return {node, trivial};
  }

  const int n2 = n - n1;
  if (node.A1.topRightCorner(n1, n2).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("factorize: A1 not block lower triangular at split");

  CMat a11 = node.A1.topLeftCorner(n1, n1);
  CMat a22 = node.A1.bottomRightCorner(n2, n2);
  CMat s11 = node.S.topLeftCorner(n1, n1);
  CMat s12 = node.S.topRightCorner(n1, n2);
  CMat s21 = node.S.bottomLeftCorner(n2, n1);
  CMat s22 = node.S.bottomRightCorner(n2, n2);

  CMat pi_top = node.Pi1.topRows(n1);

  CMat s11_inv_s12;
  try {
    s11_inv_s12 = solve_linear(s11, s12);
  } catch (const NumericalError&) {
    throw NumericalError("factorize: leading block S11 is singular");
  }
  CMat t22_inv = s22 - s21 * s11_inv_s12;  // Schur complement of S11

  // pi2 = T22^{-1} P2 S^{-1} Pi = [-S21 S11^{-1}  I] Pi
  CMat pi2 = node.Pi1.bottomRows(n2) - s21 * solve_linear(s11, pi_top);

  SNode node1 = SNode::new_unchecked(a11, a11.adjoint(), s11, pi_top,
                                     CMat(-pi_top * bj));
  SNode node2 = SNode::new_unchecked(a22, a22.adjoint(), t22_inv, pi2,
                                     CMat(-pi2 * bj));
  return {node1, node2};
}

SNode compose(const SNode& node1, const SNode& node2) {
  require_radial_structure(node1, "compose");
  require_radial_structure(node2, "compose");
  const CMat bj = symplectic_j();
  const int n1 = node1.n(), n2 = node2.n();

  CMat r = node2.Pi1 * bj * node1.Pi1.adjoint();
  try {
    r = solve_linear(node1.S.adjoint(), r.adjoint()).adjoint();  // R = psi2 J psi1* S1^{-1}
  } catch (const NumericalError&) {
    throw NumericalError("compose: S of the first node is singular");
  }

  CMat a = CMat::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = node1.A1;
  a.bottomLeftCorner(n2, n1) = r;
  a.bottomRightCorner(n2, n2) = node2.A1;

  CMat s = CMat::Zero(n1 + n2, n1 + n2);
  s.topLeftCorner(n1, n1) = node1.S;
  s.bottomRightCorner(n2, n2) = node2.S;

  CMat pi(n1 + n2, 2);
  pi.topRows(n1) = node1.Pi1;
  pi.bottomRows(n2) = node2.Pi1;

  return SNode(a, a.adjoint(), s, pi, CMat(-pi * bj));
}

}  // namespace gbdt
