// S-nodes (A1, A2, S, Pi1, Pi2) with A1 S - S A2 = Pi1 Pi2*, their transfer
// matrix functions w_A(lambda) = I - Pi2* S^{-1} (A1 - lambda I)^{-1} Pi1,
// explicit inverses, block factorization and composition.
#ifndef GBDT_SNODE_HPP
#define GBDT_SNODE_HPP

#include <utility>

#include "gbdt/matcore.hpp"

namespace gbdt {

// 2x2 matrix [[0,1],[-1,0]]; inverse of -i sigma_2.
CMat symplectic_j();
// (1/sqrt(2)) [[1,1],[-i,i]], unitary.
CMat wave_frame_k();
CMat pauli(int k);  // sigma_1, sigma_2, sigma_3

struct SNode {
  CMat A1, A2, S, Pi1, Pi2;

  SNode() = default;
  // Validates dimensions and the node identity to 1e-9 relative.
  SNode(CMat a1, CMat a2, CMat s, CMat pi1, CMat pi2);
  // Skips the identity check (intermediate states during ODE evolution).
  static SNode new_unchecked(CMat a1, CMat a2, CMat s, CMat pi1, CMat pi2);

  int n() const { return static_cast<int>(A1.rows()); }
  int m() const { return static_cast<int>(Pi1.cols()); }
};

// Frobenius norm of A1 S - S A2 - Pi1 Pi2*.
double verify_identity(const SNode& node);

// w_A(lambda); requires lambda off the spectrum of A1 and invertible S.
CMat transfer_eval(const SNode& node, Complex lambda);

// w_A(lambda)^{-1} = I + Pi2* (A2 - lambda I)^{-1} S^{-1} Pi1; requires
// lambda off the spectrum of A2.
CMat transfer_inverse_eval(const SNode& node, Complex lambda);

// Block factorization at split n1 for nodes with the radial structure
// A2 = A1*, Pi2* = the symplectic form Pi1*, S = S*, A1 block lower triangular.
// Returns (node1, node2) with transfer_eval(node) = w2 * w1 pointwise.
std::pair<SNode, SNode> factorize(const SNode& node, int n1);

// Composition of two the symplectic form-structured nodes into one whose transfer
// function is w_{node2} * w_{node1}.
SNode compose(const SNode& node1, const SNode& node2);

}  // namespace gbdt

#endif
