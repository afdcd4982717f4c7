// State-space realizations W(lambda) = D + C (lambda I - A)^{-1} B of proper
// rational matrix functions: evaluation, minimality, inversion, similarity,
// and the cascade algebra used by the scattering maps.
#ifndef GBDT_REALIZATION_HPP
#define GBDT_REALIZATION_HPP

#include "gbdt/matcore.hpp"

namespace gbdt {

struct Realization {
  CMat A;  // n x n
  CMat B;  // n x m1
  CMat C;  // m2 x n
  CMat D;  // m2 x m1

  Realization() = default;
  Realization(CMat a, CMat b, CMat c, CMat d);

  int order() const { return static_cast<int>(A.rows()); }
  int out_dim() const { return static_cast<int>(D.rows()); }
  int in_dim() const { return static_cast<int>(D.cols()); }

  static Realization constant(const CMat& d) {
    return Realization(CMat(0, 0), CMat(0, d.cols()), CMat(d.rows(), 0), d);
  }
};

// W(lambda); throws NumericalError near a pole (eigenvalue distance < 1e-12
// relative).
CMat eval(const Realization& r, Complex lambda);

bool is_controllable(const CMat& a, const CMat& b, double rank_tol = 1e-10);
bool is_observable(const CMat& c, const CMat& a, double rank_tol = 1e-10);

// Staircase-style reduction to a controllable and observable realization of
// the same function; the output order is the numerical McMillan degree.
Realization minimal_realize(const Realization& r, double rank_tol = 1e-10);

// Inverse of W with D = I: (A - BC, B, -C, I).
Realization invert(const Realization& r);

// Similarity transform (T A T^{-1}, T B, C T^{-1}, D).
Realization similar(const Realization& r, const CMat& t);

// Cascade product: realization of W1(lambda) * W2(lambda).
Realization product(const Realization& r1, const Realization& r2);

// Realization of W(lambda)^{-1} for invertible D (general biproper inverse).
Realization invert_biproper(const Realization& r);

// Realization of a * W(lambda) + E.
Realization scale_shift(const Realization& r, Complex a, const CMat& e);

}  // namespace gbdt

#endif
