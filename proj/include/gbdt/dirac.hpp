// Dirac-type systems: pseudo-exponential potential construction, fundamental
// solutions, Weyl functions, reflection/transmission coefficients, and the
// inverse problems recovering seeds from Weyl/scattering data.
#ifndef GBDT_DIRAC_HPP
#define GBDT_DIRAC_HPP

#include <memory>
#include <vector>

#include "gbdt/grids.hpp"
#include "gbdt/matcore.hpp"
#include "gbdt/realization.hpp"

namespace gbdt {

enum class DiracKind { SelfAdjoint, GeneralizedPE, SkewSelfAdjoint };

// j = diag(I_{p1}, -I_{p2}).
CMat signature_j(int p1, int p2);

struct DiracSeed {
  DiracKind kind = DiracKind::SelfAdjoint;
  int p1 = 1, p2 = 1;  // p1 == p2 for the self-adjoint and skew classes
  CMat A;              // n x n
  CMat S0;             // n x n (identity for SelfAdjoint / SkewSelfAdjoint)
  CMat Phi1;           // n x p1
  CMat Phi2;           // n x p2

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return p1 + p2; }
};

// Seed invariants per class: S0 shape, the seed identity, and for the
// generalized class the full-range conditions with spectrum in the closed
// upper half-plane. Throws ValidationError.
void validate(const DiracSeed& seed);

// Pi(x) = [e^{-ixA} Phi1, e^{ixA} Phi2].
CMat dirac_Pi(const DiracSeed& seed, double x);

// S(x): closed form through Sylvester solves when the spectral sums of A
// stay away from zero (gap >= 1e-6), otherwise cached ODE integration.
class DiracS {
 public:
  explicit DiracS(const DiracSeed& seed);
  CMat operator()(double x) const;
  bool closed_form() const { return closed_; }

 private:
  DiracSeed seed_;
  bool closed_ = false;
  int sign2_ = 1;  // -1 for the skew class (integrand Pi j Pi*)
  CMat n1_, n2_;
  double h_ = 5e-4;
  mutable std::vector<CMat> cache_;  // S at multiples of h_ (ODE mode)

  CMat rhs(double x) const;
  void extend(double x) const;
  CMat ode_eval(double x) const;
};

// Potential sample; flagged (non-finite) when S(x) is singular to tolerance.
struct PotentialSample {
  CMat v;
  bool singular = false;
};
PotentialSample potential_at(const DiracSeed& seed, const DiracS& s, double x);

// v~ sampled over the grid; GPE samples near zeros of det S are flagged.
SolutionGrid pe_potential(const DiracSeed& seed, const GridSpec& grid);

// w_A(x, lambda) for the seed's class.
CMat dirac_transfer(const DiracSeed& seed, const DiracS& s, double x, Complex lambda);

// Fundamental solution: normalized u~(0) = I for the self-adjoint and skew
// classes, the w_A e^{i x lambda j} form for the generalized class.
CMat fundamental_solution(const DiracSeed& seed, double x, Complex lambda);

struct WeylFunction {
  enum class Halfplane { Upper, Lower };
  Realization realization;
  Halfplane halfplane = Halfplane::Upper;
  double bound_M = 0.0;  // grid-observed sup of ||v~|| (skew class)
};

// phi(lambda) = i I_p + 2 Phi2* (lambda I - A')^{-1} Phi1 with
// A' = A - i Phi1 (Phi1 + Phi2)*.
WeylFunction weyl_direct(const DiracSeed& seed);

// phi(lambda) = i Phi1* (lambda I - A')^{-1} Phi2 with A' = A - i Phi2 Phi2*;
// the working bound M is the sup of ||v~|| over [0, x1].
WeylFunction skew_weyl_direct(const DiracSeed& seed, double x1 = 5.0, int nx = 2001);

// Left reflection coefficient R_L = -(I + i phi)(I - i phi)^{-1}, minimal.
Realization reflection_from_weyl(const WeylFunction& phi);

// Inverse problem from a rational Herglotz-type Weyl function with
// phi(infinity) = i I.
DiracSeed weyl_inverse(const Realization& phi);

struct GpeScattering {
  Realization TL, RL, TR, RR;
  CMat omega;
};

// Transmission/reflection realizations for the generalized class; omega is
// the large-x limit of (e^{-ixA} S(x) e^{ixA*})^{-1} computed by doubling.
GpeScattering gpe_scattering(const DiracSeed& seed);

// Inverse problem from a strictly proper reflection coefficient contractive
// on the real axis.
DiracSeed gpe_inverse(const Realization& r);

// Inverse problem from a strictly proper rational Weyl function (skew class).
DiracSeed skew_weyl_inverse(const Realization& phi);

}  // namespace gbdt

#endif
