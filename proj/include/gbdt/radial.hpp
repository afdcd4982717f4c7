// Radial Dirac equation: explicit construction of potentials and
// fundamental solutions from block seeds, the single-step transform of the
// generic equation, and the kappa-fit diagnostics.
#ifndef GBDT_RADIAL_HPP
#define GBDT_RADIAL_HPP

#include <vector>

#include "gbdt/gbdt_core.hpp"
#include "gbdt/grids.hpp"
#include "gbdt/matcore.hpp"
#include "gbdt/snode.hpp"

namespace gbdt {

struct RadialSeed {
  int kappa = 1;   // signed; varkappa = |kappa| sets the lower block size
  int m = 0;       // upper block size (0 realizes the scalar example)
  CMat A1;         // m x m
  CMat S1;         // m x m, positive definite
  CMat A2;         // vk x vk, lower triangular
  CMat Psi1;       // m x 2
  CMat Psi2;       // vk x 2

  int vk() const { return std::abs(kappa); }
  int order() const { return m + vk(); }
};

// Block identities, the isotropy of Psi2, lower-triangularity of A2, and the
// parity rule tying the first row of Psi2 to the sign and parity of kappa.
void validate(const RadialSeed& seed);

// Assembled block matrix A = [[A1, 0], [R, A2]], R = Psi2 J~ Psi1* S1^{-1}.
CMat radial_A(const RadialSeed& seed);
// Theta columns: [theta1 theta2] = Pi(0) K~.
CMat radial_theta(const RadialSeed& seed);
// Pi(x) = [e^{ixA} theta1, e^{-ixA} theta2] K~*.
CMat radial_Pi(const RadialSeed& seed, double x);

// S(x) = diag(S1, 0) + integral of the Pi Pi* kernel: Sylvester closed form
// when the spectra of A and A* separate, else incremental adaptive Simpson
// quadrature to absolute tolerance 1e-12.
class RadialS {
 public:
  explicit RadialS(const RadialSeed& seed);
  CMat operator()(double x) const;
  bool closed_form() const { return closed_; }

 private:
  RadialSeed seed_;
  CMat a_, theta_;
  bool closed_ = false;
  CMat n1_, n2_;
  mutable std::vector<std::pair<double, CMat>> cache_;  // sorted by x

  CMat kernel(double t) const;  // integrand of the S integral
  CMat quad(double a, double b) const;
};

struct RadialField {
  SolutionGrid q0;        // 2x2 transformed coefficient q~_0(x)
  SolutionGrid va, vs;    // scalar components
  double upsilon_sup = 0.0;      // sup of ||q~_0 - (kappa/x) sigma_3|| near zero
  bool upsilon_alarm = false;    // growth by a factor > 2 across decades
};

// The explicit construction: q~_0 = J~ X J~* - X with X = Pi* S^{-1} Pi,
// components v~_a = X22 - X11 - kappa/x and v~_s = X12 + X21; the
// boundedness of the regular part is certified on a geometric grid down to
// x = 1e-8.
RadialField radial_construct(const RadialSeed& seed, const GridSpec& grid);

// u~(x, lambda) = w_A(x, lambda) K~ exp(-i lambda x sigma_3).
CMat radial_fundamental(const RadialSeed& seed, double x, Complex lambda);
CMat radial_fundamental(const RadialSeed& seed, const RadialS& s, double x,
                        Complex lambda);

// X(x) = Pi* S^{-1} Pi for diagnostics and component assembly.
CMat radial_X(const RadialSeed& seed, const RadialS& s, double x);

// Single GBDT step for a generic radial-type system u' = -(lambda q1 + q0)u:
// integrates Pi' = A Pi q1 + Pi q0 and S' = Pi Pi* from x0 and produces the
// transformed coefficient samples q~_0 = q0 + J~ X J~* - X.
struct RadialGbdtStep {
  GridSpec grid;
  CMat A;
  std::vector<CMat> Pi, S;     // trajectories over the grid
  std::vector<CMat> q0t;       // transformed coefficient samples
  double identity_residual = 0.0;

  // Darboux matrix w_A(x_i, lambda) of the step.
  CMat transfer(int i, Complex lambda) const;
};

RadialGbdtStep radial_gbdt_step(const MatFn& q0, const CMat& a, const CMat& s_at_x0,
                                const CMat& pi_at_x0, const GridSpec& grid,
                                int substeps = 1);

// Mean of x * (X22 - X11) over a geometric grid in [lo, hi]: the 1/x
// coefficient of the singular term.
double fit_kappa(const std::function<double(double)>& x_times_va, double lo = 1e-6,
                 double hi = 1e-3, int npoints = 40);

}  // namespace gbdt

#endif
