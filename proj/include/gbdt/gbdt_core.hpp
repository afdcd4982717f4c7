// General GBDT engine for first-order systems depending rationally on the
// spectral parameter: evolution of the generalized eigenfunctions Pi_1,
// Pi_2* and of S, transformed coefficients, and Darboux-equation residuals.
#ifndef GBDT_CORE_HPP
#define GBDT_CORE_HPP

#include <functional>
#include <vector>

#include "gbdt/matcore.hpp"
#include "gbdt/snode.hpp"

namespace gbdt {

using MatFn = std::function<CMat(double)>;
using MatFn2 = std::function<CMat(double, double)>;

// Coefficients of G(x,lambda) = -( sum_{k=0}^r lambda^k q_k(x)
//                                 + sum_s sum_{k=1}^{r_s} (lambda-c_s)^{-k} q_{sk}(x) ).
struct RationalCoeffs {
  int m = 0;
  std::vector<MatFn> poly;  // q_0 .. q_r
  struct PoleGroup {
    Complex c;
    std::vector<MatFn> parts;  // q_{s,1} .. q_{s,r_s}
  };
  std::vector<PoleGroup> poles;

  int r() const { return static_cast<int>(poly.size()) - 1; }
  CMat eval_G(double x, Complex lambda) const;
};

// Same shape with two-variable samplers, for the (x,t) evolutions.
struct RationalCoeffs2 {
  int m = 0;
  std::vector<MatFn2> poly;
  struct PoleGroup {
    Complex c;
    std::vector<MatFn2> parts;
  };
  std::vector<PoleGroup> poles;

  RationalCoeffs freeze_t(double t) const;  // x-sampler at fixed t
  RationalCoeffs freeze_x(double x) const;  // t-sampler at fixed x
};

// Sampled trajectories of the node (A_1, A_2 fixed; S, Pi_1, Pi_2 along x).
struct GbdtState {
  GridSpec grid;
  CMat A1, A2;
  std::vector<CMat> Pi1;      // n x m per grid point
  std::vector<CMat> Pi2star;  // m x n per grid point
  std::vector<CMat> S;        // n x n per grid point
  double identity_residual = 0.0;  // max relative residual of the node identity

  int n() const { return static_cast<int>(A1.rows()); }
  int m() const { return static_cast<int>(Pi1.empty() ? 0 : Pi1[0].cols()); }
  SNode node_at(int i) const {
    return SNode::new_unchecked(A1, A2, S[i], Pi1[i], CMat(Pi2star[i].adjoint()));
  }
};

// Integrates the coupled evolution equations for Pi_1, Pi_2*, S from the
// seed data; requires the node identity at x = 0 within `init_tol` relative
// (1e-10 for fresh seeds; two-variable sweeps relax it to the integration
// drift) and all poles c_s off the spectra of A_1, A_2.
GbdtState evolve(const RationalCoeffs& coeffs, const CMat& a1, const CMat& a2,
                 const CMat& s0, const CMat& pi1_0, const CMat& pi2_0,
                 const GridSpec& grid, int substeps = 1, double init_tol = 1e-10);

struct CoeffSample {
  std::vector<CMat> poly;  // transformed q~_0 .. q~_r at x
  struct PoleGroup {
    Complex c;
    std::vector<CMat> parts;  // q~_{s,1} .. q~_{s,r_s}
  };
  std::vector<PoleGroup> poles;

  CMat eval_G(Complex lambda) const;
};

// X_k and Y_k at grid sample i; negative k means inverse powers.
CMat coeff_X(const GbdtState& state, int i, int k);
CMat coeff_Y(const GbdtState& state, int i, int k);
CMat coeff_X_pole(const GbdtState& state, int i, Complex c, int k);
CMat coeff_Y_pole(const GbdtState& state, int i, Complex c, int k);

// Transformed coefficients at x (grid sample or linear interpolation):
// polynomial part unchanged at the top (q~_r = q_r, returned verbatim),
// the rest per the coefficient-transformation formulas.
CoeffSample transformed_coeffs(const GbdtState& state, const RationalCoeffs& coeffs,
                               double x);

// Sampled original coefficients at x, same container.
CoeffSample sample_coeffs(const RationalCoeffs& coeffs, double x);

// Max over interior grid points of the Darboux-equation defect
// || D_h w_A - (G~ w_A - w_A G) || plus the generalized-eigenfunction defect
// for Pi_2* S^{-1}; returns the larger of the two maxima.
double darboux_residual(const GbdtState& state, const RationalCoeffs& coeffs,
                        Complex lambda);

// Two-variable evolution: t-equations integrated along x = x0, then
// x-equations per t-slice.  Samples indexed k*nx + i.
struct Gbdt2D {
  GridSpec grid;
  CMat A1, A2;
  std::vector<CMat> Pi1, Pi2star, S;
  double identity_residual = 0.0;

  size_t index(int i, int k) const { return static_cast<size_t>(k) * grid.nx + i; }
};

Gbdt2D evolve_2d(const RationalCoeffs2& gcoeffs, const RationalCoeffs2& fcoeffs,
                 const CMat& a1, const CMat& a2, const CMat& s0,
                 const CMat& pi1_0, const CMat& pi2_0, const GridSpec& grid,
                 int substeps = 1);

// Same sweep with the variable order swapped (x-equations along t = t0 first),
// for path-independence checks.
Gbdt2D evolve_2d_swapped(const RationalCoeffs2& gcoeffs, const RationalCoeffs2& fcoeffs,
                         const CMat& a1, const CMat& a2, const CMat& s0,
                         const CMat& pi1_0, const CMat& pi2_0, const GridSpec& grid,
                         int substeps = 1);

}  // namespace gbdt

#endif
