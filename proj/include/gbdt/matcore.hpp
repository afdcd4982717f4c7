// Dense complex linear algebra underpinning the GBDT library:
// matrix exponentials, linear and structured-equation solvers, and a
// fixed-grid matrix-valued ODE integrator.
#ifndef GBDT_MATCORE_HPP
#define GBDT_MATCORE_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbdt {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Seed/config data that fails structural validation (wrong shapes, violated
// identities, inadmissible inputs).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown at runtime (singular S, non-convergent iteration, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform sampling of an interval [x0,x1], optionally of a rectangle
// [x0,x1] x [t0,t1].
struct GridSpec {
  double x0 = 0.0, x1 = 1.0;
  int nx = 2;
  bool has_t = false;
  double t0 = 0.0, t1 = 1.0;
  int nt = 2;

  GridSpec() = default;
  GridSpec(double x0_, double x1_, int nx_);
  GridSpec(double x0_, double x1_, int nx_, double t0_, double t1_, int nt_);

  double hx() const { return (x1 - x0) / (nx - 1); }
  double ht() const { return (t1 - t0) / (nt - 1); }
  double x(int i) const { return x0 + i * hx(); }
  double t(int k) const { return t0 + k * ht(); }
};

bool all_finite(const CMat& m);
void require_finite(const CMat& m, const std::string& what);

// Frobenius norm shorthand.
double fnorm(const CMat& m);

CMat identity(int n);

// exp(M) by scaling-and-squaring with diagonal Pade approximants.
CMat expm(const CMat& m);
// exp(t*M); exact identity for t == 0.
CMat expm(const CMat& m, double t);

// Solves M X = RHS; throws NumericalError when M is singular to tolerance
// (condition estimate above `cond_cap`).
CMat solve_linear(const CMat& m, const CMat& rhs, double cond_cap = 1e13);

// Solves A X - X B = C by complex Schur reduction and back-substitution.
// Requires the spectra of A and B separated by at least `sep_tol`.
CMat solve_sylvester(const CMat& a, const CMat& b, const CMat& c,
                     double sep_tol = 1e-9);

// Hermitian positive-definiteness gate: Hermitian to 1e-10 relative
// (ValidationError otherwise), then smallest eigenvalue above -1e-12
// relative and invertibility to tolerance.
bool is_posdef(const CMat& s);

// Smallest eigenvalue of a Hermitian matrix (symmetrized internally).
double min_eig_hermitian(const CMat& s);

// The three inverse-problem Riccati equations:
//   SaDirac: X C*C X - i(A X - X A*) + B B* = 0, X > 0
//   Gpe:     i(X A - A* X) = C*C + X B B* X,  X = X* invertible,
//            spectrum of A + i B B* X in the closed upper half-plane
//            (the branch consistent with the recovered class; the opposite
//            branch also reproduces the reflection but yields a potential
//            outside it)
//   Skew:    X C*C X + i(A X - X A*) - B B* = 0, X > 0
enum class RiccatiForm { SaDirac, Gpe, Skew };

CMat solve_inverse_riccati(RiccatiForm form, const CMat& a, const CMat& b,
                           const CMat& c);

// Classical RK4 on a fixed grid for a list of coupled matrix unknowns.
// `substeps` splits every grid interval into that many RK4 steps.
using MatOdeRhs = std::function<std::vector<CMat>(double, const std::vector<CMat>&)>;

// trajectory[i][k] = k-th state matrix at grid point i.
std::vector<std::vector<CMat>> integrate_matrix_ode(const MatOdeRhs& rhs,
                                                    const std::vector<CMat>& init,
                                                    const GridSpec& grid,
                                                    int substeps = 1);

// Hermitian square root and inverse square root of X > 0.
CMat sqrtm_posdef(const CMat& x);
CMat inv_sqrtm_posdef(const CMat& x);

std::vector<Complex> eigenvalues(const CMat& m);

}  // namespace gbdt

#endif
