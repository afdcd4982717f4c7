// Explicit solutions of integrable nonlinear equations: N-wave fields with
// their Weyl direct/inverse maps and evolution, NLS n-soliton/n-modulation
// solutions, main chiral field and elliptic sine/sinh-Gordon transforms.
#ifndef GBDT_NONLINEAR_HPP
#define GBDT_NONLINEAR_HPP

#include <vector>

#include "gbdt/gbdt_core.hpp"
#include "gbdt/grids.hpp"
#include "gbdt/realization.hpp"

namespace gbdt {

struct NWaveSeed {
  int n = 0, m = 0;
  CMat A;                 // n x n
  CMat S0;                // n x n, Hermitian positive
  CMat Pi0;               // n x m
  Eigen::VectorXd D;      // real diagonal of D
  Eigen::VectorXd Dhat;   // real diagonal of D^
  Eigen::VectorXd B;      // signature diagonal (+-1), identity in the Weyl subcase
};

// Seed identity A S0 - S0 A* = i Pi0 B Pi0*; `weyl_subcase` additionally
// demands B = I and d_1 > d_2 > ... > d_m > 0.
void validate(const NWaveSeed& seed, bool weyl_subcase);

// Pi(x,t) = [exp(-i(d_k x + d^_k t) A) f_k].
CMat nwave_Pi(const NWaveSeed& seed, double x, double t);

// S(x,t): unique Sylvester solution of the node identity when the spectra
// of A and A* are separated, else swept by integration (t along x = 0, then
// x per slice; rebuilt per query from the closed-form Pi).
class NWaveS {
 public:
  explicit NWaveS(const NWaveSeed& seed);
  CMat operator()(double x, double t) const;
  bool closed_form() const { return closed_; }
  // Advances S along one variable (x when sweep_x, else t) with the other
  // held at `fixed`; exposed so grid sweeps can carry S incrementally.
  CMat integrate_line(double s_from, double s_to, double fixed, bool sweep_x,
                      const CMat& from) const;

 private:
  NWaveSeed seed_;
  bool closed_ = false;
};

struct NWaveSolution {
  SolutionGrid xi_gauge;  // xi~ = -B Pi* S^{-1} Pi (transform of xi = 0)
  SolutionGrid xi_weyl;   // xi~ = Pi* S^{-1} Pi (Weyl-pipeline orientation)
};

NWaveSolution nwave_solution(const NWaveSeed& seed, const GridSpec& grid);

// phi(t, lambda) = I - i Pi(0,t)* S(0,t)^{-1} (A - lambda I)^{-1} Pi(0,t);
// requires S(0,t) > 0.
Realization nwave_weyl(const NWaveSeed& seed, double t);

// Inverse problem: minimal realization of phi, Sylvester recovery of S0.
// D and Dhat shape the recovered seed's evolution; defaults are the
// strictly decreasing diag(m..1) and its reverse.
NWaveSeed nwave_inverse(const Realization& phi,
                        const Eigen::VectorXd& D = Eigen::VectorXd(),
                        const Eigen::VectorXd& Dhat = Eigen::VectorXd());

struct NlsSeed {
  enum class Background { Zero, PlaneWave };
  Background background = Background::Zero;
  std::vector<Complex> a;                // diagonal of A
  std::vector<Eigen::Vector2cd> f;       // seed vectors, f_k != 0
};

void validate(const NlsSeed& seed);
// True when the stronger spectrum condition holds (all a_k in the open upper
// half-plane, pairwise distinct): S > 0 everywhere and the solution is global.
bool global_positivity(const NlsSeed& seed);

// The 2x2 closed-form solution u(x,t,lambda) of the auxiliary systems for
// the seed's background (plane-wave form with the principal branch of
// sqrt(1 + lambda^2), diagonal exponential for the zero background).
CMat nls_background_u(const NlsSeed& seed, double x, double t, Complex lambda);

// Rows psi_k = (u(x,t, conj(a_k)) f_k)* of Pi.
CMat nls_Pi(const NlsSeed& seed, double x, double t);
// Closed-form S from the node identity: s_kj = i psi_k psi_j* / (a_k - conj(a_j)).
CMat nls_S(const NlsSeed& seed, double x, double t);

// v~ = v + 2 (Pi* S^{-1} Pi)_{12} over the grid (background v = 0 or e^{-it}).
SolutionGrid nls_solution(const NlsSeed& seed, const GridSpec& grid);

// Main chiral field: node data with det A_k != 0 plus the background z.
struct ChiralSeed {
  CMat A1, A2, S0, Pi1_0, Pi2_0;
};
struct ChiralBackground {
  int m = 0;
  MatFn2 z, zx, zt;  // z and its first derivatives
};

struct ChiralResult {
  SolutionGrid ztilde;
  double min_abs_det_w = 0.0;  // invertibility margin of w_A(x,t,0) over the grid
};

ChiralResult chiral_transform(const ChiralSeed& seed, const ChiralBackground& bg,
                              const GridSpec& grid, int substeps = 1);

struct EllipticSeed {
  enum class Variant { SineGordon, SinhGordon };
  Variant variant = Variant::SineGordon;
  int n = 0;
  CMat A;    // n x n, invertible
  CMat Pi0;  // n x 2
  CMat S0;   // n x n, Hermitian
  CMat U;    // conjugation symmetry witness
};

void validate(const EllipticSeed& seed);

struct ScalarBackground {
  std::function<double(double, double)> v, vx, vt;
};

struct EllipticResult {
  SolutionGrid vhat;     // transformed real scalar field
  std::vector<CMat> Z;   // w_A(x,t,0) diagnostic per sample
};

// Sine-Gordon: v^ = v + 2 arg(1 + b), arg unwrapped from the (0,0) corner;
// sinh-Gordon: v^ = v + 2 ln |Z_11|.  Samples with det S = 0, 1 + b = 0 or
// Z_11 = 0 are flagged.
EllipticResult elliptic_transform(const EllipticSeed& seed, const ScalarBackground& bg,
                                  const GridSpec& grid, int substeps = 1);

}  // namespace gbdt

#endif
