// Independent numerical oracles: ODE/PDE residuals under central
// differencing, zero-curvature checks, and convergence-order estimates.
#ifndef GBDT_RESIDUALS_HPP
#define GBDT_RESIDUALS_HPP

#include <functional>

#include "gbdt/grids.hpp"
#include "gbdt/matcore.hpp"

namespace gbdt {

struct ResidualReport {
  double max_residual = 0.0;
  double h = 0.0;
  // log2(r_h / r_{h/2}) when the refinement pair was computed, NaN otherwise.
  double order = std::numeric_limits<double>::quiet_NaN();
  long max_index = -1;
};

using MatSampler = std::function<CMat(double)>;
using MatSampler2 = std::function<CMat(double, double)>;

// max over interior points of || D_h u - G u || for u_x = G u, with the
// refinement pair run at h and h/2.
ResidualReport ode_residual(const MatSampler& u, const MatSampler& g,
                            const GridSpec& grid);

// max || D_t G - D_x F + [G, F] || over interior points of the 2-D grid.
ResidualReport zero_curvature_residual(const MatSampler2& g, const MatSampler2& f,
                                       const GridSpec& grid);

enum class PdeKind { NWave, Fnls, Chiral, SineGordon, SinhGordon };

// Residual of the selected equation on an already-sampled field; the
// refinement pair is obtained by sample decimation (2h vs h), so nx and nt
// should be odd for a meaningful order estimate.
// NWave reads the diagonals "D", "Dhat" (and optional "B") from field.meta.
ResidualReport pde_residual(PdeKind kind, const SolutionGrid& field);

}  // namespace gbdt

#endif
