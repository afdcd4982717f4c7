// Sampled matrix-valued fields over 1-D or 2-D grids, with CSV export in a
// fixed column layout (x [,t], then Re/Im of every entry in row-major order).
#ifndef GBDT_GRIDS_HPP
#define GBDT_GRIDS_HPP

#include <map>
#include <string>
#include <vector>

#include "gbdt/matcore.hpp"

namespace gbdt {

struct SolutionGrid {
  GridSpec grid;
  std::string system;  // e.g. "dirac-sa", "nwave", "radial"
  int rows = 1, cols = 1;
  // 1-D: samples[i], i = 0..nx-1. 2-D: samples[k*nx + i] for (x_i, t_k).
  std::vector<CMat> samples;
  // Nonzero marks a sample evaluated at/near a singularity (emitted as NaN in CSV).
  std::vector<unsigned char> flags;
  // Scalar side data consumed by verifiers (e.g. "D", "Dhat", "B" diagonals).
  std::map<std::string, std::vector<double>> meta;

  size_t count() const { return samples.size(); }
  size_t index(int ix, int it = 0) const {
    return static_cast<size_t>(it) * grid.nx + ix;
  }
  const CMat& at(int ix, int it = 0) const { return samples[index(ix, it)]; }
  bool flagged(int ix, int it = 0) const {
    return !flags.empty() && flags[index(ix, it)] != 0;
  }

  void init(const GridSpec& g, int r, int c, const std::string& sys);
};

// Shortest round-trip decimal formatting (std::to_chars).
std::string format_double(double v);

std::string to_csv(const SolutionGrid& g);
void write_csv(const SolutionGrid& g, const std::string& path);
SolutionGrid read_csv(const std::string& path);

// Atomic file write: temp file in the same directory, then rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace gbdt

#endif
