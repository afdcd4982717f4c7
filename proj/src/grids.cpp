#include "gbdt/grids.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gbdt {

void SolutionGrid::init(const GridSpec& g, int r, int c, const std::string& sys) {
  grid = g;
  rows = r;
  cols = c;
  system = sys;
  const size_t total = static_cast<size_t>(g.nx) * (g.has_t ? g.nt : 1);
  samples.assign(total, CMat::Zero(r, c));
  flags.assign(total, 0);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const SolutionGrid& g) {
  std::ostringstream os;
  os << (g.grid.has_t ? "x,t" : "x");
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j)
      os << ",re_" << i << j << ",im_" << i << j;
  os << "\n";
  const int nt = g.grid.has_t ? g.grid.nt : 1;
  for (int k = 0; k < nt; ++k) {
    for (int ix = 0; ix < g.grid.nx; ++ix) {
      os << format_double(g.grid.x(ix));
      if (g.grid.has_t) os << "," << format_double(g.grid.t(k));
      const CMat& m = g.at(ix, k);
      const bool bad = g.flagged(ix, k);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
          if (bad)
            os << ",nan,nan";
          else
            os << "," << format_double(m(i, j).real()) << ","
               << format_double(m(i, j).imag());
        }
      os << "\n";
    }
  }
  return os.str();
}

void write_csv(const SolutionGrid& g, const std::string& path) {
  atomic_write(path, to_csv(g));
}

SolutionGrid read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("read_csv: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("read_csv: empty file");

  bool has_t = header.rfind("x,t,", 0) == 0;
  int ncols = 1;
  for (char ch : header)
    if (ch == ',') ++ncols;
  const int coord = has_t ? 2 : 1;
  const int nentries = (ncols - coord) / 2;

  std::vector<double> xs, ts;
  std::vector<std::vector<double>> rowsdata;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      if (cell == "nan")
        vals.push_back(std::nan(""));
      else
        vals.push_back(std::stod(cell));
    }
    if ((int)vals.size() != ncols) throw ValidationError("read_csv: ragged row");
    xs.push_back(vals[0]);
    if (has_t) ts.push_back(vals[1]);
    rowsdata.push_back(std::move(vals));
  }
  if (rowsdata.size() < 2) throw ValidationError("read_csv: too few samples");

  int nx = 0;
  if (has_t) {
    const double t0 = ts[0];
    while (nx < (int)ts.size() && ts[nx] == t0) ++nx;
  } else {
    nx = (int)xs.size();
  }
  const int nt = (int)rowsdata.size() / std::max(nx, 1);
  if (nx < 2 || (has_t && (nt < 2 || nx * nt != (int)rowsdata.size())))
    throw ValidationError("read_csv: inconsistent grid layout");

  // Field dimensions from the header labels (re_ij): infer square-ish layout.
  int rmax = 0, cmax = 0;
  {
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cell.rfind("re_", 0) == 0 && cell.size() >= 5) {
        rmax = std::max(rmax, cell[3] - '0');
        cmax = std::max(cmax, cell[4] - '0');
      }
    }
  }
  const int r = rmax + 1, c = cmax + 1;
  if (r * c != nentries) throw ValidationError("read_csv: header/entry mismatch");

  SolutionGrid g;
  GridSpec gs = has_t ? GridSpec(xs[0], xs[nx - 1], nx, ts[0], ts.back(), nt)
                      : GridSpec(xs[0], xs[nx - 1], nx);
  g.init(gs, r, c, "imported");
  for (size_t s = 0; s < rowsdata.size(); ++s) {
    CMat m(r, c);
    bool bad = false;
    for (int e = 0; e < nentries; ++e) {
      const double re = rowsdata[s][coord + 2 * e];
      const double im = rowsdata[s][coord + 2 * e + 1];
      if (std::isnan(re) || std::isnan(im)) bad = true;
      m(e / c, e % c) = Complex(re, im);
    }
    g.samples[s] = m;
    g.flags[s] = bad ? 1 : 0;
  }
  return g;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("atomic_write: cannot open " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw NumericalError("atomic_write: rename failed for " + path);
}

}  // namespace gbdt
