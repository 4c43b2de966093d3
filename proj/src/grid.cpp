#include "switchreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace switchreg {

void GridSpec::validate() const {
  if (nx < 3 || ny < 3) throw GridError("grid needs nx >= 3 and ny >= 3");
  if (!(xmax > xmin) || !(ymax > ymin)) throw GridError("grid domain is degenerate");
}

ScalarField sample(const Expression& e, const GridSpec& g) {
  g.validate();
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      try {
        out.at(i, j) = evaluate(e, g.x(i), g.y(j));
      } catch (const EvalError& err) {
        std::ostringstream msg;
        msg << err.what() << " while sampling node (" << i << "," << j << ") = ("
            << g.x(i) << "," << g.y(j) << ")";
        throw EvalError(msg.str());
      }
    }
  }
  return out;
}

ScalarField sample(const std::function<double(double, double)>& f, const GridSpec& g) {
  g.validate();
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

namespace {

bool stencil_clear(const ScalarField& u, int i, int j) {
  return !u.masked(i, j) && !u.masked(i - 1, j) && !u.masked(i + 1, j) &&
         !u.masked(i, j - 1) && !u.masked(i, j + 1);
}

double xx_term(const ScalarField& u, int i, int j, double ihx2) {
  return (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) * ihx2;
}

double yy_term(const ScalarField& u, int i, int j, double ihy2) {
  return (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) * ihy2;
}

}  // namespace

ScalarField laplacian(const ScalarField& u) {
  const GridSpec& g = u.grid;
  ScalarField out(g);
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j) || !stencil_clear(u, i, j)) {
        out.mask[g.idx(i, j)] = 1;
        continue;
      }
      out.at(i, j) = xx_term(u, i, j, ihx2) + yy_term(u, i, j, ihy2);
    }
  }
  return out;
}

std::pair<ScalarField, ScalarField> gradient(const ScalarField& u) {
  const GridSpec& g = u.grid;
  ScalarField gx(g), gy(g);
  const double i2hx = 1.0 / (2.0 * g.hx());
  const double i2hy = 1.0 / (2.0 * g.hy());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j) || !stencil_clear(u, i, j)) {
        gx.mask[g.idx(i, j)] = 1;
        gy.mask[g.idx(i, j)] = 1;
        continue;
      }
      gx.at(i, j) = (u.at(i + 1, j) - u.at(i - 1, j)) * i2hx;
      gy.at(i, j) = (u.at(i, j + 1) - u.at(i, j - 1)) * i2hy;
    }
  }
  return {std::move(gx), std::move(gy)};
}

HessianFields hessian(const ScalarField& u) {
  const GridSpec& g = u.grid;
  HessianFields h{ScalarField(g), ScalarField(g), ScalarField(g)};
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double ihxy = 1.0 / (4.0 * g.hx() * g.hy());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      bool corners_clear =
          !g.on_boundary(i, j) && stencil_clear(u, i, j) && !u.masked(i + 1, j + 1) &&
          !u.masked(i + 1, j - 1) && !u.masked(i - 1, j + 1) && !u.masked(i - 1, j - 1);
      if (!corners_clear) {
        int k = g.idx(i, j);
        h.xx.mask[k] = h.xy.mask[k] = h.yy.mask[k] = 1;
        continue;
      }
      h.xx.at(i, j) = xx_term(u, i, j, ihx2);
      h.yy.at(i, j) = yy_term(u, i, j, ihy2);
      h.xy.at(i, j) = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) +
                       u.at(i - 1, j - 1)) *
                      ihxy;
    }
  }
  return h;
}

std::vector<int> ball_nodes(const ScalarField& u, double cx, double cy, double r) {
  const GridSpec& g = u.grid;
  if (!(r > 0.0)) throw GridError("ball radius must be positive");
  std::vector<int> out;
  int i0 = std::max(0, (int)std::ceil((cx - r - g.xmin) / g.hx() - 1e-12));
  int i1 = std::min(g.nx - 1, (int)std::floor((cx + r - g.xmin) / g.hx() + 1e-12));
  int j0 = std::max(0, (int)std::ceil((cy - r - g.ymin) / g.hy() - 1e-12));
  int j1 = std::min(g.ny - 1, (int)std::floor((cy + r - g.ymin) / g.hy() + 1e-12));
  const double r2 = r * r;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (u.masked(i, j)) continue;
      double dx = g.x(i) - cx, dy = g.y(j) - cy;
      if (dx * dx + dy * dy <= r2) out.push_back(g.idx(i, j));
    }
  }
  return out;
}

double ball_average(const ScalarField& u, double cx, double cy, double r) {
  std::vector<int> nodes = ball_nodes(u, cx, cy, r);
  if (nodes.empty()) throw GridError("discrete ball contains no unmasked node");
  double s = 0.0;
  for (int k : nodes) s += u.values[k];
  return s / (double)nodes.size();
}

double ball_l2(const ScalarField& u, double cx, double cy, double r) {
  std::vector<int> nodes = ball_nodes(u, cx, cy, r);
  double s = 0.0;
  for (int k : nodes) s += u.values[k] * u.values[k];
  return std::sqrt(s * u.grid.hx() * u.grid.hy());
}

ScalarField blend_boundary(const ScalarField& g) {
  const GridSpec& gr = g.grid;
  ScalarField u(gr);
  for (int j = 0; j < gr.ny; ++j) {
    double ty = (double)j / (gr.ny - 1);
    for (int i = 0; i < gr.nx; ++i) {
      double tx = (double)i / (gr.nx - 1);
      double horiz = (1.0 - tx) * g.at(0, j) + tx * g.at(gr.nx - 1, j);
      double vert = (1.0 - ty) * g.at(i, 0) + ty * g.at(i, gr.ny - 1);
      u.at(i, j) = 0.5 * (horiz + vert);
    }
  }
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.on_boundary(i, j)) u.at(i, j) = g.at(i, j);
  return u;
}

double max_norm(const ScalarField& u) {
  double m = 0.0;
  for (size_t k = 0; k < u.values.size(); ++k)
    if (!u.mask[k]) m = std::max(m, std::fabs(u.values[k]));
  return m;
}

double max_norm_interior(const ScalarField& u) {
  const GridSpec& g = u.grid;
  double m = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      if (!u.masked(i, j)) m = std::max(m, std::fabs(u.at(i, j)));
  return m;
}

void write_csv(const ScalarField& u, std::ostream& os) {
  const GridSpec& g = u.grid;
  char buf[96];
  os << "x,y,value\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (u.masked(i, j))
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,nan", g.x(i), g.y(j));
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", g.x(i), g.y(j), u.at(i, j));
      os << buf << '\n';
    }
  }
}

void write_csv(const ScalarField& u, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw GridError("cannot open " + path + " for writing");
  write_csv(u, f);
}

}  // namespace switchreg
