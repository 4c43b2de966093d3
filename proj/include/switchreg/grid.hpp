#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "switchreg/errors.hpp"
#include "switchreg/expr.hpp"

namespace switchreg {

/// Vertex-centered uniform rectangular grid on [xmin,xmax] x [ymin,ymax].
/// Node (i,j) sits at (xmin + i*hx, ymin + j*hy), 0 <= i < nx, 0 <= j < ny.
struct GridSpec {
  double xmin = -1.0, xmax = 1.0;
  double ymin = -1.0, ymax = 1.0;
  int nx = 3, ny = 3;

  double hx() const { return (xmax - xmin) / (nx - 1); }
  double hy() const { return (ymax - ymin) / (ny - 1); }
  double x(int i) const { return xmin + i * hx(); }
  double y(int j) const { return ymin + j * hy(); }
  int count() const { return nx * ny; }
  int idx(int i, int j) const { return j * nx + i; }
  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  bool operator==(const GridSpec&) const = default;

  /// Throws GridError unless nx,ny >= 3 and the domain is non-degenerate.
  void validate() const;
};

/// Grid plus row-major values plus a mask; masked nodes carry no meaning and
/// are excluded from norms, averages and ball scans. Unmasked values are
/// finite by construction everywhere the producing operation defines them.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = masked

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid(g), values(g.count(), fill), mask(g.count(), 0) {}

  double& at(int i, int j) { return values[grid.idx(i, j)]; }
  double at(int i, int j) const { return values[grid.idx(i, j)]; }
  bool masked(int i, int j) const { return mask[grid.idx(i, j)] != 0; }
};

struct HessianFields {
  ScalarField xx, xy, yy;
};

/// Evaluates `e` at every node. Evaluation errors are rethrown with the
/// node index and coordinates attached.
ScalarField sample(const Expression& e, const GridSpec& g);

/// Samples an arbitrary function (used for closed-form oracles).
ScalarField sample(const std::function<double(double, double)>& f, const GridSpec& g);

/// 5-point Laplacian (u_xx + u_yy). Boundary nodes, and nodes whose stencil
/// touches a masked input node, come back masked.
ScalarField laplacian(const ScalarField& u);

/// Central first differences; one-node margin masked.
std::pair<ScalarField, ScalarField> gradient(const ScalarField& u);

/// Central second differences plus the 4-point cross stencil for u_xy.
/// The hessian trace xx + yy reproduces laplacian() exactly.
HessianFields hessian(const ScalarField& u);

/// Indices (row-major order) of unmasked nodes with Euclidean distance <= r
/// from (cx, cy).
std::vector<int> ball_nodes(const ScalarField& u, double cx, double cy, double r);

/// Mean of u over the discrete ball. Throws GridError when the ball holds no
/// unmasked node.
double ball_average(const ScalarField& u, double cx, double cy, double r);

/// sqrt(sum u^2 * hx * hy) over the discrete ball.
double ball_l2(const ScalarField& u, double cx, double cy, double r);

/// Average of the two 1D linear interpolants of g's boundary values; matches
/// g exactly on the boundary. Used as the solvers' default initial guess.
ScalarField blend_boundary(const ScalarField& g);

/// Max-norm over unmasked nodes (0 when everything is masked).
double max_norm(const ScalarField& u);

/// Max-norm over unmasked interior (non-edge) nodes.
double max_norm_interior(const ScalarField& u);

/// Writes `x,y,value` rows (17 significant digits), row-major; masked nodes
/// print nan.
void write_csv(const ScalarField& u, std::ostream& os);
void write_csv(const ScalarField& u, const std::string& path);

}  // namespace switchreg
