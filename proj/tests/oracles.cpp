#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

namespace {

constexpr double kPi = 3.14159265358979323846;

// cosh(a)/cosh(c) for 0 <= |a| <= c, computed through exponentials so large c
// never overflows.
double cosh_ratio(double a, double c) {
  a = std::fabs(a);
  return std::exp(a - c) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * c));
}

// Solves A w = b in place by Gaussian elimination with partial pivoting.
// Returns false when a pivot degenerates.
bool dense_solve(std::vector<double>& A, std::vector<double>& b, int m) {
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::fabs(A[r * m + col]) > std::fabs(A[piv * m + col])) piv = r;
    if (std::fabs(A[piv * m + col]) < 1e-14) return false;
    if (piv != col) {
      for (int c = 0; c < m; ++c) std::swap(A[col * m + c], A[piv * m + c]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < m; ++r) {
      double factor = A[r * m + col] / A[col * m + col];
      if (factor == 0.0) continue;
      for (int c = col; c < m; ++c) A[r * m + c] -= factor * A[col * m + c];
      b[r] -= factor * b[col];
    }
  }
  for (int r = m - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < m; ++c) s -= A[r * m + c] * b[c];
    b[r] = s / A[r * m + r];
  }
  return true;
}

}  // namespace

double poisson_square(double x, double y) {
  double u = 0.5 * (1.0 - x * x);
  double sign = 1.0;
  for (int n = 0; n < 600; ++n) {
    const double lam = (2 * n + 1) * kPi / 2.0;
    u -= sign * 2.0 / (lam * lam * lam) * std::cos(lam * x) * cosh_ratio(lam * y, lam);
    sign = -sign;
  }
  return u;
}

std::vector<double> lcp_enumerate(const switchreg::GridSpec& g, const std::vector<double>& f,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& upper,
                                  const std::vector<double>& boundary) {
  const int nx = g.nx, ny = g.ny;
  std::vector<int> interior;
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) interior.push_back(g.idx(i, j));
  const int m = static_cast<int>(interior.size());
  if (m > 12) throw std::runtime_error("lcp_enumerate handles at most 12 interior nodes");

  double mag = 0.0;
  for (int k : interior)
    mag = std::max({mag, std::fabs(f[k]), std::fabs(lower[k]), std::fabs(upper[k])});
  for (int k = 0; k < g.count(); ++k)
    if (g.on_boundary(k % nx, k / nx)) mag = std::max(mag, std::fabs(boundary[k]));
  const double tol = 1e-9 * (1.0 + mag);

  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = 1.0 / (g.hy() * g.hy());
  std::vector<int> col_of(g.count(), -1);
  std::vector<int> label(m);

  long total = 1;
  for (int k = 0; k < m; ++k) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (int k = 0; k < m; ++k) {
      label[k] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    // columns for free nodes only
    int nfree = 0;
    for (int k = 0; k < m; ++k) col_of[interior[k]] = label[k] == 1 ? nfree++ : -1;

    std::vector<double> u(g.count());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int k = g.idx(i, j);
        u[k] = g.on_boundary(i, j) ? boundary[k] : 0.0;
      }
    for (int k = 0; k < m; ++k)
      if (label[k] == 0) u[interior[k]] = lower[interior[k]];
      else if (label[k] == 2) u[interior[k]] = upper[interior[k]];

    bool solved = true;
    if (nfree > 0) {
      std::vector<double> A(nfree * nfree, 0.0), b(nfree, 0.0);
      std::vector<int> free_nodes(nfree);
      for (int k = 0; k < m; ++k)
        if (label[k] == 1) free_nodes[col_of[interior[k]]] = interior[k];
      for (int row = 0; row < nfree; ++row) {
        const int k = free_nodes[row];
        const int i = k % nx, j = k / nx;
        A[row * nfree + row] = 2.0 * (ax + ay);
        b[row] = f[k];
        const int nb[4] = {g.idx(i - 1, j), g.idx(i + 1, j), g.idx(i, j - 1), g.idx(i, j + 1)};
        const double w[4] = {ax, ax, ay, ay};
        for (int t = 0; t < 4; ++t) {
          if (col_of[nb[t]] >= 0) A[row * nfree + col_of[nb[t]]] -= w[t];
          else b[row] += w[t] * u[nb[t]];
        }
      }
      solved = dense_solve(A, b, nfree);
      if (solved)
        for (int row = 0; row < nfree; ++row) u[free_nodes[row]] = b[row];
    }
    if (!solved) continue;

    bool ok = true;
    for (int k = 0; k < m && ok; ++k) {
      const int node = interior[k];
      const int i = node % nx, j = node / nx;
      const double neglap = 2.0 * (ax + ay) * u[node] - ax * (u[g.idx(i - 1, j)] + u[g.idx(i + 1, j)]) -
                            ay * (u[g.idx(i, j - 1)] + u[g.idx(i, j + 1)]);
      const double res = neglap - f[node];
      if (label[k] == 1)
        ok = u[node] >= lower[node] - tol && u[node] <= upper[node] + tol &&
             std::fabs(res) <= tol;
      else if (label[k] == 0)
        ok = res >= -tol;
      else
        ok = res <= tol;
    }
    if (ok) return u;
  }
  throw std::runtime_error("lcp_enumerate found no consistent active set");
}

}  // namespace oracles
