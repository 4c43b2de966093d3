#include "switchreg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace switchreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_ball_interior(const GridSpec& g, double cx, double cy, double r) {
  double sx = g.hx(), sy = g.hy();
  double tx = 1e-12 * (std::fabs(g.xmax - g.xmin) + 1.0);
  double ty = 1e-12 * (std::fabs(g.ymax - g.ymin) + 1.0);
  if (cx - r < g.xmin + sx - tx || cx + r > g.xmax - sx + tx || cy - r < g.ymin + sy - ty ||
      cy + r > g.ymax - sy + ty) {
    std::ostringstream msg;
    msg << "ball of radius " << r << " at (" << cx << "," << cy
        << ") leaves the stencil interior";
    throw GridError(msg.str());
  }
}

bool ball_fits_interior(const GridSpec& g, double cx, double cy, double r) {
  try {
    require_ball_interior(g, cx, cy, r);
    return true;
  } catch (const GridError&) {
    return false;
  }
}

struct DiffFields {
  HessianFields hess;
  ScalarField gx, gy;
};

DiffFields differentials(const ScalarField& u) {
  DiffFields d;
  d.hess = hessian(u);
  auto grads = gradient(u);
  d.gx = std::move(grads.first);
  d.gy = std::move(grads.second);
  return d;
}

QuadraticPolynomial fit_from(const DiffFields& d, const ScalarField& u, double cx, double cy,
                             double r) {
  std::vector<int> nodes = ball_nodes(d.hess.xx, cx, cy, r);
  if (nodes.size() < 6) {
    std::ostringstream msg;
    msg << "quadratic fit needs at least 6 usable nodes in the ball of radius " << r
        << " at (" << cx << "," << cy << "), found " << nodes.size();
    throw GridError(msg.str());
  }
  double mxx = 0, mxy = 0, myy = 0, mgx = 0, mgy = 0, mu = 0;
  for (int k : nodes) {
    mxx += d.hess.xx.values[k];
    mxy += d.hess.xy.values[k];
    myy += d.hess.yy.values[k];
    mgx += d.gx.values[k];
    mgy += d.gy.values[k];
    mu += u.values[k];
  }
  double n = (double)nodes.size();
  QuadraticPolynomial p;
  p.cx = cx;
  p.cy = cy;
  p.a11 = 0.5 * (mxx / n);
  p.a12 = 0.5 * (mxy / n);
  p.a22 = 0.5 * (myy / n);
  p.b1 = mgx / n;
  p.b2 = mgy / n;
  p.c = mu / n;
  return p;
}

// L2 norm over the ball of the Hessian minus its ball mean, Frobenius
// combination with the cross term counted twice.
double hessian_fluctuation(const HessianFields& h, double cx, double cy, double r) {
  std::vector<int> nodes = ball_nodes(h.xx, cx, cy, r);
  if (nodes.empty()) throw GridError("discrete ball contains no usable node");
  double mxx = 0, mxy = 0, myy = 0;
  for (int k : nodes) {
    mxx += h.xx.values[k];
    mxy += h.xy.values[k];
    myy += h.yy.values[k];
  }
  // direct divides: a constant field must yield exactly zero deviations
  double n = (double)nodes.size();
  mxx /= n;
  mxy /= n;
  myy /= n;
  double s = 0.0;
  for (int k : nodes) {
    double dxx = h.xx.values[k] - mxx;
    double dxy = h.xy.values[k] - mxy;
    double dyy = h.yy.values[k] - myy;
    s += dxx * dxx + 2.0 * dxy * dxy + dyy * dyy;
  }
  return std::sqrt(s * h.xx.grid.hx() * h.xx.grid.hy());
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  size_t n = xs.size();
  double mx = 0, my = 0;
  for (size_t k = 0; k < n; ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= (double)n;
  my /= (double)n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0) throw SolverError("degenerate fit: all abscissae coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy == 0.0) {
    f.r2 = 1.0;
  } else {
    double ssres = 0.0;
    for (size_t k = 0; k < n; ++k) {
      double e = ys[k] - (f.intercept + f.slope * xs[k]);
      ssres += e * e;
    }
    f.r2 = std::clamp(1.0 - ssres / syy, 0.0, 1.0);
  }
  return f;
}

// rep.radii and rep.s_values must already be filled and nonempty
void evaluate_decay_bound(const SolutionPair& pair, double cx, double cy, RegularityReport& rep) {
  ScalarField lap1 = laplacian(pair.u1);
  ScalarField lap2 = laplacian(pair.u2);
  double lapmax = std::max(max_norm(lap1), max_norm(lap2));
  double supmax = 0.0;
  double r0 = rep.radii.front();
  for (const ScalarField* u : {&pair.u1, &pair.u2})
    for (int k : ball_nodes(*u, cx, cy, r0))
      supmax = std::max(supmax, std::fabs(u->values[k]));
  rep.s_over_r2_bound = 10.0 * (lapmax + supmax);
  for (size_t k = 0; k < rep.radii.size(); ++k)
    rep.max_s_over_r2 =
        std::max(rep.max_s_over_r2, rep.s_values[k] / (rep.radii[k] * rep.radii[k]));
  rep.s_bound_evaluated = true;
  rep.s_bound_ok = rep.max_s_over_r2 <= rep.s_over_r2_bound;
}

}  // namespace

double QuadraticPolynomial::frobenius() const {
  return std::sqrt(a11 * a11 + 2.0 * a12 * a12 + a22 * a22);
}

QuadraticPolynomial fit_polynomial(const ScalarField& u, double cx, double cy, double r) {
  u.grid.validate();
  if (!(r > 0.0)) throw GridError("ball radius must be positive");
  return fit_from(differentials(u), u, cx, cy, r);
}

std::vector<double> compute_S(const SolutionPair& pair, double cx, double cy,
                              const std::vector<double>& radii) {
  const GridSpec& g = pair.u1.grid;
  g.validate();
  if (!(pair.u2.grid == g)) throw GridError("pair components live on different grids");
  HessianFields h1 = hessian(pair.u1);
  HessianFields h2 = hessian(pair.u2);
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0)) throw GridError("ball radius must be positive");
    require_ball_interior(g, cx, cy, r);
    double f = std::max(hessian_fluctuation(h1, cx, cy, r), hessian_fluctuation(h2, cx, cy, r));
    out.push_back(r * f);
  }
  return out;
}

ExponentFit fit_exponent(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size())
    throw SolverError("exponent fit: radii and values differ in length");
  if (radii.size() < 4) throw SolverError("exponent fit needs at least 4 radii");
  for (double v : values)
    if (v < 0.0) throw SolverError("exponent fit needs nonnegative values");
  for (double r : radii)
    if (!(r > 0.0)) throw SolverError("exponent fit needs positive radii");
  for (double v : values) {
    if (v == 0.0) {
      ExponentFit f;
      f.exponent = kInf;
      f.r2 = 1.0;
      f.infinite = true;
      return f;
    }
  }
  std::vector<double> xs(radii.size()), ys(values.size());
  for (size_t k = 0; k < radii.size(); ++k) {
    xs[k] = std::log(radii[k]);
    ys[k] = std::log(values[k]);
  }
  LinearFit lf = linear_fit(xs, ys);
  ExponentFit f;
  f.exponent = lf.slope;
  f.r2 = lf.r2;
  return f;
}

HessianGrowth hessian_growth(const SolutionPair& pair, double cx, double cy,
                             const std::vector<double>& radii) {
  const GridSpec& g = pair.u1.grid;
  g.validate();
  if (!(pair.u2.grid == g)) throw GridError("pair components live on different grids");
  if (radii.size() < 2) throw SolverError("hessian growth fit needs at least 2 radii");
  DiffFields d1 = differentials(pair.u1);
  DiffFields d2 = differentials(pair.u2);
  HessianGrowth out;
  std::vector<double> xs;
  for (double r : radii) {
    require_ball_interior(g, cx, cy, r);
    double f1 = fit_from(d1, pair.u1, cx, cy, r).frobenius();
    double f2 = fit_from(d2, pair.u2, cx, cy, r).frobenius();
    out.a_norms.push_back(std::max(f1, f2));
    xs.push_back(std::fabs(std::log(r)));
  }
  LinearFit lf = linear_fit(xs, out.a_norms);
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.r2 = lf.r2;
  return out;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::C2alpha: return "C2alpha";
    case Classification::C11: return "C11";
    case Classification::LogSingular: return "log-singular";
    case Classification::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::vector<double> default_radii(const GridSpec& g) {
  double half = 0.5 * std::min(g.xmax - g.xmin, g.ymax - g.ymin);
  double r0 = 0.25 * half;
  std::vector<double> out;
  for (int k = 1; k <= 6; ++k) out.push_back(r0 * std::ldexp(1.0, -k));
  return out;
}

RegularityReport classify_point(const ProblemSpec& spec, const SolutionPair& pair, double cx,
                                double cy, const std::vector<double>& radii,
                                const RegularityOptions& options) {
  const GridSpec& g = spec.grid;
  if (!(pair.u1.grid == g) || !(pair.u2.grid == g))
    throw GridError("solution pair lives on a different grid than the spec");

  RegularityReport rep;
  rep.cx = cx;
  rep.cy = cy;
  rep.options = options;
  rep.scale = spec.scale();
  rep.a_tol = options.a_tol_rel * rep.scale;

  const double h = std::max(g.hx(), g.hy());
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end(), std::greater<double>());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  for (double r : rs) {
    if (!(r > 0.0)) throw GridError("ball radius must be positive");
    if (r <= 8.0 * h) {
      std::ostringstream note;
      note << "dropped radius " << r << ": not above 8h = " << 8.0 * h;
      rep.notes.push_back(note.str());
    } else if (!ball_fits_interior(g, cx, cy, r)) {
      std::ostringstream note;
      note << "dropped radius " << r << ": ball leaves the interior";
      rep.notes.push_back(note.str());
    } else {
      rep.radii.push_back(r);
    }
  }

  if (rep.radii.size() < 4) {
    rep.notes.push_back("fewer than 4 usable radii: no exponent fits, inconclusive");
    if (!rep.radii.empty()) {
      rep.s_values = compute_S(pair, cx, cy, rep.radii);
      evaluate_decay_bound(pair, cx, cy, rep);
      if (rep.radii.size() >= 2) {
        HessianGrowth growth = hessian_growth(pair, cx, cy, rep.radii);
        rep.a_norms = growth.a_norms;
        rep.a_slope = growth.slope;
        rep.a_intercept = growth.intercept;
        rep.a_r2 = growth.r2;
      }
    }
    return rep;
  }

  rep.s_values = compute_S(pair, cx, cy, rep.radii);
  HessianGrowth growth = hessian_growth(pair, cx, cy, rep.radii);
  rep.a_norms = growth.a_norms;
  rep.a_slope = growth.slope;
  rep.a_intercept = growth.intercept;
  rep.a_r2 = growth.r2;

  // S at pure roundoff level reads as exact zero for the fits
  std::vector<double> floored = rep.s_values;
  bool any_floor = false;
  for (size_t k = 0; k < floored.size(); ++k) {
    double floor_k = 1e-9 * rep.radii[k] * rep.radii[k] * (1.0 + rep.a_norms[k]);
    if (floored[k] < floor_k) {
      floored[k] = 0.0;
      any_floor = true;
    }
  }
  if (any_floor) rep.notes.push_back("S values at roundoff level floored to zero");
  rep.s_fit = fit_exponent(rep.radii, floored);

  DiffFields d1 = differentials(pair.u1);
  DiffFields d2 = differentials(pair.u2);
  for (double r : rep.radii) {
    double worst = 0.0;
    const DiffFields* ds[] = {&d1, &d2};
    const ScalarField* us[] = {&pair.u1, &pair.u2};
    for (int i = 0; i < 2; ++i) {
      QuadraticPolynomial p = fit_from(*ds[i], *us[i], cx, cy, r);
      for (int k : ball_nodes(ds[i]->hess.xx, cx, cy, r)) {
        int xi = k % g.nx, yj = k / g.nx;
        worst = std::max(worst, std::fabs(us[i]->values[k] - p(g.x(xi), g.y(yj))));
      }
    }
    rep.sup_dev.push_back(worst);
  }
  std::vector<double> sup_floored = rep.sup_dev;
  bool sup_floor = false;
  for (size_t k = 0; k < sup_floored.size(); ++k) {
    double floor_k = 1e-9 * rep.radii[k] * rep.radii[k] * rep.scale;
    if (sup_floored[k] < floor_k) {
      sup_floored[k] = 0.0;
      sup_floor = true;
    }
  }
  if (sup_floor) rep.notes.push_back("sup deviations at roundoff level floored to zero");
  rep.sup_fit = fit_exponent(rep.radii, sup_floored);

  evaluate_decay_bound(pair, cx, cy, rep);

  const double mlo = 2.0 - options.exponent_margin;
  const double mhi = 2.0 + options.exponent_margin;
  bool flat_a = rep.a_slope <= rep.a_tol;
  if ((rep.s_fit.infinite || (rep.s_fit.exponent >= mhi && rep.s_fit.r2 >= options.r2_s_min)) &&
      flat_a) {
    rep.classification = Classification::C2alpha;
    rep.alpha = rep.s_fit.infinite ? kInf : rep.s_fit.exponent - 2.0;
  } else if (rep.s_fit.exponent >= mlo && rep.s_fit.exponent <= mhi && flat_a) {
    rep.classification = Classification::C11;
    rep.alpha = rep.s_fit.exponent - 2.0;
  } else if (rep.a_slope > rep.a_tol && rep.a_r2 >= options.r2_a_min) {
    rep.classification = Classification::LogSingular;
    rep.alpha = 0.0;
  } else {
    rep.classification = Classification::Inconclusive;
    rep.alpha = 0.0;
  }
  return rep;
}

}  // namespace switchreg
