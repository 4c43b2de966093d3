#pragma once

#include <string>
#include <vector>

#include "switchreg/switching.hpp"

namespace switchreg {

/// Quadratic model p(x) = (x-x0).A.(x-x0) + b.(x-x0) + c fitted to a field
/// over a ball; A is symmetric and absorbs the usual 1/2 factor, so A equals
/// half the ball-averaged Hessian.
struct QuadraticPolynomial {
  double cx = 0.0, cy = 0.0;
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double c = 0.0;

  double operator()(double x, double y) const {
    double dx = x - cx, dy = y - cy;
    return dx * (a11 * dx + a12 * dy) + dy * (a12 * dx + a22 * dy) + b1 * dx + b2 * dy + c;
  }
  double frobenius() const;
};

/// L2-minimizing quadratic over the discrete ball: A from the averaged
/// Hessian, b the averaged gradient, c the averaged value. Throws GridError
/// when the ball holds fewer than 6 usable interior nodes.
QuadraticPolynomial fit_polynomial(const ScalarField& u, double cx, double cy, double r);

/// Per-radius scaling statistic
///   S(r) = r^2 * max_i r^{-1} || D2 u_i - avg(D2 u_i) ||_{L2(B_r)}
/// measuring the L2 distance of each component from its best quadratic at
/// scale r. Throws GridError when a ball is not contained in the interior.
std::vector<double> compute_S(const SolutionPair& pair, double cx, double cy,
                              const std::vector<double>& radii);

struct ExponentFit {
  double exponent = 0.0;
  double r2 = 0.0;
  bool infinite = false;  // some value was exactly zero: decay faster than any power
};

/// Least-squares slope of ln(value) against ln(radius). Needs >= 4 radii,
/// distinct radii, and nonnegative values; any zero value short-circuits to
/// the infinite flag. Throws SolverError on bad input.
ExponentFit fit_exponent(const std::vector<double>& radii, const std::vector<double>& values);

struct HessianGrowth {
  std::vector<double> a_norms;  // max_i |A_r^i|_F per radius
  double slope = 0.0;           // fitted coefficient of |ln r|
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Frobenius size of the fitted quadratic's A per radius, with a linear fit
/// against |ln r|. A positive slope that the fit explains well is the
/// signature of a log-singular Hessian.
HessianGrowth hessian_growth(const SolutionPair& pair, double cx, double cy,
                             const std::vector<double>& radii);

enum class Classification { C2alpha, C11, LogSingular, Inconclusive };

std::string to_string(Classification c);

struct RegularityOptions {
  double exponent_margin = 0.1;  // width of the C11 band around slope 2
  double r2_s_min = 0.95;        // fit quality needed to trust the S slope
  double r2_a_min = 0.9;         // fit quality needed to certify log growth
  double a_tol_rel = 0.02;       // |A_r| growth tolerance, relative to scale
};

struct RegularityReport {
  double cx = 0.0, cy = 0.0;
  std::vector<double> radii;     // radii actually used, strictly decreasing
  std::vector<double> s_values;  // raw S(r)
  ExponentFit s_fit;             // fitted on floored values (see notes)
  std::vector<double> a_norms;
  double a_slope = 0.0, a_intercept = 0.0, a_r2 = 0.0;
  std::vector<double> sup_dev;  // max_i sup over the ball of |u_i - p_r|
  ExponentFit sup_fit;
  double scale = 0.0;
  double a_tol = 0.0;
  RegularityOptions options;
  // quadratic-decay certificate: S(r)/r^2 <= c0 at every radius, with c0
  // from the measured Laplacian and sup norms of the pair; evaluated whenever
  // at least one radius survives, even if too few remain for the fits
  double s_over_r2_bound = 0.0;
  double max_s_over_r2 = 0.0;
  bool s_bound_evaluated = false;
  bool s_bound_ok = false;
  Classification classification = Classification::Inconclusive;
  double alpha = 0.0;  // exponent - 2; +inf when S vanishes identically
  std::vector<std::string> notes;
};

/// Default probe radii: {2^-1 .. 2^-6} of a quarter of the smaller domain
/// half-width.
std::vector<double> default_radii(const GridSpec& g);

/// Full per-point diagnosis. Radii that are <= 8h or whose ball leaves the
/// interior are dropped (noted in the report); with fewer than 4 usable radii
/// the result is Inconclusive. Decision order: a clean S slope away from 2
/// with flat |A_r| certifies C2alpha (alpha = slope - 2); an S slope inside
/// the band around 2 with flat |A_r| gives C11; growing |A_r| that the log
/// fit explains gives LogSingular; anything else is Inconclusive.
RegularityReport classify_point(const ProblemSpec& spec, const SolutionPair& pair, double cx,
                                double cy, const std::vector<double>& radii,
                                const RegularityOptions& options = {});

}  // namespace switchreg
