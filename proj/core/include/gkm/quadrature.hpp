#pragma once

#include <functional>

namespace gkm::quadrature {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
};

// Globally adaptive Gauss-Kronrod (21 point) on [a, b]. Handles interior
// jumps and kinks; the integrand must be finite on the open interval.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol = 0.0);

// Adaptive integration with extrapolation, for integrable endpoint
// singularities such as x^-0.8 at x = 0.
Result integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol = 0.0);

// Iterated integral of f over [x0, x1] x [y0, y1]; the inner integral runs
// over y at tighter tolerance than the outer one.
Result integrate_rect(const std::function<double(double, double)>& f, double x0, double x1,
                      double y0, double y1, double rel_tol);

}  // namespace gkm::quadrature
