#include "gkm/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <memory>

namespace gkm::quadrature {
namespace {

constexpr std::size_t kMaxIntervals = 4000;

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

// GSL calls back through C frames, so exceptions thrown by the integrand are
// parked here and rethrown once control is back in C++.
struct Callback {
  const std::function<double(double)>* f;
  std::exception_ptr error;
};

double trampoline(double x, void* params) {
  auto* cb = static_cast<Callback*>(params);
  if (cb->error) return 0.0;
  try {
    return (*cb->f)(x);
  } catch (...) {
    cb->error = std::current_exception();
    return 0.0;
  }
}

void disable_gsl_abort() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

enum class Method { kAdaptive, kSingular };

Result run(Method method, const std::function<double(double)>& f, double a, double b,
           double rel_tol, double abs_tol) {
  disable_gsl_abort();
  if (a == b) return {0.0, 0.0, true};
  Workspace ws(gsl_integration_workspace_alloc(kMaxIntervals));
  Callback cb{&f, nullptr};
  gsl_function gf{&trampoline, &cb};
  double value = 0.0;
  double err = 0.0;
  int status = 0;
  if (method == Method::kAdaptive) {
    status = gsl_integration_qag(&gf, a, b, abs_tol, rel_tol, kMaxIntervals, GSL_INTEG_GAUSS21,
                                 ws.get(), &value, &err);
  } else {
    status = gsl_integration_qags(&gf, a, b, abs_tol, rel_tol, kMaxIntervals, ws.get(), &value,
                                  &err);
  }
  if (cb.error) std::rethrow_exception(cb.error);
  // GSL reports roundoff trouble even when the estimate already meets the
  // requested accuracy; judge by the error estimate itself.
  const double target = std::max(abs_tol, rel_tol * std::abs(value));
  const bool ok = std::isfinite(value) && (status == GSL_SUCCESS || err <= 10.0 * target);
  return {value, err, ok};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol) {
  return run(Method::kAdaptive, f, a, b, rel_tol, abs_tol);
}

Result integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol) {
  return run(Method::kSingular, f, a, b, rel_tol, abs_tol);
}

Result integrate_rect(const std::function<double(double, double)>& f, double x0, double x1,
                      double y0, double y1, double rel_tol) {
  const double inner_tol = rel_tol * 1e-2;
  bool inner_ok = true;
  double inner_err = 0.0;
  const std::function<double(double)> outer = [&](double x) {
    const std::function<double(double)> slice = [&](double y) { return f(x, y); };
    const Result r = integrate(slice, y0, y1, inner_tol);
    if (!r.converged) inner_ok = false;
    inner_err = std::max(inner_err, r.abs_error);
    return r.value;
  };
  Result r = integrate(outer, x0, x1, rel_tol);
  r.converged = r.converged && inner_ok;
  r.abs_error += inner_err * std::abs(x1 - x0);
  return r;
}

}  // namespace gkm::quadrature
