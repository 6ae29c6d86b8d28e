#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gkm/dynamics.hpp"

namespace gkm {

/// (n^-1 sum (u_i - v_i)^2)^(1/2).
double discrete_l2(std::span<const double> u, std::span<const double> v);
double discrete_l2_norm(std::span<const double> u);

/// Largest L2(0, 1) distance over the shared time grid. Trajectories at
/// different resolutions are compared on the finer mesh, which one
/// resolution must divide.
double sup_time_distance(const Trajectory& a, const Trajectory& b);

/// L = L_f + L_D (2 + 3/2 W1 + 1/2 W2) + 1/2.
double gronwall_constant(double L_f, double L_D, double W1, double W2);
/// Supremum of the admissible horizon coefficient C in T <= C ln n.
double horizon_coefficient_bound(double L, double gamma);

struct ConvergenceSeries {
  std::vector<std::size_t> ns;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  /// Euclidean norm of the log-log residuals.
  double residual = 0.0;
  /// Expected slope, when the experiment has one.
  std::optional<double> target_exponent;
};

/// Least squares fit of log(error) against log(n) over the pairs with a
/// positive error; needs at least three of them.
ConvergenceSeries fit_rate(std::vector<std::size_t> ns, std::vector<double> errors,
                           std::optional<double> target_exponent = std::nullopt);

/// "n,error" rows.
void write_csv(std::ostream& out, const ConvergenceSeries& s);
/// {"slope", "intercept", "residual", "target_exponent"}.
void write_json_summary(std::ostream& out, const ConvergenceSeries& s);

}  // namespace gkm
