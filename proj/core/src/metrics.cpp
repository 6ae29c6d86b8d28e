#include "gkm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

#include "format.hpp"
#include "gkm/error.hpp"

namespace gkm {

double discrete_l2(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw InvalidArgument("discrete_l2: lengths " + std::to_string(u.size()) + " and " +
                          std::to_string(v.size()) + " differ");
  if (u.empty()) throw InvalidArgument("discrete_l2: empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(u.size()));
}

double discrete_l2_norm(std::span<const double> u) {
  if (u.empty()) throw InvalidArgument("discrete_l2_norm: empty vector");
  double s = 0.0;
  for (double x : u) s += x * x;
  return std::sqrt(s / static_cast<double>(u.size()));
}

double sup_time_distance(const Trajectory& a, const Trajectory& b) {
  if (a.rows() != b.rows() || a.dt() != b.dt())
    throw InvalidArgument("sup_time_distance: trajectories live on different time grids");
  const std::size_t n = std::max(a.size(), b.size());
  const std::size_t m = std::min(a.size(), b.size());
  if (n % m != 0)
    throw InvalidArgument("sup_time_distance: resolutions " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " are not nested");
  const std::size_t block = n / m;
  const bool a_fine = a.size() == n;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto fine = a_fine ? a.state(k) : b.state(k);
    const auto coarse = a_fine ? b.state(k) : a.state(k);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = fine[i] - coarse[i / block];
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(s / static_cast<double>(n)));
  }
  return worst;
}

double gronwall_constant(double L_f, double L_D, double W1, double W2) {
  if (L_f < 0.0 || L_D < 0.0 || W1 < 0.0 || W2 < 0.0)
    throw InvalidArgument("gronwall_constant: inputs must be nonnegative");
  return L_f + L_D * (2.0 + 1.5 * W1 + 0.5 * W2) + 0.5;
}

double horizon_coefficient_bound(double L, double gamma) {
  if (!(L > 0.0)) throw InvalidArgument("horizon_coefficient_bound: L must be positive");
  return (1.0 - 2.0 * gamma) / L;
}

ConvergenceSeries fit_rate(std::vector<std::size_t> ns, std::vector<double> errors,
                           std::optional<double> target_exponent) {
  if (ns.size() != errors.size()) throw InvalidArgument("fit_rate: ns and errors differ in length");
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] == 0) throw InvalidArgument("fit_rate: resolutions must be positive");
    if (k > 0 && ns[k] <= ns[k - 1]) throw InvalidArgument("fit_rate: ns must be strictly increasing");
    if (!std::isfinite(errors[k]) || errors[k] < 0.0)
      throw InvalidArgument("fit_rate: errors must be finite and nonnegative");
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < ns.size(); ++k)
    if (errors[k] > 0.0) keep.push_back(k);
  if (keep.size() < 3)
    throw InvalidArgument("fit_rate: need at least 3 positive errors, got " +
                          std::to_string(keep.size()));

  // Pairwise form of the least squares slope, sum (dx dy) / sum dx^2 over all
  // pairs, with the differences taken as logs of ratios. An exact power law
  // then yields its exponent without cancellation.
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = a + 1; b < keep.size(); ++b) {
      const double dx = std::log(static_cast<double>(ns[keep[b]]) / static_cast<double>(ns[keep[a]]));
      const double dy = std::log(errors[keep[b]] / errors[keep[a]]);
      sxy += dx * dy;
      sxx += dx * dx;
    }
  const double m = static_cast<double>(keep.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k : keep) {
    mx += std::log(static_cast<double>(ns[k]));
    my += std::log(errors[k]);
  }
  mx /= m;
  my /= m;

  ConvergenceSeries s;
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  double rss = 0.0;
  for (std::size_t k : keep) {
    const double r = std::log(errors[k]) - (s.intercept + s.slope * std::log(static_cast<double>(ns[k])));
    rss += r * r;
  }
  s.ns = std::move(ns);
  s.errors = std::move(errors);
  s.residual = std::sqrt(rss);
  s.target_exponent = target_exponent;
  return s;
}

void write_csv(std::ostream& out, const ConvergenceSeries& s) {
  out << "n,error\n";
  for (std::size_t k = 0; k < s.ns.size(); ++k)
    out << s.ns[k] << ',' << detail::format_number(s.errors[k]) << '\n';
}

void write_json_summary(std::ostream& out, const ConvergenceSeries& s) {
  nlohmann::json j = {{"slope", s.slope}, {"intercept", s.intercept}, {"residual", s.residual}};
  j["target_exponent"] = s.target_exponent ? nlohmann::json(*s.target_exponent) : nlohmann::json();
  out << j.dump(2) << '\n';
}

}  // namespace gkm
