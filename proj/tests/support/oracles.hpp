#pragma once

// Reference computations for the tests. They deliberately avoid the library's
// own quadrature, projections and kernels so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1] from Newton iteration on P_m.
inline Rule gauss_legendre(int m) {
  Rule r;
  r.nodes.resize(m);
  r.weights.resize(m);
  for (int k = 0; k < m; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= m; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    r.nodes[k] = x;
    r.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Composite rule with `panels` equal panels on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const Rule& rule, int panels = 1) {
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      s += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
  }
  return 0.5 * h * s;
}

// Integral over [a, b] after the substitution x = a + (b - a) s^k, which
// removes an x^-p endpoint singularity at a for suitable k.
inline double integrate_graded(const std::function<double(double)>& f, double a, double b,
                               double k, const Rule& rule, int panels = 1) {
  return integrate(
      [&](double s) { return f(a + (b - a) * std::pow(s, k)) * (b - a) * k * std::pow(s, k - 1.0); },
      0.0, 1.0, rule, panels);
}

// Exact cell average of (1 - beta)^2 (x y)^-beta on the (i, j) cell, from
// the separable antiderivative. 0-based indices.
inline double power_law_cell(double beta, std::size_t n, std::size_t i, std::size_t j) {
  const double h = 1.0 / static_cast<double>(n);
  auto F = [&](std::size_t c) {
    return std::pow((c + 1) * h, 1.0 - beta) - std::pow(c * h, 1.0 - beta);
  };
  return F(i) * F(j) / (h * h);
}

// Squared L2 distance between a step kernel and the power law, summed cell
// by cell with a tensor rule. The first cell row and column use a graded
// substitution that makes (A - W)^2 bounded.
inline double power_law_sq_distance(std::span<const double> A, std::size_t n, double beta) {
  const Rule rule = gauss_legendre(16);
  const double h = 1.0 / static_cast<double>(n);
  const double c = (1.0 - beta) * (1.0 - beta);
  const double k = 1.0 / (1.0 - 2.0 * beta);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = A[i * n + j];
      auto inner = [&](double x) {
        auto g = [&](double y) {
          const double d = a - c * std::pow(x * y, -beta);
          return d * d;
        };
        return j == 0 ? integrate_graded(g, 0.0, h, k, rule) : integrate(g, j * h, (j + 1) * h, rule);
      };
      total += i == 0 ? integrate_graded(inner, 0.0, h, k, rule)
                      : integrate(inner, i * h, (i + 1) * h, rule);
    }
  return total;
}

// Interaction term (scale_i) sum_j K_ij D(u_j - u_i) evaluated per edge.
inline std::vector<double> interaction(std::span<const double> K, std::span<const double> scale,
                                       std::span<const double> u,
                                       const std::function<double(double)>& D) {
  const std::size_t n = u.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += K[i * n + j] * D(u[j] - u[i]);
    out[i] = scale[i] * s;
  }
  return out;
}

// U_ij = W_ij / (n^-1 sum_k W_ki), written as the plain double loop.
inline std::vector<double> build_U(std::span<const double> W, std::size_t n) {
  std::vector<double> U(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t k = 0; k < n; ++k) col += W[k * n + i];
      U[i * n + j] = W[i * n + j] / (col / static_cast<double>(n));
    }
  return U;
}

// Integral over [a, b] with the rule applied separately between the cuts
// that fall inside, for integrands with kinks at known points.
inline double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> cuts, const Rule& rule, int panels = 1) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = std::max(a, cuts[k]), hi = std::min(b, cuts[k + 1]);
    if (hi > lo) s += integrate(f, lo, hi, rule, panels);
  }
  return s;
}

// Cell average of the ring kernel (1 - p inside the periodic band of
// half-width r around the diagonal, p outside). The band length of a row is
// found by testing the midpoints between its endpoints; it is piecewise
// linear in x, so Gauss-Legendre between the kinks is exact.
inline double small_world_cell(double p, double r, std::size_t n, std::size_t i, std::size_t j) {
  const double h = 1.0 / static_cast<double>(n);
  const double x0 = i * h, x1 = x0 + h, y0 = j * h, y1 = y0 + h;
  auto in_band = [r](double x, double y) {
    const double d = std::abs(x - y);
    return std::min(d, 1.0 - d) <= r;
  };
  auto band_length = [&](double x) {
    std::vector<double> pts{y0, y1};
    for (double e : {x - r, x + r, x - 1.0 + r, x + 1.0 - r})
      if (e > y0 && e < y1) pts.push_back(e);
    std::sort(pts.begin(), pts.end());
    double len = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      if (in_band(x, 0.5 * (pts[k] + pts[k + 1]))) len += pts[k + 1] - pts[k];
    return len;
  };
  std::vector<double> kinks;
  for (double y : {y0, y1})
    for (double e : {y - r, y + r, y - 1.0 + r, y + 1.0 - r}) kinks.push_back(e);
  const double band = integrate_pieces(band_length, x0, x1, kinks, gauss_legendre(4));
  return (p * h * h + (1.0 - 2.0 * p) * band) / (h * h);
}

// Cell average of min(cap, (1 - beta)^2 (x y)^-beta) away from the axes. The
// inner integral is exact; the outer rule is split where the cap curve
// enters or leaves the cell.
inline double capped_power_law_cell(double beta, double cap, std::size_t n, std::size_t i,
                                    std::size_t j) {
  const double c = (1.0 - beta) * (1.0 - beta);
  const double h = 1.0 / static_cast<double>(n);
  const double x0 = i * h, x1 = x0 + h, y0 = j * h, y1 = y0 + h;
  const double t = std::pow(c / cap, 1.0 / beta);  // capped where x y < t
  auto row = [&](double x) {
    const double ystar = std::clamp(t / x, y0, y1);
    return cap * (ystar - y0) +
           c * std::pow(x, -beta) * (std::pow(y1, 1.0 - beta) - std::pow(ystar, 1.0 - beta)) / (1.0 - beta);
  };
  const double total = integrate_pieces(row, x0, x1, {t / y0, t / y1}, gauss_legendre(20), 4);
  return total / (h * h);
}

// L2(0, 1) distance of two step functions on possibly different meshes,
// integrating over the common breakpoints.
inline double step_distance(std::span<const double> a, std::span<const double> b) {
  std::vector<double> cuts;
  for (std::size_t i = 0; i <= a.size(); ++i) cuts.push_back(static_cast<double>(i) / a.size());
  for (std::size_t i = 0; i <= b.size(); ++i) cuts.push_back(static_cast<double>(i) / b.size());
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const double d = a[static_cast<std::size_t>(mid * a.size())] -
                     b[static_cast<std::size_t>(mid * b.size())];
    s += len * d * d;
  }
  return std::sqrt(s);
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

inline Line least_squares(std::span<const double> x, std::span<const double> y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {slope, (sy - slope * sx) / m};
}

}  // namespace oracle
