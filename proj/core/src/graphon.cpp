#include "gkm/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/quadrature.hpp"

namespace gkm {
namespace {

constexpr double kCellRelTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string cell_name(std::size_t n, std::size_t i, std::size_t j) {
  return "cell (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ") at n=" +
         std::to_string(n);
}

void check_cell(std::size_t n, std::size_t i, std::size_t j) {
  if (n == 0) throw InvalidArgument("resolution n must be positive");
  if (i >= n || j >= n) throw InvalidArgument("index out of range for " + cell_name(n, i, j));
}

double quadrature_cell_average(const std::function<double(double, double)>& f, std::size_t n,
                               std::size_t i, std::size_t j) {
  const double h = 1.0 / static_cast<double>(n);
  const double x0 = static_cast<double>(i) * h;
  const double y0 = static_cast<double>(j) * h;
  const auto r = quadrature::integrate_rect(f, x0, x0 + h, y0, y0 + h, kCellRelTol);
  if (!r.converged) throw NumericalError("quadrature did not converge on " + cell_name(n, i, j));
  const double nn = static_cast<double>(n);
  return nn * nn * r.value;
}

// Fills an n x n matrix cell by cell; symmetric kernels are evaluated on the
// upper triangle only and mirrored, so the result is exactly symmetric.
template <typename CellFn>
StepGraphon tabulate(std::size_t n, bool symmetric, CellFn cell) {
  if (n == 0) throw InvalidArgument("resolution n must be positive");
  std::vector<double> v(n * n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16) if (n >= 64)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      for (std::size_t j = symmetric ? i : 0; j < n; ++j) v[i * n + j] = cell(i, j);
    } catch (...) {
#pragma omp critical(gkm_tabulate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (symmetric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) v[i * n + j] = v[j * n + i];
  }
  return StepGraphon(n, std::move(v), symmetric);
}

// ((i+1)/n)^c - (i/n)^c without cancellation for large i.
double power_increment(std::size_t n, std::size_t i, double c) {
  const double nn = static_cast<double>(n);
  if (i == 0) return std::pow(1.0 / nn, c);
  const double x0 = static_cast<double>(i) / nn;
  return std::pow(x0, c) * std::expm1(c * std::log1p(1.0 / static_cast<double>(i)));
}

// Integral of min(cap, k (xy)^-beta) over [x0,x1] x [y0,y1], k = (1-beta)^2.
double truncated_power_integral(double beta, double cap, double x0, double x1, double y0,
                                double y1) {
  const double c = 1.0 - beta;
  const double k = c * c;
  const auto B = [c](double z) { return std::pow(z, c) / c; };
  // W >= cap exactly when x y <= s.
  const double s = std::pow(k / cap, 1.0 / beta);
  double total = 0.0;

  const double xa = s / y1;
  const double xb = y0 > 0.0 ? s / y0 : kInf;

  // Fully capped columns: y*(x) = s/x >= y1.
  const double r1_hi = std::min(x1, xa);
  if (r1_hi > x0) total += cap * (y1 - y0) * (r1_hi - x0);

  // Columns never reaching the cap: y*(x) <= y0.
  const double r3_lo = std::max(x0, xb);
  if (r3_lo < x1) total += k * (B(y1) - B(y0)) * (B(x1) - B(r3_lo));

  // Columns crossing the hyperbola x y = s.
  const double p = std::max(x0, xa);
  const double q = std::min(x1, xb);
  if (p < q) {
    total += cap * s * std::log(q / p) * (-beta / c) - cap * y0 * (q - p) +
             k * B(y1) * (B(q) - B(p));
  }
  return total;
}

// Area of {(x, y) in [x0,x1] x [y0,y1] : y - x <= t}.
double area_below(double x0, double x1, double y0, double y1, double t) {
  const double h = y1 - y0;
  const auto phi = [h](double z) {
    if (z <= 0.0) return 0.0;
    if (z <= h) return 0.5 * z * z;
    return 0.5 * h * h + h * (z - h);
  };
  return phi(x1 + t - y0) - phi(x0 + t - y0);
}

// Area of the periodic band min(|x-y|, 1-|x-y|) <= r inside a rectangle.
double band_area(double x0, double x1, double y0, double y1, double r) {
  double a = 0.0;
  for (int k = -1; k <= 1; ++k) {
    a += area_below(x0, x1, y0, y1, k + r) - area_below(x0, x1, y0, y1, k - r);
  }
  return a;
}

double band_length(double x, double y0, double y1, double r) {
  double len = 0.0;
  for (int k = -1; k <= 1; ++k) {
    const double lo = std::max(y0, x + k - r);
    const double hi = std::min(y1, x + k + r);
    if (hi > lo) len += hi - lo;
  }
  return len;
}

// Integer overlaps (in units of 1/(m n)) of the coarse/fine cells covering
// cell i of the m-mesh by cells of the n-mesh.
struct Overlap {
  std::size_t cell;
  std::uint64_t length;
};

std::vector<Overlap> mesh_overlaps(std::size_t m, std::size_t i, std::size_t n) {
  std::vector<Overlap> out;
  const std::uint64_t lo = static_cast<std::uint64_t>(i) * n;
  const std::uint64_t hi = static_cast<std::uint64_t>(i + 1) * n;
  for (std::uint64_t a = lo / m; a < n && a * m < hi; ++a) {
    const std::uint64_t l = std::min(hi, (a + 1) * m) - std::max(lo, a * m);
    if (l > 0) out.push_back({static_cast<std::size_t>(a), l});
  }
  return out;
}

std::size_t cell_of(double x, std::size_t n) {
  const double pos = std::ceil(x * static_cast<double>(n)) - 1.0;
  if (pos <= 0.0) return 0;
  return std::min(n - 1, static_cast<std::size_t>(pos));
}

}  // namespace

// ---------------------------------------------------------------------------
// StepGraphon

StepGraphon::StepGraphon(std::size_t n, std::vector<double> values, bool symmetric)
    : n_(n), values_(std::move(values)), symmetric_(symmetric) {
  if (n_ == 0) throw InvalidArgument("StepGraphon: n must be positive");
  if (values_.size() != n_ * n_) throw InvalidArgument("StepGraphon: expected n*n values");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < 0.0) {
      throw InvalidArgument("StepGraphon: entry " + cell_name(n_, k / n_, k % n_) +
                            " is negative or non-finite");
    }
  }
  if (symmetric_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (values_[i * n_ + j] != values_[j * n_ + i])
          throw InvalidArgument("StepGraphon: flagged symmetric but " + cell_name(n_, i, j) +
                                " differs from its transpose");
  }
}

StepGraphon StepGraphon::constant(std::size_t n, double c) {
  return StepGraphon(n, std::vector<double>(n * n, c), true);
}

double StepGraphon::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  const double nn = static_cast<double>(n_);
  return std::sqrt(s / (nn * nn));
}

double StepGraphon::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------
// Built-in graphons

namespace graphons {

Graphon constant(double c) {
  if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("constant graphon needs finite c >= 0");
  Graphon W;
  W.id = "constant(c=" + detail::format_number(c) + ")";
  W.kernel = [c](double, double) { return c; };
  W.symmetric = true;
  W.cell_average = [c](std::size_t, std::size_t, std::size_t) { return c; };
  W.truncated_cell_average = [c](std::size_t, std::size_t, std::size_t, double cap) {
    return std::min(c, cap);
  };
  W.row_integral = [c](double, double y0, double y1) { return c * (y1 - y0); };
  W.l2_norm = c;
  W.upper_bound = c;
  return W;
}

Graphon erdos_renyi() {
  Graphon W = constant(1.0);
  W.id = "erdos_renyi";
  return W;
}

Graphon power_law(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("power_law needs 0 < beta < 1");
  const double c = 1.0 - beta;
  Graphon W;
  W.id = "power_law(beta=" + detail::format_number(beta) + ")";
  W.kernel = [beta, c](double x, double y) { return c * c * std::pow(x * y, -beta); };
  W.symmetric = true;
  W.cell_average = [c](std::size_t n, std::size_t i, std::size_t j) {
    const double nn = static_cast<double>(n);
    return nn * nn * power_increment(n, i, c) * power_increment(n, j, c);
  };
  W.truncated_cell_average = [beta, c](std::size_t n, std::size_t i, std::size_t j,
                                       double cap) {
    const double nn = static_cast<double>(n);
    const double h = 1.0 / nn;
    const double x0 = static_cast<double>(i) * h;
    const double y0 = static_cast<double>(j) * h;
    const double x1 = static_cast<double>(i + 1) * h;
    const double y1 = static_cast<double>(j + 1) * h;
    const double s = std::pow(c * c / cap, 1.0 / beta);
    if (s <= x0 * y0) return nn * nn * power_increment(n, i, c) * power_increment(n, j, c);
    if (s >= x1 * y1) return cap;
    return nn * nn * truncated_power_integral(beta, cap, x0, x1, y0, y1);
  };
  W.row_integral = [beta, c](double x, double y0, double y1) {
    return c * std::pow(x, -beta) * (std::pow(y1, c) - std::pow(y0, c));
  };
  W.l2_norm = beta < 0.5 ? c * c / (1.0 - 2.0 * beta) : kInf;
  W.upper_bound = kInf;
  W.singular_on_axes = true;
  return W;
}

Graphon small_world(double p, double r) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("small_world needs 0 <= p <= 1");
  if (!(r >= 0.0 && r <= 0.5)) throw InvalidArgument("small_world needs 0 <= r <= 0.5");
  const double on = 1.0 - p;
  const double off = p;
  Graphon W;
  W.id = "small_world(p=" + detail::format_number(p) + ",r=" + detail::format_number(r) + ")";
  W.kernel = [on, off, r](double x, double y) {
    double d = std::abs(x - y);
    d = std::min(d, 1.0 - d);
    return d <= r ? on : off;
  };
  W.symmetric = true;
  const auto cell = [r](std::size_t n, std::size_t i, std::size_t j, double on_v, double off_v) {
    const double nn = static_cast<double>(n);
    const double h = 1.0 / nn;
    const double x0 = static_cast<double>(i) * h;
    const double y0 = static_cast<double>(j) * h;
    const double band = band_area(x0, x0 + h, y0, y0 + h, r);
    return nn * nn * (off_v * h * h + (on_v - off_v) * band);
  };
  W.cell_average = [cell, on, off](std::size_t n, std::size_t i, std::size_t j) {
    return cell(n, i, j, on, off);
  };
  W.truncated_cell_average = [cell, on, off](std::size_t n, std::size_t i, std::size_t j,
                                             double cap) {
    return cell(n, i, j, std::min(on, cap), std::min(off, cap));
  };
  W.row_integral = [on, off, r](double x, double y0, double y1) {
    return off * (y1 - y0) + (on - off) * band_length(x, y0, y1, r);
  };
  W.l2_norm = std::sqrt(off * off * (1.0 - 2.0 * r) + on * on * 2.0 * r);
  W.upper_bound = std::max(on, off);
  return W;
}

Graphon from_step(const StepGraphon& S) {
  auto shared = std::make_shared<const StepGraphon>(S);
  const std::size_t n = S.size();
  const auto bytes = S.values();
  const std::uint64_t h = detail::fnv1a(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size_bytes()));
  Graphon W;
  W.id = "step(n=" + std::to_string(n) + ",h=" + detail::hex64(h) + ")";
  W.kernel = [shared, n](double x, double y) { return (*shared)(cell_of(x, n), cell_of(y, n)); };
  W.symmetric = S.symmetric();
  const auto average = [shared, n](std::size_t m, std::size_t i, std::size_t j, double cap) {
    if (m == n) return std::min(cap, (*shared)(i, j));
    const auto ox = mesh_overlaps(m, i, n);
    const auto oy = mesh_overlaps(m, j, n);
    double acc = 0.0;
    for (const auto& a : ox)
      for (const auto& b : oy)
        acc += static_cast<double>(a.length) * static_cast<double>(b.length) *
               std::min(cap, (*shared)(a.cell, b.cell));
    const double nn = static_cast<double>(n);
    return acc / (nn * nn);
  };
  W.cell_average = [average](std::size_t m, std::size_t i, std::size_t j) {
    return average(m, i, j, kInf);
  };
  W.truncated_cell_average = average;
  W.row_integral = [shared, n](double x, double y0, double y1) {
    const std::size_t a = cell_of(x, n);
    const double nn = static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double lo = std::max(y0, static_cast<double>(b) / nn);
      const double hi = std::min(y1, static_cast<double>(b + 1) / nn);
      if (hi > lo) acc += (hi - lo) * (*shared)(a, b);
    }
    return acc;
  };
  W.l2_norm = S.l2_norm();
  W.upper_bound = S.max_value();
  return W;
}

}  // namespace graphons

// ---------------------------------------------------------------------------
// Projections and norms

double cell_average(const Graphon& W, std::size_t n, std::size_t i, std::size_t j) {
  check_cell(n, i, j);
  if (W.cell_average) return W.cell_average(n, i, j);
  if (W.singular_on_axes && (i == 0 || j == 0)) {
    throw NumericalError("graphon " + W.id + " is singular on the axes; no closed form for " +
                         cell_name(n, i, j));
  }
  return quadrature_cell_average(W.kernel, n, i, j);
}

StepGraphon project(const Graphon& W, std::size_t n) {
  return tabulate(n, W.symmetric,
                  [&](std::size_t i, std::size_t j) { return cell_average(W, n, i, j); });
}

StepGraphon truncate_project(const Graphon& W, std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  const double cap = 1.0 / alpha;
  if (W.upper_bound && *W.upper_bound <= cap) return project(W, n);
  return tabulate(n, W.symmetric, [&](std::size_t i, std::size_t j) {
    check_cell(n, i, j);
    if (W.truncated_cell_average) return W.truncated_cell_average(n, i, j, cap);
    const auto capped = [&](double x, double y) { return std::min(cap, W.kernel(x, y)); };
    return quadrature_cell_average(capped, n, i, j);
  });
}

double l2_norm(const Graphon& W) {
  if (W.l2_norm) return *W.l2_norm;
  if (W.singular_on_axes) {
    throw NumericalError("graphon " + W.id + " is singular on the axes and has no L2 norm hint");
  }
  const auto sq = [&](double x, double y) {
    const double w = W.kernel(x, y);
    return w * w;
  };
  const auto r = quadrature::integrate_rect(sq, 0.0, 1.0, 0.0, 1.0, kCellRelTol);
  if (!r.converged) throw NumericalError("quadrature of W^2 did not converge for " + W.id);
  return std::sqrt(r.value);
}

double l2_distance(const StepGraphon& A, const Graphon& B) {
  // ||A - W||^2 = ||W - P W||^2 + ||A - P W||^2 with P the projection at A's
  // resolution; the first term is ||W||^2 - ||P W||^2 by orthogonality.
  const double norm_w = l2_norm(B);
  if (!std::isfinite(norm_w)) return kInf;
  const std::size_t n = A.size();
  const StepGraphon P = project(B, n);
  const double nn = static_cast<double>(n);
  double diff = 0.0;
  double proj = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) {
    const double d = A.values()[k] - P.values()[k];
    diff += d * d;
    proj += P.values()[k] * P.values()[k];
  }
  const double residual = std::max(0.0, norm_w * norm_w - proj / (nn * nn));
  return std::sqrt(residual + diff / (nn * nn));
}

double l2_distance(const StepGraphon& A, const StepGraphon& B) {
  const StepGraphon& coarse = A.size() <= B.size() ? A : B;
  const StepGraphon& fine = A.size() <= B.size() ? B : A;
  const std::size_t n = coarse.size();
  const std::size_t m = fine.size();
  if (m % n != 0) {
    throw InvalidArgument("l2_distance: resolutions " + std::to_string(A.size()) + " and " +
                          std::to_string(B.size()) + " are not nested");
  }
  const std::size_t r = m / n;
  double acc = 0.0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const double d = coarse(p / r, q / r) - fine(p, q);
      acc += d * d;
    }
  const double mm = static_cast<double>(m);
  return std::sqrt(acc / (mm * mm));
}

DegreeBounds degree_bounds(const StepGraphon& S) {
  const std::size_t n = S.size();
  const double nn = static_cast<double>(n);
  std::vector<double> col(n, 0.0);
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += S(i, j);
      col[j] += S(i, j);
    }
    w2 = std::max(w2, row / nn);
  }
  double w1 = 0.0;
  for (double c : col) w1 = std::max(w1, c / nn);
  return {w1, w2};
}

// ---------------------------------------------------------------------------
// Serialization

void write_binary(std::ostream& out, const StepGraphon& S) {
  detail::put_magic(out, "SGW1");
  detail::put_le(out, static_cast<std::uint32_t>(S.size()));
  detail::put_le(out, static_cast<std::uint8_t>(S.symmetric() ? 1 : 0));
  for (double v : S.values()) detail::put_f64(out, v);
}

StepGraphon read_step_graphon(std::istream& in) {
  detail::expect_magic(in, "SGW1");
  const auto n = detail::get_le<std::uint32_t>(in);
  const auto sym = detail::get_le<std::uint8_t>(in);
  if (n == 0) throw FormatError("SGW1: n must be positive");
  if (sym > 1) throw FormatError("SGW1: symmetric flag must be 0 or 1");
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (double& x : v) x = detail::get_f64(in);
  try {
    return StepGraphon(n, std::move(v), sym == 1);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("SGW1: ") + e.what());
  }
}

void write_csv(std::ostream& out, const StepGraphon& S) {
  const std::size_t n = S.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << detail::format_number(S(i, j));
    }
    out << '\n';
  }
}

}  // namespace gkm
