#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gkm {

// The unit interval is split into n cells I_i = (i/n, (i+1)/n], i = 0..n-1.
// All indices in the C++ API are 0-based; text formats use 1-based indices.

/// Piecewise-constant kernel on the uniform n x n partition of the unit square,
/// stored as a dense row-major matrix of cell values.
class StepGraphon {
 public:
  StepGraphon() = default;

  /// Throws InvalidArgument if an entry is negative or non-finite, if the size
  /// does not match n*n, or if `symmetric` is set but values are not.
  StepGraphon(std::size_t n, std::vector<double> values, bool symmetric);

  static StepGraphon constant(std::size_t n, double c);

  std::size_t size() const { return n_; }
  bool symmetric() const { return symmetric_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }
  std::span<const double> values() const { return values_; }

  /// L2 norm on the unit square: (n^-2 sum v_ij^2)^(1/2).
  double l2_norm() const;
  double max_value() const;

  friend bool operator==(const StepGraphon&, const StepGraphon&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// A graph limit: a nonnegative kernel on the unit square with optional
/// closed forms. Missing closed forms fall back to adaptive quadrature.
struct Graphon {
  std::string id;
  std::function<double(double, double)> kernel;
  bool symmetric = false;

  /// n^2 times the integral over I_i x I_j.
  std::function<double(std::size_t n, std::size_t i, std::size_t j)> cell_average;
  /// Cell average of min(cap, W).
  std::function<double(std::size_t n, std::size_t i, std::size_t j, double cap)>
      truncated_cell_average;
  /// Integral of W(x, y) over y in [y0, y1].
  std::function<double(double x, double y0, double y1)> row_integral;

  std::optional<double> l2_norm;
  /// Known bound sup W; lets truncation short-circuit when inactive.
  std::optional<double> upper_bound;
  /// Kernel blows up on x = 0 or y = 0; generic quadrature refuses such cells.
  bool singular_on_axes = false;

  double operator()(double x, double y) const { return kernel(x, y); }
};

namespace graphons {

Graphon constant(double c);
/// W(x, y) = (1 - beta)^2 (x y)^-beta, 0 < beta < 1.
Graphon power_law(double beta);
/// W = 1; sparsity enters only through alpha_n.
Graphon erdos_renyi();
/// W = 1 - p on the periodic band min(|x-y|, 1-|x-y|) <= r, p elsewhere.
Graphon small_world(double p, double r);
/// The step function of S viewed as a graphon on the unit square.
Graphon from_step(const StepGraphon& S);

}  // namespace graphons

double cell_average(const Graphon& W, std::size_t n, std::size_t i, std::size_t j);

/// L2 projection of W onto step functions at resolution n.
StepGraphon project(const Graphon& W, std::size_t n);

/// Cell averages of min(1/alpha, W), 0 < alpha <= 1.
StepGraphon truncate_project(const Graphon& W, std::size_t n, double alpha);

/// ||W||_{L2(I^2)}; uses the hint when present. +inf when not square integrable.
double l2_norm(const Graphon& W);

double l2_distance(const StepGraphon& A, const Graphon& B);
/// One resolution must divide the other; compared exactly on the finer mesh.
double l2_distance(const StepGraphon& A, const StepGraphon& B);

/// Discrete versions of the sup-integral degree conditions: w1 is the largest
/// column mean (sup_y int W dx), w2 the largest row mean (sup_x int W dy).
struct DegreeBounds {
  double w1 = 0.0;
  double w2 = 0.0;
};
DegreeBounds degree_bounds(const StepGraphon& S);

// Binary layout: "SGW1", u32 n, u8 symmetric, n^2 little-endian f64 row-major.
void write_binary(std::ostream& out, const StepGraphon& S);
StepGraphon read_step_graphon(std::istream& in);
void write_csv(std::ostream& out, const StepGraphon& S);

}  // namespace gkm
