#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gkm/dynamics.hpp"
#include "gkm/graphon.hpp"

namespace gkm {

/// Piecewise-constant function on the uniform n-cell mesh of [0, 1].
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  /// L2(0, 1) norm, equal to the discrete norm (n^-1 sum v_i^2)^(1/2).
  double l2_norm() const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> values_;
};

/// (K v)_i = n^-1 sum_j W_ij D(v_j - v_i) for a step kernel at the mesh of v.
StepFunction apply_K(const StepGraphon& W, const CouplingFunction& D, const StepFunction& v);

/// Cell averages of (K v)(x) = int W(x, y) D(v(y) - v(x)) dy for an analytic
/// kernel, i.e. apply_K with project(W, n).
StepFunction apply_K(const Graphon& W, const CouplingFunction& D, const StepFunction& v);

/// ||K_A v - K_W v||_{L2(0,1)} where K_A uses the step kernel A at the mesh of
/// v and K_W the analytic kernel; the x-integral runs cell by cell with
/// adaptive quadrature over the graphon's row integrals.
double operator_distance(const StepGraphon& A, const Graphon& W, const CouplingFunction& D,
                         const StepFunction& v);

/// Block means over groups of N / n cells.
StepFunction restrict_to(const StepFunction& u, std::size_t n);
/// Repeats every value N / n times.
StepFunction prolong_to(const StepFunction& u, std::size_t N);
std::vector<double> prolong_to(std::span<const double> u, std::size_t N);

struct GalerkinOptions {
  /// Directory for cached reference solutions; no caching when empty.
  std::filesystem::path cache_dir;
  IntegrateOptions integrate;
};

/// Solves the coefficient system du_i = f(u_i, t) + N^-1 sum_j W_ij D(u_j - u_i)
/// with W_ij = cell averages of W and u_i(0) = cell averages of g.
Trajectory galerkin_solve(const Graphon& W, const Forcing& f, const CouplingFunction& D,
                          const InitialProfile& g, std::size_t N, double T, double dt,
                          const GalerkinOptions& options = {});

/// Cache file name of a reference solution, derived from the ids of its
/// ingredients and the discretization parameters.
std::string reference_key(const Graphon& W, const Forcing& f, const CouplingFunction& D,
                          const InitialProfile& g, std::size_t N, double T, double dt);

}  // namespace gkm
