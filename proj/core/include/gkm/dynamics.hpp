#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gkm/graph.hpp"
#include "gkm/graphon.hpp"

namespace gkm {

/// D(u) = sin_coef * sin(u) + cos_coef * cos(u). Couplings of this shape
/// are evaluated with two matrix-vector products instead of per-edge trig.
struct Harmonic {
  double sin_coef = 1.0;
  double cos_coef = 0.0;
};

/// 2*pi-periodic Lipschitz coupling D with |D| <= 1.
struct CouplingFunction {
  std::string id;
  std::function<double(double)> eval;
  double lipschitz = 1.0;
  bool periodic = true;
  std::optional<Harmonic> harmonic;

  double operator()(double u) const { return eval(u); }
};

namespace couplings {
CouplingFunction sine();
/// sin(u + phase).
CouplingFunction sakaguchi(double phase);
CouplingFunction custom(std::string id, std::function<double(double)> eval, double lipschitz);
}  // namespace couplings

/// Node-independent forcing f(u, t), Lipschitz in u.
struct Forcing {
  std::string id;
  std::function<double(double, double)> eval;
  double lipschitz_u = 0.0;
  /// Upper bound for |f(0, t)| over the horizons of interest.
  double f0_bound = 0.0;

  double operator()(double u, double t) const { return eval(u, t); }
};

namespace forcings {
Forcing zero();
Forcing constant(double omega);
/// f(u, t) = rate * u.
Forcing linear(double rate);
Forcing custom(std::string id, std::function<double(double, double)> eval, double lipschitz_u,
               double f0_bound);
}  // namespace forcings

/// Initial profile g on [0, 1]. Cell averages use the antiderivative when
/// one is given and adaptive quadrature otherwise.
struct InitialProfile {
  std::string id;
  std::function<double(double)> eval;
  std::function<double(double)> antiderivative;
  std::optional<double> l2_norm_sq;
};

namespace profiles {
/// g(x) = slope * x.
InitialProfile linear(double slope);
InitialProfile constant(double c);
InitialProfile custom(std::string id, std::function<double(double)> eval);
}  // namespace profiles

/// u0_i = n * integral of g over the i-th cell.
std::vector<double> initial_from_g(const InitialProfile& g, std::size_t n);

// Coupling backends. The interaction term of node i is
//   random graph:      (n alpha)^-1 sum_j a_ij D(u_j - u_i)
//   averaged:          n^-1 sum_j K_ij D(u_j - u_i)
//   degree-normalized: d_i^-1 sum_j a_ij D(u_j - u_i),   d_i = sum_j a_ij
struct RandomGraphBackend {
  std::shared_ptr<const WeightedGraph> graph;
  double alpha = 1.0;
};
struct AveragedBackend {
  std::shared_ptr<const StepGraphon> kernel;
};
struct DegreeNormalizedBackend {
  std::shared_ptr<const WeightedGraph> graph;
};
using Backend = std::variant<RandomGraphBackend, AveragedBackend, DegreeNormalizedBackend>;

struct ModelSpec {
  Forcing forcing;
  CouplingFunction coupling;
  Backend backend;
  std::size_t n = 0;
};

/// Scratch buffers for one right-hand-side evaluation; one per trajectory.
struct RhsWorkspace {
  std::vector<double> sin_u;
  std::vector<double> cos_u;
};

/// A validated ModelSpec with its coupling kernel prepared for repeated
/// right-hand-side evaluation. Every backend is written as
///   du_i = f(u_i, t) + n^-1 sum_j K_ij D(u_j - u_i)
/// for an effective kernel K (A / alpha, the cell averages, or n a_ij / d_i).
class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return spec_.n; }

  void rhs(std::span<const double> u, double t, std::span<double> du, RhsWorkspace& ws) const;
  std::vector<double> rhs(std::span<const double> u, double t) const;

  /// L2 norm of the effective kernel as a step function on the unit square.
  double kernel_l2_norm() const { return kernel_norm_; }
  /// Largest row mean n^-1 sum_j K_ij.
  double max_row_mean() const { return max_row_mean_; }
  /// L_f + L_D (||K|| + max row mean): Lipschitz constant of the RHS in the
  /// discrete L2 norm.
  double lipschitz_bound() const;
  /// Largest step the integrator accepts for this model.
  double dt_max() const;

 private:
  void interaction_harmonic(std::span<const double> u, std::span<double> du,
                            RhsWorkspace& ws) const;
  void interaction_generic(std::span<const double> u, std::span<double> du) const;

  ModelSpec spec_;
  const WeightedGraph* graph_ = nullptr;
  const StepGraphon* kernel_ = nullptr;
  // Per-row factor that turns the raw sum into the interaction term.
  std::vector<double> row_scale_;
  double kernel_norm_ = 0.0;
  double max_row_mean_ = 0.0;
};

std::vector<double> rhs(const ModelSpec& spec, std::span<const double> u, double t);

/// U_ij = barW_ij / (n^-1 sum_k barW_ki): the averaged kernel matching the
/// degree-normalized model. Throws if a column sum vanishes.
StepGraphon build_U(const StepGraphon& barW);
/// Same, from the weight matrix of a graph (e.g. alpha_n barW stored densely).
StepGraphon build_U(const WeightedGraph& G);

/// Uniform-grid solution t_k = k dt, k = 0..K; phases live on the real line.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t n, double dt, std::vector<double> states);

  std::size_t size() const { return n_; }
  std::size_t rows() const { return n_ == 0 ? 0 : states_.size() / n_; }
  std::size_t steps() const { return rows() - 1; }
  double dt() const { return dt_; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_; }
  double final_time() const { return time(steps()); }
  std::span<const double> state(std::size_t k) const { return {states_.data() + k * n_, n_}; }
  std::span<const double> final_state() const { return state(steps()); }
  std::span<const double> data() const { return states_; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::size_t n_ = 0;
  double dt_ = 0.0;
  std::vector<double> states_;
};

struct IntegrateOptions {
  /// Compare the trajectory against the a priori energy bound and throw
  /// NumericalError when it is exceeded. On by default in debug builds.
#ifdef NDEBUG
  bool check_apriori = false;
#else
  bool check_apriori = true;
#endif
  /// ||g||^2 for the a priori check; defaults to ||u0||^2.
  std::optional<double> initial_norm_sq;
};

/// Classical RK4 with K = ceil(T / dt) steps. Throws InvalidArgument when
/// dt exceeds model.dt_max() and NumericalError on a non-finite state.
Trajectory integrate(const Model& model, std::span<const double> u0, double T, double dt,
                     const IntegrateOptions& options = {});
Trajectory integrate(const ModelSpec& spec, std::span<const double> u0, double T, double dt,
                     const IntegrateOptions& options = {});

/// max_t ||u(t)||^2 against e^{C3 T} (||g||^2 + C4), C3 = 2 (L_f + F + ||K||),
/// C4 = 2 (F + ||K||), with ||K|| the effective kernel norm.
struct AprioriReport {
  double max_energy = 0.0;
  double bound = 0.0;
  bool satisfied() const { return max_energy <= bound; }
};
AprioriReport apriori_check(const Model& model, const Trajectory& trajectory,
                            double initial_norm_sq);

// CSV: header "t,u_1,...,u_n", then every stride-th row (the last row is
// always written). Binary: "TRJ1", u32 n, u64 K+1, f64 dt, row-major f64 states.
void write_csv(std::ostream& out, const Trajectory& tr, std::size_t stride = 1);
void write_binary(std::ostream& out, const Trajectory& tr);
Trajectory read_trajectory(std::istream& in);

}  // namespace gkm
