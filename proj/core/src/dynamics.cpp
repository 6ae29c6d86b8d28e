#include "gkm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/quadrature.hpp"

namespace gkm {

// ---------------------------------------------------------------------------
// Built-in model ingredients

namespace couplings {

CouplingFunction sine() {
  return {"sine", [](double u) { return std::sin(u); }, 1.0, true, Harmonic{1.0, 0.0}};
}

CouplingFunction sakaguchi(double phase) {
  if (!std::isfinite(phase)) throw InvalidArgument("sakaguchi: phase must be finite");
  return {"sakaguchi(" + detail::format_number(phase) + ")",
          [phase](double u) { return std::sin(u + phase); }, 1.0, true,
          Harmonic{std::cos(phase), std::sin(phase)}};
}

CouplingFunction custom(std::string id, std::function<double(double)> eval, double lipschitz) {
  if (!(lipschitz > 0.0)) throw InvalidArgument("coupling Lipschitz constant must be positive");
  return {std::move(id), std::move(eval), lipschitz, true, std::nullopt};
}

}  // namespace couplings

namespace forcings {

Forcing zero() {
  return {"zero", [](double, double) { return 0.0; }, 0.0, 0.0};
}

Forcing constant(double omega) {
  return {"constant(" + detail::format_number(omega) + ")",
          [omega](double, double) { return omega; }, 0.0, std::abs(omega)};
}

Forcing linear(double rate) {
  return {"linear(" + detail::format_number(rate) + ")",
          [rate](double u, double) { return rate * u; }, std::abs(rate), 0.0};
}

Forcing custom(std::string id, std::function<double(double, double)> eval, double lipschitz_u,
               double f0_bound) {
  if (!(lipschitz_u >= 0.0) || !(f0_bound >= 0.0))
    throw InvalidArgument("forcing constants must be nonnegative");
  return {std::move(id), std::move(eval), lipschitz_u, f0_bound};
}

}  // namespace forcings

namespace profiles {

InitialProfile linear(double slope) {
  return {"linear(" + detail::format_number(slope) + ")",
          [slope](double x) { return slope * x; },
          [slope](double x) { return 0.5 * slope * x * x; }, slope * slope / 3.0};
}

InitialProfile constant(double c) {
  return {"constant(" + detail::format_number(c) + ")", [c](double) { return c; },
          [c](double x) { return c * x; }, c * c};
}

InitialProfile custom(std::string id, std::function<double(double)> eval) {
  return {std::move(id), std::move(eval), nullptr, std::nullopt};
}

}  // namespace profiles

std::vector<double> initial_from_g(const InitialProfile& g, std::size_t n) {
  if (n == 0) throw InvalidArgument("initial_from_g: n must be positive");
  const double h = 1.0 / static_cast<double>(n);
  const double scale = static_cast<double>(n);
  std::vector<double> u0(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = static_cast<double>(i + 1) * h;
    if (g.antiderivative) {
      u0[i] = scale * (g.antiderivative(b) - g.antiderivative(a));
      continue;
    }
    const auto r = quadrature::integrate(g.eval, a, b, 1e-10, 1e-14);
    if (!r.converged)
      throw NumericalError("initial_from_g: quadrature failed on cell " + std::to_string(i + 1) +
                           " of " + std::to_string(n) + " for " + g.id);
    u0[i] = scale * r.value;
  }
  return u0;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  const std::size_t n = spec_.n;
  if (n == 0) throw InvalidArgument("Model: n must be positive");
  if (!spec_.coupling.eval || !spec_.forcing.eval)
    throw InvalidArgument("Model: coupling and forcing must be set");

  std::vector<double> row_sum(n, 0.0);
  std::vector<double> row_sq(n, 0.0);
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, AveragedBackend>) {
          if (!b.kernel) throw InvalidArgument("Model: averaged backend without kernel");
          if (b.kernel->size() != n) throw InvalidArgument("Model: kernel size differs from n");
          kernel_ = b.kernel.get();
          for (std::size_t i = 0; i < n; ++i)
            for (double w : kernel_->row(i)) {
              row_sum[i] += w;
              row_sq[i] += w * w;
            }
        } else {
          if (!b.graph) throw InvalidArgument("Model: graph backend without graph");
          if (b.graph->size() != n) throw InvalidArgument("Model: graph size differs from n");
          graph_ = b.graph.get();
          for (std::size_t i = 0; i < n; ++i)
            graph_->for_each_in_row(i, [&](std::size_t, double w) {
              row_sum[i] += w;
              row_sq[i] += w * w;
            });
        }
      },
      spec_.backend);

  const double dn = static_cast<double>(n);
  row_scale_.assign(n, 1.0 / dn);
  if (const auto* r = std::get_if<RandomGraphBackend>(&spec_.backend)) {
    if (!(r->alpha > 0.0 && r->alpha <= 1.0))
      throw InvalidArgument("Model: alpha must lie in (0, 1]");
    row_scale_.assign(n, 1.0 / (dn * r->alpha));
  } else if (std::holds_alternative<DegreeNormalizedBackend>(spec_.backend)) {
    std::string isolated;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (row_sum[i] > 0.0) {
        row_scale_[i] = 1.0 / row_sum[i];
        continue;
      }
      if (count++ < 20) isolated += (isolated.empty() ? "" : ", ") + std::to_string(i + 1);
    }
    if (count > 0)
      throw InvalidArgument("degree-normalized model: " + std::to_string(count) +
                            " node(s) with zero degree: " + isolated + (count > 20 ? ", ..." : ""));
  }

  double norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    norm_sq += row_scale_[i] * row_scale_[i] * row_sq[i];
    max_row_mean_ = std::max(max_row_mean_, row_scale_[i] * row_sum[i]);
  }
  kernel_norm_ = std::sqrt(norm_sq);
}

double Model::lipschitz_bound() const {
  return spec_.forcing.lipschitz_u +
         spec_.coupling.lipschitz * (kernel_norm_ + max_row_mean_);
}

double Model::dt_max() const { return 0.1 / (lipschitz_bound() + 1.0); }

void Model::interaction_harmonic(std::span<const double> u, std::span<double> du,
                                 RhsWorkspace& ws) const {
  const std::size_t n = spec_.n;
  const Harmonic h = *spec_.coupling.harmonic;
  ws.sin_u.resize(n);
  ws.cos_u.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ws.sin_u[j] = std::sin(u[j]);
    ws.cos_u[j] = std::cos(u[j]);
  }
  const double* sv = ws.sin_u.data();
  const double* cv = ws.cos_u.data();
  const auto rows = static_cast<std::ptrdiff_t>(n);

  // With S_i = sum_j K_ij sin u_j and C_i = sum_j K_ij cos u_j,
  //   sum_j K_ij sin(u_j - u_i) = cos u_i S_i - sin u_i C_i
  //   sum_j K_ij cos(u_j - u_i) = cos u_i C_i + sin u_i S_i.
  // Dense and sparse rows accumulate in the same column order, so a complete
  // graph reproduces the all-ones kernel bit for bit.
#pragma omp parallel for schedule(static) if (n >= 128)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double S = 0.0;
    double C = 0.0;
    if (kernel_ != nullptr || !graph_->sparse()) {
      const double* row = kernel_ ? kernel_->row(i).data() : graph_->dense_weights().data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        S += row[j] * sv[j];
        C += row[j] * cv[j];
      }
    } else {
      const auto offsets = graph_->row_offsets();
      const auto cols = graph_->columns();
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
        S += sv[cols[k]];
        C += cv[cols[k]];
      }
    }
    const double si = sv[i];
    const double ci = cv[i];
    du[i] += row_scale_[i] *
             (h.sin_coef * (ci * S - si * C) + h.cos_coef * (ci * C + si * S));
  }
}

void Model::interaction_generic(std::span<const double> u, std::span<double> du) const {
  const std::size_t n = spec_.n;
  const auto& D = spec_.coupling.eval;
  const auto rows = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (n >= 128)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      double acc = 0.0;
      if (kernel_ != nullptr) {
        const auto row = kernel_->row(i);
        for (std::size_t j = 0; j < n; ++j)
          if (row[j] != 0.0) acc += row[j] * D(u[j] - u[i]);
      } else {
        graph_->for_each_in_row(i, [&](std::size_t j, double w) { acc += w * D(u[j] - u[i]); });
      }
      du[i] += row_scale_[i] * acc;
    } catch (...) {
#pragma omp critical(gkm_rhs_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void Model::rhs(std::span<const double> u, double t, std::span<double> du,
                RhsWorkspace& ws) const {
  const std::size_t n = spec_.n;
  if (u.size() != n || du.size() != n) throw InvalidArgument("rhs: state length differs from n");
  for (std::size_t i = 0; i < n; ++i) du[i] = spec_.forcing.eval(u[i], t);
  if (spec_.coupling.harmonic)
    interaction_harmonic(u, du, ws);
  else
    interaction_generic(u, du);
}

std::vector<double> Model::rhs(std::span<const double> u, double t) const {
  std::vector<double> du(spec_.n);
  RhsWorkspace ws;
  rhs(u, t, du, ws);
  return du;
}

std::vector<double> rhs(const ModelSpec& spec, std::span<const double> u, double t) {
  return Model(spec).rhs(u, t);
}

// ---------------------------------------------------------------------------
// Degree-normalized averaged kernel

StepGraphon build_U(const StepGraphon& barW) {
  const std::size_t n = barW.size();
  if (n == 0) throw InvalidArgument("build_U: empty kernel");
  if (!barW.symmetric()) throw InvalidArgument("build_U: kernel must be symmetric");
  std::vector<double> col_mean(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) col_mean[i] += barW(k, i);
  std::string zero;
  for (std::size_t i = 0; i < n; ++i) {
    col_mean[i] /= static_cast<double>(n);
    if (!(col_mean[i] > 0.0)) zero += (zero.empty() ? "" : ", ") + std::to_string(i + 1);
  }
  if (!zero.empty()) throw InvalidArgument("build_U: zero column sum in column(s) " + zero);
  std::vector<double> U(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) U[i * n + j] = barW(i, j) / col_mean[i];
  return StepGraphon(n, std::move(U), false);
}

StepGraphon build_U(const WeightedGraph& G) {
  const std::size_t n = G.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    G.for_each_in_row(i, [&](std::size_t j, double a) { w[i * n + j] = a; });
  return build_U(StepGraphon(n, std::move(w), !G.directed()));
}

// ---------------------------------------------------------------------------
// Trajectories and integration

Trajectory::Trajectory(std::size_t n, double dt, std::vector<double> states)
    : n_(n), dt_(dt), states_(std::move(states)) {
  if (n == 0) throw InvalidArgument("Trajectory: n must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("Trajectory: dt must be positive");
  if (states_.empty() || states_.size() % n != 0)
    throw InvalidArgument("Trajectory: state count is not a positive multiple of n");
}

Trajectory integrate(const Model& model, std::span<const double> u0, double T, double dt,
                     const IntegrateOptions& options) {
  const std::size_t n = model.size();
  if (u0.size() != n) throw InvalidArgument("integrate: u0 length differs from n");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("integrate: T must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
  const double limit = model.dt_max();
  if (dt > limit * (1.0 + 1e-12))
    throw InvalidArgument("integrate: dt = " + detail::format_number(dt) +
                          " exceeds the stability limit " + detail::format_number(limit));
  for (double v : u0)
    if (!std::isfinite(v)) throw InvalidArgument("integrate: non-finite initial state");

  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  std::vector<double> states((steps + 1) * n);
  std::copy(u0.begin(), u0.end(), states.begin());

  RhsWorkspace ws;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double* u = states.data() + k * n;
    double* next = states.data() + (k + 1) * n;

    model.rhs({u, n}, t, k1, ws);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
    model.rhs(tmp, t + 0.5 * dt, k2, ws);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
    model.rhs(tmp, t + 0.5 * dt, k3, ws);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * k3[i];
    model.rhs(tmp, t + dt, k4, ws);

    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      finite = finite && std::isfinite(next[i]);
    }
    if (!finite)
      throw NumericalError("integrate: non-finite state at step " + std::to_string(k + 1));
  }

  Trajectory tr(n, dt, std::move(states));
  if (options.check_apriori) {
    double g_sq = 0.0;
    if (options.initial_norm_sq) {
      g_sq = *options.initial_norm_sq;
    } else {
      for (double v : u0) g_sq += v * v;
      g_sq /= static_cast<double>(n);
    }
    const auto report = apriori_check(model, tr, g_sq);
    if (!report.satisfied())
      throw NumericalError("integrate: a priori bound violated, max energy " +
                           detail::format_number(report.max_energy) + " > " +
                           detail::format_number(report.bound));
  }
  return tr;
}

Trajectory integrate(const ModelSpec& spec, std::span<const double> u0, double T, double dt,
                     const IntegrateOptions& options) {
  return integrate(Model(spec), u0, T, dt, options);
}

AprioriReport apriori_check(const Model& model, const Trajectory& tr, double initial_norm_sq) {
  if (tr.size() != model.size()) throw InvalidArgument("apriori_check: size mismatch");
  AprioriReport report;
  const double n = static_cast<double>(tr.size());
  for (std::size_t k = 0; k < tr.rows(); ++k) {
    double e = 0.0;
    for (double v : tr.state(k)) e += v * v;
    report.max_energy = std::max(report.max_energy, e / n);
  }
  const auto& f = model.spec().forcing;
  const double K = model.kernel_l2_norm();
  const double c3 = 2.0 * (f.lipschitz_u + f.f0_bound + K);
  const double c4 = 2.0 * (f.f0_bound + K);
  report.bound = std::exp(c3 * tr.final_time()) * (initial_norm_sq + c4);
  return report;
}

void write_csv(std::ostream& out, const Trajectory& tr, std::size_t stride) {
  if (stride == 0) throw InvalidArgument("write_csv: stride must be positive");
  out << 't';
  for (std::size_t i = 0; i < tr.size(); ++i) out << ",u_" << (i + 1);
  out << '\n';
  for (std::size_t k = 0; k < tr.rows(); ++k) {
    if (k % stride != 0 && k != tr.steps()) continue;
    out << detail::format_number(tr.time(k));
    for (double v : tr.state(k)) out << ',' << detail::format_number(v);
    out << '\n';
  }
}

void write_binary(std::ostream& out, const Trajectory& tr) {
  detail::put_magic(out, "TRJ1");
  detail::put_le(out, static_cast<std::uint32_t>(tr.size()));
  detail::put_le(out, static_cast<std::uint64_t>(tr.rows()));
  detail::put_f64(out, tr.dt());
  for (double v : tr.data()) detail::put_f64(out, v);
}

Trajectory read_trajectory(std::istream& in) {
  detail::expect_magic(in, "TRJ1");
  const auto n = detail::get_le<std::uint32_t>(in);
  const auto rows = detail::get_le<std::uint64_t>(in);
  const double dt = detail::get_f64(in);
  if (n == 0 || rows == 0 || !(dt > 0.0)) throw FormatError("TRJ1: bad header");
  if (rows > (std::uint64_t{1} << 40) / n) throw FormatError("TRJ1: implausible size");
  std::vector<double> states(static_cast<std::size_t>(rows) * n);
  for (double& v : states) v = detail::get_f64(in);
  return Trajectory(n, dt, std::move(states));
}

}  // namespace gkm
