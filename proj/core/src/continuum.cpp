#include "gkm/continuum.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <string>

#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/quadrature.hpp"

namespace gkm {

StepFunction::StepFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("StepFunction: needs at least one cell");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("StepFunction: non-finite value");
}

double StepFunction::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s / static_cast<double>(values_.size()));
}

StepFunction apply_K(const StepGraphon& W, const CouplingFunction& D, const StepFunction& v) {
  const std::size_t n = v.size();
  if (W.size() != n)
    throw InvalidArgument("apply_K: kernel resolution " + std::to_string(W.size()) +
                          " differs from function resolution " + std::to_string(n));
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto row = W.row(i);
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * D(v[j] - v[i]);
    out[i] = acc / static_cast<double>(n);
  }
  return StepFunction(std::move(out));
}

StepFunction apply_K(const Graphon& W, const CouplingFunction& D, const StepFunction& v) {
  return apply_K(project(W, v.size()), D, v);
}

double operator_distance(const StepGraphon& A, const Graphon& W, const CouplingFunction& D,
                         const StepFunction& v) {
  const std::size_t n = v.size();
  if (A.size() != n) throw InvalidArgument("operator_distance: resolution mismatch");
  const double h = 1.0 / static_cast<double>(n);
  const StepFunction Av = apply_K(A, D, v);

  auto row_part = [&](double x, double y0, double y1) {
    if (W.row_integral) return W.row_integral(x, y0, y1);
    const auto r = quadrature::integrate([&](double y) { return W(x, y); }, y0, y1, 1e-12);
    if (!r.converged) throw NumericalError("operator_distance: row quadrature failed");
    return r.value;
  };

  std::vector<double> cell_sq(n, 0.0);
  std::exception_ptr failure;
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (n >= 32)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      std::vector<double> d(n);
      for (std::size_t j = 0; j < n; ++j) d[j] = D(v[j] - v[i]);
      auto gap_sq = [&](double x) {
        double kw = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          kw += d[j] * row_part(x, static_cast<double>(j) * h, static_cast<double>(j + 1) * h);
        const double g = Av[i] - kw;
        return g * g;
      };
      const double x0 = static_cast<double>(i) * h;
      const double x1 = static_cast<double>(i + 1) * h;
      const auto r = (i == 0 && W.singular_on_axes)
                         ? quadrature::integrate_singular(gap_sq, x0, x1, 1e-9, 1e-15)
                         : quadrature::integrate(gap_sq, x0, x1, 1e-9, 1e-15);
      if (!r.converged)
        throw NumericalError("operator_distance: quadrature failed on cell " +
                             std::to_string(i + 1) + " at n=" + std::to_string(n));
      cell_sq[i] = r.value;
    } catch (...) {
#pragma omp critical(gkm_operator_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  double total = 0.0;
  for (double c : cell_sq) total += c;
  return std::sqrt(total);
}

StepFunction restrict_to(const StepFunction& u, std::size_t n) {
  const std::size_t N = u.size();
  if (n == 0 || N % n != 0)
    throw InvalidArgument("restrict_to: " + std::to_string(n) + " does not divide " +
                          std::to_string(N));
  const std::size_t block = N / n;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Mean taken relative to the first entry, so a constant block returns
    // its value exactly.
    const double base = u[i * block];
    double s = 0.0;
    for (std::size_t k = 1; k < block; ++k) s += u[i * block + k] - base;
    out[i] = base + s / static_cast<double>(block);
  }
  return StepFunction(std::move(out));
}

std::vector<double> prolong_to(std::span<const double> u, std::size_t N) {
  const std::size_t n = u.size();
  if (n == 0 || N % n != 0)
    throw InvalidArgument("prolong_to: " + std::to_string(N) + " is not a multiple of " +
                          std::to_string(n));
  const std::size_t block = N / n;
  std::vector<double> out(N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < block; ++k) out[i * block + k] = u[i];
  return out;
}

StepFunction prolong_to(const StepFunction& u, std::size_t N) {
  return StepFunction(prolong_to(u.values(), N));
}

std::string reference_key(const Graphon& W, const Forcing& f, const CouplingFunction& D,
                          const InitialProfile& g, std::size_t N, double T, double dt) {
  const std::string text = W.id + '|' + g.id + '|' + f.id + '|' + D.id + '|' + std::to_string(N) +
                           '|' + detail::format_number(T) + '|' + detail::format_number(dt);
  return "ref-" + detail::hex64(detail::fnv1a(text));
}

Trajectory galerkin_solve(const Graphon& W, const Forcing& f, const CouplingFunction& D,
                          const InitialProfile& g, std::size_t N, double T, double dt,
                          const GalerkinOptions& options) {
  std::filesystem::path cached;
  if (!options.cache_dir.empty()) {
    cached = options.cache_dir / (reference_key(W, f, D, g, N, T, dt) + ".trj");
    std::ifstream in(cached, std::ios::binary);
    if (in) {
      Trajectory tr = read_trajectory(in);
      const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
      if (tr.size() == N && tr.dt() == dt && tr.steps() == steps) return tr;
    }
  }

  auto kernel = std::make_shared<const StepGraphon>(project(W, N));
  const Model model(ModelSpec{f, D, AveragedBackend{kernel}, N});
  const auto u0 = initial_from_g(g, N);
  IntegrateOptions opts = options.integrate;
  if (!opts.initial_norm_sq && g.l2_norm_sq) opts.initial_norm_sq = g.l2_norm_sq;
  Trajectory tr = integrate(model, u0, T, dt, opts);

  if (!cached.empty()) {
    std::filesystem::create_directories(options.cache_dir);
    // Unique temporary name so concurrent writers never share a partial file.
    const auto tmp = cached.string() + ".tmp" + std::to_string(std::random_device{}());
    {
      std::ofstream out(tmp, std::ios::binary);
      write_binary(out, tr);
      if (!out) throw std::runtime_error("galerkin_solve: cannot write cache file " + tmp);
    }
    std::filesystem::rename(tmp, cached);
  }
  return tr;
}

}  // namespace gkm
