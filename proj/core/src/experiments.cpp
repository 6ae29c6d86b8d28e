#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>

#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/experiments.hpp"
#include "gkm/graph.hpp"

namespace gkm::experiments {
namespace {

constexpr double kDegreeSlopeTolerance = 0.05;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Ingredients {
  Graphon W;
  CouplingFunction D;
  Forcing f;
  InitialProfile g;
};

Ingredients ingredients(const ExperimentConfig& cfg) {
  return {make_graphon(cfg.graphon), make_coupling(cfg.coupling), make_forcing(cfg.forcing),
          make_initial(cfg.initial)};
}

ExperimentRecord start(const ExperimentConfig& cfg, Kind expected) {
  if (cfg.kind != expected)
    throw InvalidArgument("config kind \"" + std::string(kind_name(cfg.kind)) +
                          "\" passed to the " + std::string(kind_name(expected)) + " runner");
  validate(cfg);
  ExperimentRecord rec;
  rec.config = cfg;
  return rec;
}

double initial_energy(const InitialProfile& g, std::span<const double> u0) {
  if (g.l2_norm_sq) return *g.l2_norm_sq;
  const double norm = discrete_l2_norm(u0);
  return norm * norm;
}

void tally(AprioriTally& t, const AprioriReport& r) {
  ++t.integrations;
  if (!r.satisfied()) ++t.violations;
  if (r.bound > 0.0) t.worst_ratio = std::max(t.worst_ratio, r.max_energy / r.bound);
}

// Integrates one system and compares it against the energy bound.
Trajectory solve(const Model& model, std::span<const double> u0, const ExperimentConfig& cfg,
                 double g_sq, ExperimentRecord& rec) {
  IntegrateOptions opts;
  opts.check_apriori = false;
  Trajectory tr = integrate(model, u0, cfg.T, cfg.dt, opts);
  tally(rec.apriori, apriori_check(model, tr, g_sq));
  return tr;
}

Trajectory reference_solution(const Ingredients& in, const ExperimentConfig& cfg,
                              ExperimentRecord& rec) {
  Stopwatch clock;
  GalerkinOptions opts;
  opts.cache_dir = cfg.cache_dir;
  opts.integrate.check_apriori = false;
  Trajectory ref = galerkin_solve(in.W, in.f, in.D, in.g, cfg.n_ref, cfg.T, cfg.dt, opts);
  const Model model(ModelSpec{in.f, in.D,
                              AveragedBackend{std::make_shared<const StepGraphon>(
                                  project(in.W, cfg.n_ref))},
                              cfg.n_ref});
  tally(rec.apriori, apriori_check(model, ref, initial_energy(in.g, ref.state(0))));
  rec.timings["reference"] = clock.seconds();
  return ref;
}

double alpha_of(std::size_t n, double gamma) { return std::pow(static_cast<double>(n), -gamma); }

SampleConfig sample_config(const ExperimentConfig& cfg, std::size_t n, std::size_t trial) {
  return {n, cfg.gamma, cfg.directed, cfg.seed, trial};
}

void add_aggregates(ExperimentRecord& rec, const std::vector<std::vector<double>>& per_n) {
  rec.aggregates.columns = {"n", "max", "mean"};
  for (std::size_t k = 0; k < per_n.size(); ++k) {
    const auto& v = per_n[k];
    const double mx = *std::max_element(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    rec.aggregates.rows.push_back({static_cast<double>(rec.config.ns[k]), mx, mean});
  }
}

std::vector<double> column(const Table& t, std::size_t c) {
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(row[c]);
  return out;
}

std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + detail::format_number(x);
  return s;
}

Check decreasing_check(std::string name, const std::vector<double>& e, double slack) {
  Check c{std::move(name), true, "errors " + join_values(e)};
  for (std::size_t k = 1; k < e.size(); ++k)
    if (!(e[k] < (1.0 + slack) * e[k - 1])) c.passed = false;
  return c;
}

// Fits the max-over-trials errors and, when a target exponent is given,
// checks the fitted slope against it.
void fit_and_check(ExperimentRecord& rec, const std::vector<double>& errors,
                   std::optional<double> target) {
  const auto positive = std::count_if(errors.begin(), errors.end(), [](double e) { return e > 0; });
  if (positive >= 3) {
    rec.series = fit_rate(rec.config.ns, errors, target);
    if (target) {
      const double limit = *target + rec.config.slope_slack;
      rec.checks.push_back({"rate", rec.series->slope <= limit,
                            "slope " + detail::format_number(rec.series->slope) + ", limit " +
                                detail::format_number(limit)});
    }
    return;
  }
  if (!target) return;
  const bool vanish = positive == 0;
  rec.checks.push_back({"rate", vanish,
                        vanish ? "errors vanish identically"
                               : "fewer than 3 positive errors, no rate can be fitted"});
}

std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / name;
}

}  // namespace

bool ExperimentRecord::passed() const {
  if (apriori.violations > 0) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ExperimentRecord run(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case Kind::sample_graph: return run_sample_graph(cfg);
    case Kind::simulate: return run_simulate(cfg);
    case Kind::avg_compare: return run_avg_compare(cfg);
    case Kind::galerkin_sweep: return run_galerkin_sweep(cfg);
    case Kind::e2e_converge: return run_e2e(cfg);
    case Kind::degree_law: return run_degree_law(cfg);
  }
  throw InvalidArgument("unknown experiment kind");
}

ExperimentRecord run_sample_graph(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::sample_graph);
  const Graphon W = make_graphon(cfg.graphon);
  rec.results.columns = {"n", "trial", "edges", "mean_degree", "max_relative_deviation"};
  std::vector<std::vector<double>> deviations;
  for (std::size_t n : cfg.ns) {
    const double alpha = alpha_of(n, cfg.gamma);
    const StepGraphon barW = truncate_project(W, n, alpha);
    const Degrees expected = expected_degrees(W, sample_config(cfg, n, 0));
    deviations.emplace_back();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const WeightedGraph G = sample_random(barW, sample_config(cfg, n, t));
      const Degrees d = degrees(G);
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(d.in[i] - expected.in[i]) / (alpha * static_cast<double>(n)));
      const double mean = std::accumulate(d.in.begin(), d.in.end(), 0.0) / static_cast<double>(n);
      rec.results.rows.push_back({static_cast<double>(n), static_cast<double>(t),
                                  static_cast<double>(G.nonzeros()), mean, worst});
      deviations.back().push_back(worst);
      if (cfg.save_stride > 0 && !cfg.output_dir.empty()) {
        const std::string name = "graph_n" + std::to_string(n) + "_t" + std::to_string(t) + ".wgr";
        std::ofstream out(output_path(cfg, name), std::ios::binary);
        write_binary(out, G);
        rec.artifacts.push_back(name);
      }
    }
  }
  add_aggregates(rec, deviations);
  fit_and_check(rec, column(rec.aggregates, 1), std::nullopt);
  rec.timings["total"] = clock.seconds();
  return rec;
}

ExperimentRecord run_simulate(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::simulate);
  const Ingredients in = ingredients(cfg);
  rec.results.columns = {"n", "trial", "final_mean_phase", "max_energy", "apriori_bound"};
  const bool deterministic = cfg.model == "averaged" || cfg.model == "degree-averaged";
  for (std::size_t n : cfg.ns) {
    const double alpha = alpha_of(n, cfg.gamma);
    auto barW = std::make_shared<const StepGraphon>(truncate_project(in.W, n, alpha));
    const auto u0 = initial_from_g(in.g, n);
    const double g_sq = initial_energy(in.g, u0);
    const std::size_t trials = deterministic ? 1 : cfg.trials;
    for (std::size_t t = 0; t < trials; ++t) {
      Backend backend;
      if (cfg.model == "averaged") {
        backend = AveragedBackend{barW};
      } else if (cfg.model == "degree-averaged") {
        backend = AveragedBackend{std::make_shared<const StepGraphon>(build_U(*barW))};
      } else {
        auto G = std::make_shared<const WeightedGraph>(sample_random(*barW, sample_config(cfg, n, t)));
        if (cfg.model == "random")
          backend = RandomGraphBackend{G, alpha};
        else
          backend = DegreeNormalizedBackend{G};
      }
      const Model model(ModelSpec{in.f, in.D, backend, n});
      const Trajectory tr = solve(model, u0, cfg, g_sq, rec);
      const AprioriReport report = apriori_check(model, tr, g_sq);
      const auto last = tr.final_state();
      const double mean = std::accumulate(last.begin(), last.end(), 0.0) / static_cast<double>(n);
      rec.results.rows.push_back({static_cast<double>(n), static_cast<double>(t), mean,
                                  report.max_energy, report.bound});
      if (cfg.save_stride > 0 && !cfg.output_dir.empty()) {
        const std::string stem = "trajectory_n" + std::to_string(n) + "_t" + std::to_string(t);
        std::ofstream csv(output_path(cfg, stem + ".csv"));
        write_csv(csv, tr, cfg.save_stride);
        std::ofstream bin(output_path(cfg, stem + ".trj"), std::ios::binary);
        write_binary(bin, tr);
        rec.artifacts.push_back(stem + ".csv");
        rec.artifacts.push_back(stem + ".trj");
      }
    }
  }
  rec.checks.push_back({"apriori", rec.apriori.violations == 0,
                        std::to_string(rec.apriori.violations) + " violation(s)"});
  rec.timings["total"] = clock.seconds();
  return rec;
}

ExperimentRecord run_avg_compare(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::avg_compare);
  const Ingredients in = ingredients(cfg);
  const bool degree = cfg.model == "degree";
  rec.results.columns = {"n", "trial", "error"};
  std::vector<std::vector<double>> per_n;
  for (std::size_t n : cfg.ns) {
    const double alpha = alpha_of(n, cfg.gamma);
    const StepGraphon barW = truncate_project(in.W, n, alpha);
    const auto u0 = initial_from_g(in.g, n);
    const double g_sq = initial_energy(in.g, u0);

    auto kernel = std::make_shared<const StepGraphon>(degree ? build_U(barW) : barW);
    const Model averaged(ModelSpec{in.f, in.D, AveragedBackend{kernel}, n});
    const Trajectory v = solve(averaged, u0, cfg, g_sq, rec);

    per_n.emplace_back();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      auto G = std::make_shared<const WeightedGraph>(sample_random(barW, sample_config(cfg, n, t)));
      const Backend backend = degree ? Backend{DegreeNormalizedBackend{G}}
                                     : Backend{RandomGraphBackend{G, alpha}};
      const Model random(ModelSpec{in.f, in.D, backend, n});
      const Trajectory u = solve(random, u0, cfg, g_sq, rec);
      const double error = sup_time_distance(u, v);
      rec.results.rows.push_back({static_cast<double>(n), static_cast<double>(t), error});
      per_n.back().push_back(error);
    }
  }
  add_aggregates(rec, per_n);
  fit_and_check(rec, column(rec.aggregates, 1), -(0.5 - cfg.gamma));
  rec.checks.push_back({"apriori", rec.apriori.violations == 0,
                        std::to_string(rec.apriori.violations) + " violation(s)"});
  rec.timings["total"] = clock.seconds();
  return rec;
}

ExperimentRecord run_galerkin_sweep(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::galerkin_sweep);
  const Ingredients in = ingredients(cfg);
  const Trajectory ref = reference_solution(in, cfg, rec);

  auto averaged_error = [&](std::size_t n) {
    auto kernel =
        std::make_shared<const StepGraphon>(truncate_project(in.W, n, alpha_of(n, cfg.gamma)));
    const Model model(ModelSpec{in.f, in.D, AveragedBackend{kernel}, n});
    const auto u0 = initial_from_g(in.g, n);
    const Trajectory v = solve(model, u0, cfg, initial_energy(in.g, u0), rec);
    return sup_time_distance(v, ref);
  };

  rec.results.columns = {"n", "error"};
  std::vector<std::vector<double>> per_n;
  for (std::size_t n : cfg.ns) {
    const double e = averaged_error(n);
    rec.results.rows.push_back({static_cast<double>(n), e});
    per_n.push_back({e});
  }
  add_aggregates(rec, per_n);
  const auto errors = column(rec.aggregates, 1);
  rec.checks.push_back(decreasing_check("decreasing", errors, cfg.monotone_slack));
  fit_and_check(rec, errors, std::nullopt);

  if (cfg.compute_floor) {
    const double floor = averaged_error(cfg.n_ref);
    rec.scalars["floor"] = floor;
    rec.checks.push_back({"floor", errors.back() < 10.0 * floor,
                          "final " + detail::format_number(errors.back()) + ", 10 x floor " +
                              detail::format_number(10.0 * floor)});
  }
  rec.checks.push_back({"apriori", rec.apriori.violations == 0,
                        std::to_string(rec.apriori.violations) + " violation(s)"});
  rec.timings["total"] = clock.seconds();
  return rec;
}

ExperimentRecord run_e2e(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::e2e_converge);
  const Ingredients in = ingredients(cfg);
  const Trajectory ref = reference_solution(in, cfg, rec);

  rec.results.columns = {"n", "trial", "error"};
  std::vector<std::vector<double>> per_n;
  for (std::size_t n : cfg.ns) {
    const double alpha = alpha_of(n, cfg.gamma);
    const StepGraphon barW = truncate_project(in.W, n, alpha);
    const auto u0 = initial_from_g(in.g, n);
    const double g_sq = initial_energy(in.g, u0);
    per_n.emplace_back();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      auto G = std::make_shared<const WeightedGraph>(sample_random(barW, sample_config(cfg, n, t)));
      const Model model(ModelSpec{in.f, in.D, RandomGraphBackend{G, alpha}, n});
      const double e = sup_time_distance(solve(model, u0, cfg, g_sq, rec), ref);
      rec.results.rows.push_back({static_cast<double>(n), static_cast<double>(t), e});
      per_n.back().push_back(e);
    }
  }
  add_aggregates(rec, per_n);
  const auto errors = column(rec.aggregates, 1);
  rec.checks.push_back(decreasing_check("decreasing", errors, cfg.monotone_slack));
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    std::vector<double> trial;
    for (const auto& v : per_n) trial.push_back(v[t]);
    rec.checks.push_back(decreasing_check("trial " + std::to_string(t) + " decreasing", trial, 0.0));
  }
  fit_and_check(rec, errors, std::nullopt);
  rec.checks.push_back({"apriori", rec.apriori.violations == 0,
                        std::to_string(rec.apriori.violations) + " violation(s)"});
  rec.timings["total"] = clock.seconds();
  return rec;
}

ExperimentRecord run_degree_law(const ExperimentConfig& cfg) {
  Stopwatch clock;
  ExperimentRecord rec = start(cfg, Kind::degree_law);
  const Graphon W = make_graphon(cfg.graphon);
  rec.results.columns = {"n", "node", "mean_degree", "stderr", "expected_degree"};
  const double trials = static_cast<double>(cfg.trials);
  for (std::size_t n : cfg.ns) {
    const StepGraphon barW = truncate_project(W, n, alpha_of(n, cfg.gamma));
    const Degrees expected = expected_degrees(W, sample_config(cfg, n, 0));
    std::vector<double> sum(n, 0.0);
    std::vector<double> sum_sq(n, 0.0);
    std::vector<double> trial_means;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const Degrees d = degrees(sample_random(barW, sample_config(cfg, n, t)));
      for (std::size_t i = 0; i < n; ++i) {
        sum[i] += d.in[i];
        sum_sq[i] += d.in[i] * d.in[i];
      }
      trial_means.push_back(std::accumulate(d.in.begin(), d.in.end(), 0.0) / static_cast<double>(n));
    }

    std::vector<std::size_t> nodes(n);
    std::vector<double> means(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[i] = i + 1;
      means[i] = sum[i] / trials;
      const double var =
          cfg.trials > 1 ? std::max(0.0, (sum_sq[i] - trials * means[i] * means[i]) / (trials - 1.0)) : 0.0;
      rec.results.rows.push_back({static_cast<double>(n), static_cast<double>(i + 1), means[i],
                                  std::sqrt(var / trials), expected.in[i]});
    }

    // Mean degree over all nodes, with its standard error across trials.
    const double m = std::accumulate(trial_means.begin(), trial_means.end(), 0.0) / trials;
    double ss = 0.0;
    for (double x : trial_means) ss += (x - m) * (x - m);
    const double se = cfg.trials > 1 ? std::sqrt(ss / (trials - 1.0) / trials) : 0.0;
    const double target =
        std::accumulate(expected.in.begin(), expected.in.end(), 0.0) / static_cast<double>(n);
    const std::string at = "@" + std::to_string(n);
    rec.scalars["mean_degree" + at] = m;
    rec.scalars["mean_degree_stderr" + at] = se;
    rec.scalars["expected_mean_degree" + at] = target;
    const double gap = std::abs(m - target);
    rec.checks.push_back({"mean degree" + at, se > 0.0 ? gap <= 4.0 * se : gap == 0.0,
                          "mean " + detail::format_number(m) + ", expected " +
                              detail::format_number(target) + ", stderr " +
                              detail::format_number(se)});

    const auto positive = std::count_if(means.begin(), means.end(), [](double v) { return v > 0; });
    if (positive >= 3) {
      std::optional<double> target_slope;
      if (cfg.graphon.kind == "power_law") target_slope = -cfg.graphon.beta;
      rec.series = fit_rate(nodes, means, target_slope);
      rec.scalars["slope" + at] = rec.series->slope;
      if (target_slope)
        rec.checks.push_back({"degree slope" + at,
                              std::abs(rec.series->slope - *target_slope) <= kDegreeSlopeTolerance,
                              "slope " + detail::format_number(rec.series->slope) + ", target " +
                                  detail::format_number(*target_slope)});
    }
  }
  rec.timings["total"] = clock.seconds();
  return rec;
}

}  // namespace gkm::experiments
