#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "gkm/error.hpp"
#include "gkm/experiments.hpp"

namespace gkm::experiments {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Kind, std::string_view>, 6> kKindNames{{
    {Kind::sample_graph, "sample-graph"},
    {Kind::simulate, "simulate"},
    {Kind::avg_compare, "avg-compare"},
    {Kind::galerkin_sweep, "galerkin-sweep"},
    {Kind::e2e_converge, "e2e-converge"},
    {Kind::degree_law, "degree-law"},
}};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw InvalidArgument(where + ": unknown key \"" + key + "\"");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(where + "." + key + ": " + e.what());
  }
}

}  // namespace

std::string_view kind_name(Kind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

Kind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw InvalidArgument("unknown experiment kind \"" + std::string(name) + "\"");
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"kind", kind_name(c.kind)},
      {"graphon",
       {{"kind", c.graphon.kind}, {"beta", c.graphon.beta}, {"p", c.graphon.p},
        {"r", c.graphon.r}, {"c", c.graphon.c}, {"values", c.graphon.values}}},
      {"gamma", c.gamma},
      {"ns", c.ns},
      {"n_ref", c.n_ref},
      {"T", c.T},
      {"dt", c.dt},
      {"trials", c.trials},
      {"seed", c.seed},
      {"directed", c.directed},
      {"model", c.model},
      {"coupling", {{"kind", c.coupling.kind}, {"phase", c.coupling.phase}}},
      {"forcing",
       {{"kind", c.forcing.kind}, {"omega", c.forcing.omega}, {"rate", c.forcing.rate}}},
      {"initial",
       {{"kind", c.initial.kind}, {"slope", c.initial.slope}, {"value", c.initial.value}}},
      {"monotone_slack", c.monotone_slack},
      {"slope_slack", c.slope_slack},
      {"compute_floor", c.compute_floor},
      {"save_stride", c.save_stride},
      {"output_dir", c.output_dir},
      {"cache_dir", c.cache_dir},
  };
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"kind", "graphon", "gamma", "ns", "n_ref", "T", "dt", "trials", "seed",
                  "directed", "model", "coupling", "forcing", "initial", "monotone_slack",
                  "slope_slack", "compute_floor", "save_stride", "output_dir", "cache_dir"},
                 "config");
  ExperimentConfig c;
  if (j.contains("kind")) {
    std::string kind;
    read(j, "kind", kind, "config");
    c.kind = parse_kind(kind);
  }
  if (j.contains("graphon")) {
    const auto& g = j.at("graphon");
    reject_unknown(g, {"kind", "beta", "p", "r", "c", "values"}, "config.graphon");
    read(g, "kind", c.graphon.kind, "config.graphon");
    read(g, "beta", c.graphon.beta, "config.graphon");
    read(g, "p", c.graphon.p, "config.graphon");
    read(g, "r", c.graphon.r, "config.graphon");
    read(g, "c", c.graphon.c, "config.graphon");
    read(g, "values", c.graphon.values, "config.graphon");
  }
  read(j, "gamma", c.gamma, "config");
  read(j, "ns", c.ns, "config");
  read(j, "n_ref", c.n_ref, "config");
  read(j, "T", c.T, "config");
  read(j, "dt", c.dt, "config");
  read(j, "trials", c.trials, "config");
  read(j, "seed", c.seed, "config");
  read(j, "directed", c.directed, "config");
  read(j, "model", c.model, "config");
  if (j.contains("coupling")) {
    const auto& d = j.at("coupling");
    reject_unknown(d, {"kind", "phase"}, "config.coupling");
    read(d, "kind", c.coupling.kind, "config.coupling");
    read(d, "phase", c.coupling.phase, "config.coupling");
  }
  if (j.contains("forcing")) {
    const auto& f = j.at("forcing");
    reject_unknown(f, {"kind", "omega", "rate"}, "config.forcing");
    read(f, "kind", c.forcing.kind, "config.forcing");
    read(f, "omega", c.forcing.omega, "config.forcing");
    read(f, "rate", c.forcing.rate, "config.forcing");
  }
  if (j.contains("initial")) {
    const auto& g = j.at("initial");
    reject_unknown(g, {"kind", "slope", "value"}, "config.initial");
    read(g, "kind", c.initial.kind, "config.initial");
    read(g, "slope", c.initial.slope, "config.initial");
    read(g, "value", c.initial.value, "config.initial");
  }
  read(j, "monotone_slack", c.monotone_slack, "config");
  read(j, "slope_slack", c.slope_slack, "config");
  read(j, "compute_floor", c.compute_floor, "config");
  read(j, "save_stride", c.save_stride, "config");
  read(j, "output_dir", c.output_dir, "config");
  read(j, "cache_dir", c.cache_dir, "config");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  if (c.ns.empty()) throw InvalidArgument("config: ns must not be empty");
  for (std::size_t k = 0; k < c.ns.size(); ++k) {
    if (c.ns[k] == 0) throw InvalidArgument("config: resolutions must be positive");
    if (k > 0 && c.ns[k] <= c.ns[k - 1])
      throw InvalidArgument("config: ns must be strictly increasing");
  }
  if (c.trials == 0) throw InvalidArgument("config: trials must be positive");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) throw InvalidArgument("config: T must be positive");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw InvalidArgument("config: dt must be positive");
  if (!(c.monotone_slack >= 0.0) || !(c.slope_slack >= 0.0))
    throw InvalidArgument("config: slacks must be nonnegative");

  const bool sampling_only = c.kind == Kind::sample_graph || c.kind == Kind::degree_law;
  if (sampling_only) {
    if (!(c.gamma >= 0.0 && c.gamma < 1.0))
      throw InvalidArgument("config: gamma must lie in [0, 1) for graph sampling");
  } else if (!(c.gamma >= 0.0 && c.gamma < 0.5)) {
    throw InvalidArgument("config: gamma must lie in [0, 0.5)");
  }

  if (c.kind == Kind::galerkin_sweep || c.kind == Kind::e2e_converge) {
    if (c.n_ref == 0) throw InvalidArgument("config: n_ref must be positive");
    for (std::size_t n : c.ns)
      if (c.n_ref % n != 0)
        throw InvalidArgument("config: n = " + std::to_string(n) + " does not divide n_ref = " +
                              std::to_string(c.n_ref));
  }

  static const std::set<std::string> models{"random", "averaged", "degree", "degree-averaged"};
  if (!models.contains(c.model)) throw InvalidArgument("config: unknown model \"" + c.model + "\"");
  if (c.kind == Kind::avg_compare && c.model != "random" && c.model != "degree")
    throw InvalidArgument("config: avg-compare needs model \"random\" or \"degree\"");
  if (c.kind == Kind::e2e_converge && c.model != "random")
    throw InvalidArgument("config: e2e-converge compares the random-graph model only");
  const bool needs_U = c.model == "degree-averaged" ||
                       (c.kind == Kind::avg_compare && c.model == "degree");
  if (needs_U && c.directed)
    throw InvalidArgument("config: the degree-normalized averaged kernel needs directed = false");

  const Graphon W = make_graphon(c.graphon);
  if (!c.directed && !W.symmetric) throw InvalidArgument("config: undirected graphs need a symmetric graphon");
  if (c.kind == Kind::degree_law && c.graphon.kind == "power_law" && !(c.graphon.beta < c.gamma))
    throw InvalidArgument("config: degree-law on the power law needs beta < gamma");
  make_coupling(c.coupling);
  make_forcing(c.forcing);
  make_initial(c.initial);
}

Graphon make_graphon(const GraphonConfig& g) {
  if (g.kind == "constant") return graphons::constant(g.c);
  if (g.kind == "erdos_renyi") return graphons::erdos_renyi();
  if (g.kind == "power_law") return graphons::power_law(g.beta);
  if (g.kind == "small_world") return graphons::small_world(g.p, g.r);
  if (g.kind == "step") {
    const std::size_t n = g.values.size();
    std::vector<double> flat;
    for (const auto& row : g.values) {
      if (row.size() != n) throw InvalidArgument("config: step graphon values must be square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    bool symmetric = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) symmetric = symmetric && flat[i * n + j] == flat[j * n + i];
    return graphons::from_step(StepGraphon(n, std::move(flat), symmetric));
  }
  throw InvalidArgument("config: unknown graphon kind \"" + g.kind + "\"");
}

CouplingFunction make_coupling(const CouplingConfig& d) {
  if (d.kind == "sine") return couplings::sine();
  if (d.kind == "sakaguchi") return couplings::sakaguchi(d.phase);
  throw InvalidArgument("config: unknown coupling kind \"" + d.kind + "\"");
}

Forcing make_forcing(const ForcingConfig& f) {
  if (f.kind == "zero") return forcings::zero();
  if (f.kind == "constant") return forcings::constant(f.omega);
  if (f.kind == "linear") return forcings::linear(f.rate);
  throw InvalidArgument("config: unknown forcing kind \"" + f.kind + "\"");
}

InitialProfile make_initial(const InitialConfig& g) {
  if (g.kind == "linear") return profiles::linear(g.slope);
  if (g.kind == "constant") return profiles::constant(g.value);
  throw InvalidArgument("config: unknown initial profile \"" + g.kind + "\"");
}

}  // namespace gkm::experiments
