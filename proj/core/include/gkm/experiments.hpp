#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gkm/continuum.hpp"
#include "gkm/dynamics.hpp"
#include "gkm/graphon.hpp"
#include "gkm/metrics.hpp"

namespace gkm::experiments {

enum class Kind { sample_graph, simulate, avg_compare, galerkin_sweep, e2e_converge, degree_law };

std::string_view kind_name(Kind kind);
/// Accepts the subcommand spelling, e.g. "avg-compare".
Kind parse_kind(std::string_view name);

struct GraphonConfig {
  std::string kind = "erdos_renyi";  // constant | erdos_renyi | power_law | small_world | step
  double beta = 0.4;
  double p = 0.1;
  double r = 0.25;
  double c = 1.0;
  /// Cell values of a "step" graphon, one inner vector per row.
  std::vector<std::vector<double>> values;
};

struct CouplingConfig {
  std::string kind = "sine";  // sine | sakaguchi
  double phase = 0.0;
};

struct ForcingConfig {
  std::string kind = "zero";  // zero | constant | linear
  double omega = 0.0;
  double rate = 0.0;
};

struct InitialConfig {
  std::string kind = "linear";  // linear | constant
  double slope = 2.0 * std::numbers::pi;
  double value = 0.0;
};

struct ExperimentConfig {
  Kind kind = Kind::avg_compare;
  GraphonConfig graphon;
  double gamma = 0.25;
  std::vector<std::size_t> ns;
  std::size_t n_ref = 4096;
  double T = 2.0;
  double dt = 0.002;
  std::size_t trials = 3;
  std::uint64_t seed = 1;
  bool directed = true;
  /// Network model: random | averaged | degree | degree-averaged. avg-compare
  /// pairs "random" with its averaged system and "degree" with the
  /// degree-normalized averaged system.
  std::string model = "random";
  CouplingConfig coupling;
  ForcingConfig forcing;
  InitialConfig initial;
  /// Allowed relative increase between consecutive errors in a sweep.
  double monotone_slack = 0.1;
  /// Allowed excess of the fitted slope over the target exponent.
  double slope_slack = 0.1;
  /// galerkin-sweep: also solve the truncated system at n_ref.
  bool compute_floor = false;
  /// simulate: write every k-th trajectory row; 0 disables trajectory files.
  std::size_t save_stride = 0;
  std::string output_dir;
  std::string cache_dir;
};

/// Throws InvalidArgument with a readable message on inconsistent values.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

Graphon make_graphon(const GraphonConfig& cfg);
CouplingFunction make_coupling(const CouplingConfig& cfg);
Forcing make_forcing(const ForcingConfig& cfg);
InitialProfile make_initial(const InitialConfig& cfg);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Outcome of the energy-bound comparison over every integration of a run.
struct AprioriTally {
  std::size_t integrations = 0;
  std::size_t violations = 0;
  /// Largest max_energy / bound seen.
  double worst_ratio = 0.0;
};

struct ExperimentRecord {
  ExperimentConfig config;
  /// One row per (n, trial) or per node; written to results.csv.
  Table results;
  /// Per-n max and mean over trials.
  Table aggregates;
  std::optional<ConvergenceSeries> series;
  std::map<std::string, double> scalars;
  std::vector<Check> checks;
  AprioriTally apriori;
  std::map<std::string, double> timings;
  std::vector<std::string> artifacts;

  bool passed() const;
};

nlohmann::json to_json(const ExperimentRecord& record);
ExperimentRecord record_from_json(const nlohmann::json& j);

ExperimentRecord run(const ExperimentConfig& cfg);
ExperimentRecord run_sample_graph(const ExperimentConfig& cfg);
ExperimentRecord run_simulate(const ExperimentConfig& cfg);
ExperimentRecord run_avg_compare(const ExperimentConfig& cfg);
ExperimentRecord run_galerkin_sweep(const ExperimentConfig& cfg);
ExperimentRecord run_e2e(const ExperimentConfig& cfg);
ExperimentRecord run_degree_law(const ExperimentConfig& cfg);

/// Writes results.csv and summary.json (and plot.svg when asked) into dir,
/// recording the file names in record.artifacts.
void write_outputs(ExperimentRecord& record, const std::filesystem::path& dir, bool plot);
void write_results_csv(std::ostream& out, const ExperimentRecord& record);
/// Log-log plot of the record's series with the target-slope guide line.
std::string render_svg(const ExperimentRecord& record);

}  // namespace gkm::experiments
