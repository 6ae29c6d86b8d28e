// Command-line front end for the experiment runners.
//
//   gkm avg-compare --config tools/configs/avg_compare.json --out runs/avg --plot
//   gkm render runs/avg/summary.json --out runs/avg
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on errors.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "gkm/error.hpp"
#include "gkm/experiments.hpp"
#include "gkm/parallel.hpp"

namespace ex = gkm::experiments;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string cache;
  int threads = 0;
  bool plot = false;
};

void print_summary(const ex::ExperimentRecord& rec) {
  std::cout << ex::kind_name(rec.config.kind) << ": " << (rec.passed() ? "PASS" : "FAIL") << '\n';
  if (!rec.aggregates.rows.empty()) {
    std::cout << "  " << std::setw(8) << "n" << std::setw(14) << "max" << std::setw(14) << "mean" << '\n';
    for (const auto& row : rec.aggregates.rows)
      std::cout << "  " << std::setw(8) << static_cast<std::size_t>(row[0]) << std::setw(14) << row[1]
                << std::setw(14) << row[2] << '\n';
  }
  if (rec.series)
    std::cout << "  fitted slope " << rec.series->slope << " (residual " << rec.series->residual
              << ")\n";
  for (const auto& [name, value] : rec.scalars) std::cout << "  " << name << " = " << value << '\n';
  for (const auto& c : rec.checks)
    std::cout << "  [" << (c.passed ? "ok" : "FAILED") << "] " << c.name << ": " << c.detail << '\n';
  std::cout << "  a priori bound: " << rec.apriori.integrations << " integration(s), "
            << rec.apriori.violations << " violation(s)\n";
}

int run_experiment(ex::Kind kind, const Options& opt) {
  ex::ExperimentConfig cfg;
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    const auto j = nlohmann::json::parse(in, nullptr, true, true);
    cfg = ex::config_from_json(j);
    if (j.contains("kind") && cfg.kind != kind)
      throw gkm::InvalidArgument("config file describes \"" + std::string(ex::kind_name(cfg.kind)) +
                                 "\", not \"" + std::string(ex::kind_name(kind)) + "\"");
  }
  cfg.kind = kind;
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (!opt.cache.empty()) cfg.cache_dir = opt.cache;
  if (cfg.output_dir.empty()) cfg.output_dir = "gkm-" + std::string(ex::kind_name(kind));

  ex::ExperimentRecord rec = ex::run(cfg);
  ex::write_outputs(rec, cfg.output_dir, opt.plot);
  print_summary(rec);
  std::cout << "  outputs in " << cfg.output_dir << '\n';
  return rec.passed() ? 0 : 1;
}

int render(const std::string& summary, const std::string& out_dir) {
  std::ifstream in(summary);
  if (!in) throw gkm::InvalidArgument("cannot open " + summary);
  ex::ExperimentRecord rec = ex::record_from_json(nlohmann::json::parse(in));
  const std::filesystem::path dir =
      out_dir.empty() ? std::filesystem::path(summary).parent_path() : std::filesystem::path(out_dir);
  ex::write_outputs(rec, dir.empty() ? "." : dir, true);
  std::cout << "rendered " << (dir / "results.csv").string() << " and " << (dir / "plot.svg").string()
            << '\n';
  return rec.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kuramoto dynamics on graph sequences and their continuum limit"};
  app.require_subcommand(1);

  Options opt;
  std::optional<ex::Kind> chosen;
  for (ex::Kind kind : {ex::Kind::sample_graph, ex::Kind::simulate, ex::Kind::avg_compare,
                        ex::Kind::galerkin_sweep, ex::Kind::e2e_converge, ex::Kind::degree_law}) {
    auto* sub = app.add_subcommand(std::string(ex::kind_name(kind)));
    sub->add_option("--config", opt.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--cache", opt.cache, "Cache directory for reference solutions");
    sub->add_option("--threads", opt.threads, "Worker threads (0 keeps the default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--plot", opt.plot, "Also write plot.svg");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  std::string summary;
  std::string render_out;
  auto* render_cmd = app.add_subcommand("render", "Regenerate tables and plot from summary.json");
  render_cmd->add_option("summary", summary, "summary.json of a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  render_cmd->add_option("--out", render_out, "Output directory (defaults to the summary's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt.threads > 0) gkm::set_threads(opt.threads);
    if (render_cmd->parsed()) return render(summary, render_out);
    return run_experiment(*chosen, opt);
  } catch (const std::exception& e) {
    std::cerr << "gkm: error: " << e.what() << '\n';
    return 2;
  }
}
