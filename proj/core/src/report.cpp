#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/experiments.hpp"

namespace gkm::experiments {
namespace {

using nlohmann::json;

json table_json(const Table& t) { return json{{"columns", t.columns}, {"rows", t.rows}}; }

Table table_from(const json& j) {
  Table t;
  j.at("columns").get_to(t.columns);
  j.at("rows").get_to(t.rows);
  for (const auto& row : t.rows)
    if (row.size() != t.columns.size()) throw FormatError("record: table row has wrong width");
  return t;
}

std::string number(double x) { return detail::format_number(x); }

}  // namespace

json to_json(const ExperimentRecord& r) {
  json j;
  j["config"] = to_json(r.config);
  j["results"] = table_json(r.results);
  j["aggregates"] = table_json(r.aggregates);
  if (r.series) {
    j["series"] = {{"ns", r.series->ns},         {"errors", r.series->errors},
                   {"slope", r.series->slope},   {"intercept", r.series->intercept},
                   {"residual", r.series->residual}};
    j["series"]["target_exponent"] =
        r.series->target_exponent ? json(*r.series->target_exponent) : json();
  }
  j["scalars"] = r.scalars;
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["apriori"] = {{"integrations", r.apriori.integrations},
                  {"violations", r.apriori.violations},
                  {"worst_ratio", r.apriori.worst_ratio}};
  j["timings"] = r.timings;
  j["artifacts"] = r.artifacts;
  j["passed"] = r.passed();
  return j;
}

ExperimentRecord record_from_json(const json& j) {
  try {
    ExperimentRecord r;
    r.config = config_from_json(j.at("config"));
    r.results = table_from(j.at("results"));
    r.aggregates = table_from(j.at("aggregates"));
    if (j.contains("series")) {
      const auto& s = j.at("series");
      ConvergenceSeries cs;
      s.at("ns").get_to(cs.ns);
      s.at("errors").get_to(cs.errors);
      s.at("slope").get_to(cs.slope);
      s.at("intercept").get_to(cs.intercept);
      s.at("residual").get_to(cs.residual);
      if (!s.at("target_exponent").is_null()) cs.target_exponent = s.at("target_exponent").get<double>();
      r.series = std::move(cs);
    }
    j.at("scalars").get_to(r.scalars);
    for (const auto& c : j.at("checks"))
      r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                          c.at("detail").get<std::string>()});
    const auto& a = j.at("apriori");
    a.at("integrations").get_to(r.apriori.integrations);
    a.at("violations").get_to(r.apriori.violations);
    a.at("worst_ratio").get_to(r.apriori.worst_ratio);
    j.at("timings").get_to(r.timings);
    j.at("artifacts").get_to(r.artifacts);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("record: ") + e.what());
  }
}

void write_results_csv(std::ostream& out, const ExperimentRecord& r) {
  for (std::size_t c = 0; c < r.results.columns.size(); ++c)
    out << (c ? "," : "") << r.results.columns[c];
  out << '\n';
  for (const auto& row : r.results.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << number(row[c]);
    out << '\n';
  }
}

std::string render_svg(const ExperimentRecord& r) {
  constexpr double width = 640, height = 440;
  constexpr double left = 80, right = 30, top = 40, bottom = 60;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const bool degree = r.config.kind == Kind::degree_law;
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << kind_name(r.config.kind) << " (" << r.config.graphon.kind << ")</text>\n";

  std::vector<double> xs, ys;
  if (r.series) {
    for (std::size_t k = 0; k < r.series->ns.size(); ++k)
      if (r.series->errors[k] > 0.0) {
        xs.push_back(static_cast<double>(r.series->ns[k]));
        ys.push_back(r.series->errors[k]);
      }
  }
  if (xs.size() < 2) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\">no positive data to plot</text>\n</svg>\n";
    return svg.str();
  }

  auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  double lx0 = std::floor(std::log10(*xmin_it)), lx1 = std::ceil(std::log10(*xmax_it));
  double ly0 = std::floor(std::log10(*ymin_it)), ly1 = std::ceil(std::log10(*ymax_it));
  if (lx1 <= lx0) lx1 = lx0 + 1;
  if (ly1 <= ly0) ly1 = ly0 + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
  auto py = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };

  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = lx0; e <= lx1; e += 1.0)
    svg << "<text x=\"" << px(std::pow(10.0, e)) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  for (double e = ly0; e <= ly1; e += 1.0)
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py(std::pow(10.0, e)) + 4
        << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << (degree ? "node index" : "n") << "</text>\n";
  svg << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << (degree ? "mean degree" : "error") << "</text>\n";

  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < xs.size(); ++k) svg << px(xs[k]) << ',' << py(ys[k]) << ' ';
  svg << "\"/>\n";
  if (!degree)
    for (std::size_t k = 0; k < xs.size(); ++k)
      svg << "<circle cx=\"" << px(xs[k]) << "\" cy=\"" << py(ys[k]) << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";

  if (r.series->target_exponent) {
    const double s = *r.series->target_exponent;
    const double x0 = xs.front(), x1 = xs.back();
    const double y0 = ys.front(), y1 = y0 * std::pow(x1 / x0, s);
    svg << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x1) << "\" y2=\""
        << py(y1) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 16
        << "\" text-anchor=\"end\" fill=\"#d62728\">target slope " << number(s) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 32
      << "\" text-anchor=\"end\" fill=\"#1f77b4\">fitted slope " << number(r.series->slope)
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_outputs(ExperimentRecord& r, const std::filesystem::path& dir, bool plot) {
  std::filesystem::create_directories(dir);
  auto add = [&](const std::string& name) {
    if (std::find(r.artifacts.begin(), r.artifacts.end(), name) == r.artifacts.end())
      r.artifacts.push_back(name);
  };
  add("results.csv");
  if (r.series) add("series.csv");
  if (plot) add("plot.svg");
  add("summary.json");

  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("results.csv");
    write_results_csv(out, r);
  }
  if (r.series) {
    auto out = open("series.csv");
    write_csv(out, *r.series);
  }
  if (plot) {
    auto out = open("plot.svg");
    out << render_svg(r);
  }
  auto out = open("summary.json");
  out << to_json(r).dump(2) << '\n';
}

}  // namespace gkm::experiments
