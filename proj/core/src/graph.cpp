#include "gkm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "format.hpp"
#include "gkm/error.hpp"
#include "gkm/rng.hpp"

namespace gkm {
namespace {

std::string pair_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")";
}

void validate_gamma(double gamma) {
  // Sampling itself only needs n alpha_n -> infinity; the convergence
  // experiments enforce the stricter gamma < 1/2 on their own.
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
}

}  // namespace

WeightedGraph WeightedGraph::dense(std::size_t n, std::vector<double> weights, bool directed) {
  if (n == 0) throw InvalidArgument("WeightedGraph: n must be positive");
  if (weights.size() != n * n) throw InvalidArgument("WeightedGraph: expected n*n weights");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!std::isfinite(weights[k]) || weights[k] < 0.0)
      throw InvalidArgument("WeightedGraph: weight " + pair_name(k / n, k % n) +
                            " is negative or non-finite");
  }
  if (!directed) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (weights[i * n + j] != weights[j * n + i])
          throw InvalidArgument("WeightedGraph: undirected but weight " + pair_name(i, j) +
                                " is not symmetric");
  }
  WeightedGraph g;
  g.n_ = n;
  g.directed_ = directed;
  // Dense storage always means weighted, even if every entry happens to be 0/1.
  g.binary_ = false;
  g.dense_ = std::move(weights);
  return g;
}

WeightedGraph WeightedGraph::sparse_binary(std::size_t n, std::vector<std::size_t> row_offsets,
                                           std::vector<std::uint32_t> columns, bool directed) {
  if (n == 0) throw InvalidArgument("WeightedGraph: n must be positive");
  if (row_offsets.size() != n + 1 || row_offsets.front() != 0 ||
      row_offsets.back() != columns.size())
    throw InvalidArgument("WeightedGraph: malformed row offsets");
  for (std::size_t i = 0; i < n; ++i) {
    if (row_offsets[i] > row_offsets[i + 1])
      throw InvalidArgument("WeightedGraph: row offsets must be nondecreasing");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (columns[k] >= n) throw InvalidArgument("WeightedGraph: column index out of range");
      if (k > row_offsets[i] && columns[k] <= columns[k - 1])
        throw InvalidArgument("WeightedGraph: columns must be strictly increasing in a row");
    }
  }
  WeightedGraph g;
  g.n_ = n;
  g.directed_ = directed;
  g.binary_ = true;
  g.row_offsets_ = std::move(row_offsets);
  g.columns_ = std::move(columns);
  if (!directed) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = g.row_offsets_[i]; k < g.row_offsets_[i + 1]; ++k)
        if (g.weight(g.columns_[k], i) != 1.0)
          throw InvalidArgument("WeightedGraph: undirected but edge " +
                                pair_name(i, g.columns_[k]) + " has no mirror");
  }
  return g;
}

std::size_t WeightedGraph::nonzeros() const {
  if (sparse()) return columns_.size();
  return static_cast<std::size_t>(
      std::count_if(dense_.begin(), dense_.end(), [](double w) { return w != 0.0; }));
}

double WeightedGraph::weight(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw InvalidArgument("WeightedGraph: index out of range");
  if (!sparse()) return dense_[i * n_ + j];
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  return std::binary_search(first, last, static_cast<std::uint32_t>(j)) ? 1.0 : 0.0;
}

WeightedGraph deterministic_graph(const Graphon& W, std::size_t n, bool directed) {
  if (!directed && !W.symmetric)
    throw InvalidArgument("undirected deterministic graph needs a symmetric graphon, got " + W.id);
  const StepGraphon S = project(W, n);
  return WeightedGraph::dense(n, std::vector<double>(S.values().begin(), S.values().end()),
                              directed);
}

WeightedGraph sample_random(const Graphon& W, const SampleConfig& cfg) {
  validate_gamma(cfg.gamma);
  if (!cfg.directed && !W.symmetric)
    throw InvalidArgument("undirected sampling needs a symmetric graphon, got " + W.id);
  // Dense sampling uses the plain cell averages so that W > 1 is reported
  // instead of being capped away.
  if (cfg.gamma == 0.0) return sample_random(project(W, cfg.n), cfg);
  return sample_random(truncate_project(W, cfg.n, cfg.alpha()), cfg);
}

WeightedGraph sample_random(const StepGraphon& barW, const SampleConfig& cfg) {
  validate_gamma(cfg.gamma);
  const std::size_t n = cfg.n;
  if (n == 0 || barW.size() != n) throw InvalidArgument("sample_random: barW must be n x n");
  if (n > 0xFFFFFFFFull) throw InvalidArgument("sample_random: n exceeds 32-bit node ids");
  if (!cfg.directed && !barW.symmetric())
    throw InvalidArgument("undirected sampling needs symmetric cell averages");
  const double alpha = cfg.alpha();

  // Dense W-random graphs need W <= 1 for the cell averages to be probabilities.
  if (cfg.gamma == 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (barW(i, j) > 1.0)
          throw InvalidArgument("dense sampling: cell average " +
                                detail::format_number(barW(i, j)) + " at " + pair_name(i, j) +
                                " exceeds 1");
  }

  const CounterRng rng(stream_key(cfg.seed, n, cfg.trial_id));
  std::vector<std::vector<std::uint32_t>> rows(n);
  std::exception_ptr failure;
  const auto nrows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16) if (n >= 256)
  for (std::ptrdiff_t ii = 0; ii < nrows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      auto& row = rows[i];
      for (std::size_t j = 0; j < n; ++j) {
        double p = alpha * barW(i, j);
        if (!(p >= 0.0 && p <= 1.0 + 1e-12))
          throw NumericalError("edge probability " + detail::format_number(p) + " at " +
                               pair_name(i, j) + " is outside [0, 1]");
        p = std::min(p, 1.0);
        // Undirected graphs draw once per unordered pair; both rows read the
        // same counter, so the matrix comes out symmetric.
        const std::size_t a = cfg.directed ? i : std::min(i, j);
        const std::size_t b = cfg.directed ? j : std::max(i, j);
        if (rng.uniform(static_cast<std::uint64_t>(a) * n + b) < p)
          row.push_back(static_cast<std::uint32_t>(j));
      }
    } catch (...) {
#pragma omp critical(gkm_sample_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  std::vector<std::uint32_t> columns;
  columns.reserve(offsets[n]);
  for (auto& row : rows) columns.insert(columns.end(), row.begin(), row.end());
  return WeightedGraph::sparse_binary(n, std::move(offsets), std::move(columns), cfg.directed);
}

StepGraphon edge_probabilities(const Graphon& W, const SampleConfig& cfg) {
  validate_gamma(cfg.gamma);
  const double alpha = cfg.alpha();
  const StepGraphon barW = truncate_project(W, cfg.n, alpha);
  std::vector<double> p(barW.values().begin(), barW.values().end());
  for (double& v : p) v *= alpha;
  return StepGraphon(cfg.n, std::move(p), barW.symmetric());
}

Degrees degrees(const WeightedGraph& G) {
  const std::size_t n = G.size();
  Degrees d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    G.for_each_in_row(i, [&](std::size_t j, double w) {
      d.in[i] += w;
      d.out[j] += w;
    });
  }
  return d;
}

Degrees expected_degrees(const Graphon& W, const SampleConfig& cfg) {
  validate_gamma(cfg.gamma);
  const double alpha = cfg.alpha();
  const StepGraphon barW = truncate_project(W, cfg.n, alpha);
  const std::size_t n = cfg.n;
  Degrees d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += barW(i, j);
      d.out[j] += barW(i, j);
    }
    d.in[i] = alpha * row;
  }
  for (double& v : d.out) v *= alpha;
  return d;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename F>
void for_each_listed_edge(const WeightedGraph& G, F&& f) {
  for (std::size_t i = 0; i < G.size(); ++i) {
    G.for_each_in_row(i, [&](std::size_t j, double w) {
      if (G.directed() || i <= j) f(i, j, w);
    });
  }
}

std::size_t listed_edge_count(const WeightedGraph& G) {
  std::size_t count = 0;
  for_each_listed_edge(G, [&](std::size_t, std::size_t, double) { ++count; });
  return count;
}

struct Triple {
  std::size_t i;
  std::size_t j;
  double w;
};

WeightedGraph assemble(std::size_t n, const std::vector<Triple>& edges, bool directed,
                       bool binary) {
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) throw FormatError("edge " + pair_name(e.i, e.j) + " out of range");
    if (binary && e.w != 1.0) throw FormatError("binary graph with non-unit weight");
  }
  if (binary) {
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (const auto& e : edges) {
      rows[e.i].push_back(static_cast<std::uint32_t>(e.j));
      if (!directed && e.i != e.j) rows[e.j].push_back(static_cast<std::uint32_t>(e.i));
    }
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<std::uint32_t> columns;
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(rows[i].begin(), rows[i].end());
      if (std::adjacent_find(rows[i].begin(), rows[i].end()) != rows[i].end())
        throw FormatError("duplicate edge in row " + std::to_string(i + 1));
      columns.insert(columns.end(), rows[i].begin(), rows[i].end());
      offsets[i + 1] = columns.size();
    }
    return WeightedGraph::sparse_binary(n, std::move(offsets), std::move(columns), directed);
  }
  std::vector<double> dense(n * n, 0.0);
  for (const auto& e : edges) {
    dense[e.i * n + e.j] = e.w;
    if (!directed) dense[e.j * n + e.i] = e.w;
  }
  return WeightedGraph::dense(n, std::move(dense), directed);
}

}  // namespace

void write_edge_list(std::ostream& out, const WeightedGraph& G) {
  for_each_listed_edge(G, [&](std::size_t i, std::size_t j, double w) {
    out << (i + 1) << ' ' << (j + 1);
    if (!G.binary()) out << ' ' << detail::format_number(w);
    out << '\n';
  });
}

WeightedGraph read_edge_list(std::istream& in, std::size_t n, bool directed, bool binary) {
  std::vector<Triple> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::size_t i = 0;
    std::size_t j = 0;
    double w = 1.0;
    if (!(fields >> i >> j) || i == 0 || j == 0)
      throw FormatError("edge list line " + std::to_string(lineno) + ": expected \"i j [w]\"");
    if (!binary && !(fields >> w))
      throw FormatError("edge list line " + std::to_string(lineno) + ": missing weight");
    edges.push_back({i - 1, j - 1, w});
  }
  return assemble(n, edges, directed, binary);
}

void write_binary(std::ostream& out, const WeightedGraph& G) {
  detail::put_magic(out, "WGR1");
  detail::put_le(out, static_cast<std::uint32_t>(G.size()));
  detail::put_le(out, static_cast<std::uint8_t>(G.directed() ? 1 : 0));
  detail::put_le(out, static_cast<std::uint8_t>(G.binary() ? 1 : 0));
  detail::put_le(out, static_cast<std::uint64_t>(listed_edge_count(G)));
  for_each_listed_edge(G, [&](std::size_t i, std::size_t j, double w) {
    detail::put_le(out, static_cast<std::uint32_t>(i));
    detail::put_le(out, static_cast<std::uint32_t>(j));
    detail::put_f64(out, w);
  });
}

WeightedGraph read_weighted_graph(std::istream& in) {
  detail::expect_magic(in, "WGR1");
  const auto n = detail::get_le<std::uint32_t>(in);
  const auto directed = detail::get_le<std::uint8_t>(in);
  const auto binary = detail::get_le<std::uint8_t>(in);
  const auto count = detail::get_le<std::uint64_t>(in);
  if (n == 0 || directed > 1 || binary > 1) throw FormatError("WGR1: bad header");
  std::vector<Triple> edges;
  edges.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto i = detail::get_le<std::uint32_t>(in);
    const auto j = detail::get_le<std::uint32_t>(in);
    const double w = detail::get_f64(in);
    edges.push_back({i, j, w});
  }
  try {
    return assemble(n, edges, directed == 1, binary == 1);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("WGR1: ") + e.what());
  }
}

}  // namespace gkm
