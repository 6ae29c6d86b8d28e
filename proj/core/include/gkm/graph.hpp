#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gkm/graphon.hpp"

namespace gkm {

/// Weighted graph on n nodes. Entry (i, j) is the weight a_ij of the edge
/// j -> i, so row i collects the in-edges of node i. Loops are allowed.
/// Sampled graphs are stored in compressed sparse rows with implicit unit
/// weights; deterministic graphs are dense.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Dense storage. Throws if undirected and not exactly symmetric, or if an
  /// entry is negative or non-finite.
  static WeightedGraph dense(std::size_t n, std::vector<double> weights, bool directed);

  /// Binary graph in CSR form; columns within a row must be strictly increasing.
  static WeightedGraph sparse_binary(std::size_t n, std::vector<std::size_t> row_offsets,
                                     std::vector<std::uint32_t> columns, bool directed);

  std::size_t size() const { return n_; }
  bool directed() const { return directed_; }
  bool binary() const { return binary_; }
  bool sparse() const { return !row_offsets_.empty(); }

  /// Number of nonzero entries (ordered pairs, loops counted once).
  std::size_t nonzeros() const;
  double weight(std::size_t i, std::size_t j) const;

  /// Calls f(j, a_ij) for every nonzero entry of row i in column order.
  template <typename F>
  void for_each_in_row(std::size_t i, F&& f) const {
    if (sparse()) {
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) f(columns_[k], 1.0);
    } else {
      const double* row = dense_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j)
        if (row[j] != 0.0) f(j, row[j]);
    }
  }

  // Raw storage access for the coupling kernels.
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::uint32_t> columns() const { return columns_; }
  std::span<const double> dense_weights() const { return dense_; }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  std::size_t n_ = 0;
  bool directed_ = true;
  bool binary_ = false;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> dense_;
};

struct SampleConfig {
  std::size_t n = 0;
  /// alpha_n = n^-gamma with 0 <= gamma < 1; gamma = 0 is the dense case.
  double gamma = 0.0;
  bool directed = true;
  std::uint64_t seed = 0;
  std::uint64_t trial_id = 0;

  double alpha() const { return std::pow(static_cast<double>(n), -gamma); }
};

/// a_ij = cell average of W on I_i x I_j.
WeightedGraph deterministic_graph(const Graphon& W, std::size_t n, bool directed);

/// Bernoulli graph with P(j -> i) = alpha_n * <min(1/alpha_n, W)>_{I_i x I_j};
/// one draw per unordered pair when undirected. Fully determined by
/// (seed, n, trial_id); independent of the worker count.
WeightedGraph sample_random(const Graphon& W, const SampleConfig& cfg);

/// Same, from precomputed truncated cell averages barW = truncate_project(W, n, alpha).
WeightedGraph sample_random(const StepGraphon& barW, const SampleConfig& cfg);

/// Matrix of edge probabilities alpha_n * barW.
StepGraphon edge_probabilities(const Graphon& W, const SampleConfig& cfg);

struct Degrees {
  std::vector<double> in;   // row sums: in[i] = sum_j a_ij
  std::vector<double> out;  // column sums: out[i] = sum_j a_ji
};

Degrees degrees(const WeightedGraph& G);

/// Row and column sums of alpha_n * barW.
Degrees expected_degrees(const Graphon& W, const SampleConfig& cfg);

// Edge list: one "i j weight" line per edge, 1-based, weight omitted for
// binary graphs; undirected graphs list each unordered pair once (i <= j).
void write_edge_list(std::ostream& out, const WeightedGraph& G);
WeightedGraph read_edge_list(std::istream& in, std::size_t n, bool directed, bool binary);

// Binary: "WGR1", u32 n, u8 directed, u8 binary, u64 edge count, then
// (u32 i, u32 j, f64 weight) triples with 0-based indices, same pair
// convention as the edge list.
void write_binary(std::ostream& out, const WeightedGraph& G);
WeightedGraph read_weighted_graph(std::istream& in);

}  // namespace gkm
