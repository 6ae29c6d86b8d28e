#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "gkm/error.hpp"
#include "gkm/graph.hpp"
#include "gkm/parallel.hpp"
#include "oracles.hpp"

using namespace gkm;

namespace {

std::vector<double> dense_of(const WeightedGraph& G) {
  const std::size_t n = G.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    G.for_each_in_row(i, [&](std::size_t j, double w) { m[i * n + j] = w; });
  return m;
}

}  // namespace

TEST_SUITE("examples") {
  TEST_CASE("deterministic graph of the unit kernel is complete") {
    const WeightedGraph G = deterministic_graph(graphons::constant(1.0), 3, true);
    CHECK(G.size() == 3);
    CHECK_FALSE(G.binary());
    CHECK(dense_of(G) == std::vector<double>(9, 1.0));
  }

  TEST_CASE("deterministic graph of the zero kernel is empty") {
    const WeightedGraph G = deterministic_graph(graphons::constant(0.0), 4, false);
    CHECK(G.nonzeros() == 0);
    CHECK(dense_of(G) == std::vector<double>(16, 0.0));
  }

  TEST_CASE("deterministic power-law graph matches the projection") {
    const WeightedGraph G = deterministic_graph(graphons::power_law(0.5), 2, false);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(G.weight(i, j) == doctest::Approx(oracle::power_law_cell(0.5, 2, i, j)).epsilon(1e-14));
  }

  TEST_CASE("sampling the zero kernel gives the empty graph") {
    for (std::uint64_t seed : {0ull, 1ull, 99ull})
      for (bool directed : {true, false}) {
        const WeightedGraph G = sample_random(graphons::constant(0.0), {30, 0.3, directed, seed, 2});
        CHECK(G.nonzeros() == 0);
      }
  }

  TEST_CASE("sparse Erdos-Renyi edge probability at n = 10, gamma = 0.5") {
    const StepGraphon P = edge_probabilities(graphons::erdos_renyi(), {10, 0.5, true, 1, 0});
    const double expected = std::pow(10.0, -0.5);
    CHECK(expected == doctest::Approx(0.31623).epsilon(1e-5));
    for (double p : P.values()) CHECK(p == doctest::Approx(expected).epsilon(1e-15));
  }

  TEST_CASE("undirected samples are exactly symmetric") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const WeightedGraph G = sample_random(graphons::power_law(0.3), {64, 0.4, false, seed, seed});
      const auto m = dense_of(G);
      for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) CHECK(m[i * 64 + j] == m[j * 64 + i]);
    }
  }

  TEST_CASE("degrees of the complete directed graph") {
    const auto d = degrees(WeightedGraph::dense(3, std::vector<double>(9, 1.0), true));
    CHECK(d.in == std::vector<double>{3, 3, 3});
    CHECK(d.out == std::vector<double>{3, 3, 3});
  }

  TEST_CASE("degrees of the empty graph") {
    const auto d = degrees(WeightedGraph::dense(4, std::vector<double>(16, 0.0), true));
    CHECK(d.in == std::vector<double>(4, 0.0));
    CHECK(d.out == std::vector<double>(4, 0.0));
  }

  TEST_CASE("degrees of a single edge") {
    // a_12 = 1: the edge 2 -> 1.
    const auto d = degrees(WeightedGraph::dense(2, {0, 1, 0, 0}, true));
    CHECK(d.in == std::vector<double>{1, 0});
    CHECK(d.out == std::vector<double>{0, 1});
  }

  TEST_CASE("expected degrees of sparse Erdos-Renyi") {
    const auto e = expected_degrees(graphons::erdos_renyi(), {100, 0.5, true, 0, 0});
    for (double v : e.in) CHECK(v == doctest::Approx(10.0).epsilon(1e-12));
    for (double v : e.out) CHECK(v == doctest::Approx(10.0).epsilon(1e-12));
  }

  TEST_CASE("expected degrees of the zero kernel") {
    const auto e = expected_degrees(graphons::constant(0.0), {16, 0.3, true, 0, 0});
    CHECK(e.in == std::vector<double>(16, 0.0));
    CHECK(e.out == std::vector<double>(16, 0.0));
  }

  TEST_CASE("expected degrees follow the power law in the node index") {
    const double beta = 0.3, gamma = 0.4;
    const std::size_t n = 256;
    const Graphon W = graphons::power_law(beta);
    const SampleConfig cfg{n, gamma, true, 0, 0};
    const auto e = expected_degrees(W, cfg);
    // Direct row sums of the truncated cell averages.
    const StepGraphon barW = truncate_project(W, n, cfg.alpha());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += barW(i, j);
      CHECK(e.in[i] == doctest::Approx(cfg.alpha() * s).epsilon(1e-12));
      lx.push_back(std::log(static_cast<double>(i + 1)));
      ly.push_back(std::log(e.in[i]));
    }
    const auto fit = oracle::least_squares(lx, ly);
    CAPTURE(fit.slope);
    CHECK(std::abs(fit.slope + beta) <= 0.05);
  }
}

TEST_SUITE("graph") {
  TEST_CASE("sampling is deterministic in seed and trial") {
    const Graphon W = graphons::small_world(0.1, 0.2);
    const SampleConfig cfg{200, 0.25, true, 42, 3};
    const WeightedGraph a = sample_random(W, cfg);
    CHECK(a == sample_random(W, cfg));
    SampleConfig other = cfg;
    other.trial_id = 4;
    CHECK_FALSE(a == sample_random(W, other));
    other = cfg;
    other.seed = 43;
    CHECK_FALSE(a == sample_random(W, other));
  }

  TEST_CASE("sampling does not depend on the worker count") {
    const Graphon W = graphons::power_law(0.4);
    const int before = threads();
    set_threads(1);
    const WeightedGraph a = sample_random(W, {512, 0.45, false, 7, 1});
    set_threads(4);
    const WeightedGraph b = sample_random(W, {512, 0.45, false, 7, 1});
    set_threads(before);
    CHECK(a == b);
  }

  TEST_CASE("sampled graphs are binary") {
    const WeightedGraph G = sample_random(graphons::erdos_renyi(), {100, 0.2, true, 1, 0});
    CHECK(G.binary());
    CHECK(G.sparse());
    for (double w : dense_of(G)) CHECK((w == 0.0 || w == 1.0));
  }

  TEST_CASE("dense unit kernel samples the complete graph with loops") {
    const WeightedGraph G = sample_random(graphons::constant(1.0), {17, 0.0, true, 5, 0});
    CHECK(G.nonzeros() == 17 * 17);
    CHECK(G.weight(3, 3) == 1.0);
  }

  TEST_CASE("edge frequencies match the edge probabilities") {
    const std::size_t n = 20;
    const int trials = 10000;
    struct Case {
      Graphon W;
      double gamma;
      bool directed;
    };
    const Case cases[] = {{graphons::erdos_renyi(), 0.25, true},
                          {graphons::power_law(0.4), 0.45, true},
                          {graphons::power_law(0.3), 0.2, false},
                          {graphons::small_world(0.2, 0.15), 0.0, false},
                          {graphons::constant(0.6), 0.1, true}};
    const std::pair<std::size_t, std::size_t> pairs[] = {{0, 0}, {0, 5}, {5, 0}, {3, 3}, {7, 19}, {19, 19}};
    for (const auto& c : cases) {
      CAPTURE(c.W.id);
      const StepGraphon barW = truncate_project(c.W, n, std::pow(static_cast<double>(n), -c.gamma));
      std::vector<int> hits(std::size(pairs), 0);
      for (int t = 0; t < trials; ++t) {
        const WeightedGraph G =
            sample_random(barW, {n, c.gamma, c.directed, 2024, static_cast<std::uint64_t>(t)});
        for (std::size_t k = 0; k < std::size(pairs); ++k)
          hits[k] += G.weight(pairs[k].first, pairs[k].second) == 1.0;
      }
      for (std::size_t k = 0; k < std::size(pairs); ++k) {
        const double p = std::pow(static_cast<double>(n), -c.gamma) * barW(pairs[k].first, pairs[k].second);
        const double freq = static_cast<double>(hits[k]) / trials;
        const double se = std::sqrt(p * (1.0 - p) / trials);
        CAPTURE(k);
        CAPTURE(p);
        CAPTURE(freq);
        if (se == 0.0)
          CHECK(freq == p);
        else
          CHECK(std::abs(freq - p) <= 4.0 * se);
      }
    }
  }

  TEST_CASE("degree deviations concentrate for sparse Erdos-Renyi") {
    const Graphon W = graphons::erdos_renyi();
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {256u, 1024u, 4096u}) {
      const SampleConfig cfg{n, 0.25, true, 77, 0};
      const auto d = degrees(sample_random(W, cfg));
      const auto e = expected_degrees(W, cfg);
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(d.in[i] - e.in[i]));
      const double rel = worst / (cfg.alpha() * static_cast<double>(n));
      CAPTURE(n);
      CHECK(rel < prev);
      prev = rel;
    }
  }

  TEST_CASE("mean sampled degrees approach the expected degrees") {
    const std::size_t n = 50;
    const int trials = 2000;
    const Graphon W = graphons::power_law(0.35);
    const SampleConfig base{n, 0.4, true, 9, 0};
    const StepGraphon P = edge_probabilities(W, base);
    const auto e = expected_degrees(W, base);
    std::vector<double> sum_in(n, 0.0), sum_out(n, 0.0);
    for (int t = 0; t < trials; ++t) {
      SampleConfig cfg = base;
      cfg.trial_id = static_cast<std::uint64_t>(t);
      const auto d = degrees(sample_random(W, cfg));
      for (std::size_t i = 0; i < n; ++i) {
        sum_in[i] += d.in[i];
        sum_out[i] += d.out[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double var_in = 0.0, var_out = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        var_in += P(i, j) * (1.0 - P(i, j));
        var_out += P(j, i) * (1.0 - P(j, i));
      }
      CAPTURE(i);
      CHECK(std::abs(sum_in[i] / trials - e.in[i]) <= 5.0 * std::sqrt(var_in / trials) + 1e-12);
      CHECK(std::abs(sum_out[i] / trials - e.out[i]) <= 5.0 * std::sqrt(var_out / trials) + 1e-12);
    }
  }

  TEST_CASE("undirected degree vectors coincide") {
    const auto d = degrees(sample_random(graphons::power_law(0.2), {128, 0.3, false, 3, 0}));
    CHECK(d.in == d.out);
  }

  TEST_CASE("sampling preconditions") {
    CHECK_THROWS_AS(sample_random(graphons::erdos_renyi(), {10, 1.0, true, 0, 0}), InvalidArgument);
    CHECK_THROWS_AS(sample_random(graphons::erdos_renyi(), {10, -0.1, true, 0, 0}), InvalidArgument);
    try {
      (void)sample_random(graphons::constant(2.0), {4, 0.0, true, 0, 0});
      FAIL("dense sampling above 1 must fail");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("(1, 1)") != std::string::npos);
    }
    Graphon skew;
    skew.id = "skew";
    skew.kernel = [](double x, double) { return x; };
    skew.symmetric = false;
    CHECK_THROWS_AS(sample_random(skew, {8, 0.2, false, 0, 0}), InvalidArgument);
    CHECK_THROWS_AS(deterministic_graph(skew, 8, false), InvalidArgument);
    CHECK_NOTHROW(deterministic_graph(skew, 8, true));
  }

  TEST_CASE("edge probabilities outside the unit interval are reported") {
    // A cell value above 1/alpha cannot come from truncation.
    std::vector<double> v(9, 0.5);
    v[1 * 3 + 2] = 10.0;
    const StepGraphon barW(3, v, false);
    try {
      (void)sample_random(barW, {3, 0.5, true, 0, 0});
      FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("(2, 3)") != std::string::npos);
    }
  }

  TEST_CASE("dense graphs validate their weights") {
    CHECK_THROWS_AS(WeightedGraph::dense(2, {0, 1, 2, 0}, false), InvalidArgument);
    CHECK_THROWS_AS(WeightedGraph::dense(2, {0, -1, 0, 0}, true), InvalidArgument);
    CHECK_THROWS_AS(WeightedGraph::dense(2, {0, 1, 0}, true), InvalidArgument);
    CHECK_THROWS_AS(WeightedGraph::sparse_binary(2, {0, 1, 1}, {1}, false), InvalidArgument);
    CHECK_NOTHROW(WeightedGraph::sparse_binary(2, {0, 1, 2}, {1, 0}, false));
  }

  TEST_CASE("edge list format") {
    const WeightedGraph B = WeightedGraph::sparse_binary(3, {0, 1, 1, 3}, {1, 0, 2}, true);
    std::ostringstream out;
    write_edge_list(out, B);
    CHECK(out.str() == "1 2\n3 1\n3 3\n");
    std::istringstream in(out.str());
    CHECK(read_edge_list(in, 3, true, true) == B);

    const WeightedGraph U = WeightedGraph::dense(3, {0, 0.5, 0, 0.5, 2, 1.25, 0, 1.25, 0}, false);
    std::ostringstream uo;
    write_edge_list(uo, U);
    CHECK(uo.str() == "1 2 0.5\n2 2 2\n2 3 1.25\n");
    std::istringstream ui(uo.str());
    CHECK(read_edge_list(ui, 3, false, false) == U);

    std::istringstream bad("1 2\n0 1\n");
    CHECK_THROWS_AS(read_edge_list(bad, 3, true, true), FormatError);
    std::istringstream out_of_range("1 4\n");
    CHECK_THROWS_AS(read_edge_list(out_of_range, 3, true, true), FormatError);
    std::istringstream missing_weight("1 2\n");
    CHECK_THROWS_AS(read_edge_list(missing_weight, 3, true, false), FormatError);
  }

  TEST_CASE("binary graph format") {
    const WeightedGraph G = sample_random(graphons::power_law(0.3), {40, 0.3, false, 8, 0});
    std::stringstream buf;
    write_binary(buf, G);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "WGR1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 40);
    CHECK(static_cast<unsigned char>(bytes[8]) == 0);
    CHECK(static_cast<unsigned char>(bytes[9]) == 1);
    const std::size_t listed = (G.nonzeros() + [&] {
      std::size_t loops = 0;
      for (std::size_t i = 0; i < 40; ++i) loops += G.weight(i, i) == 1.0;
      return loops;
    }()) / 2;
    CHECK(bytes.size() == 4 + 4 + 1 + 1 + 8 + listed * 16);
    CHECK(read_weighted_graph(buf) == G);

    const WeightedGraph D = deterministic_graph(graphons::small_world(0.1, 0.2), 6, true);
    std::stringstream dbuf;
    write_binary(dbuf, D);
    CHECK(read_weighted_graph(dbuf) == D);

    std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_weighted_graph(truncated), FormatError);
    std::stringstream wrong(std::string("SGW1") + bytes.substr(4));
    CHECK_THROWS_AS(read_weighted_graph(wrong), FormatError);
  }
}
