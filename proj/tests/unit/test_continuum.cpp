#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>

#include "gkm/continuum.hpp"
#include "gkm/error.hpp"
#include "gkm/metrics.hpp"
#include "oracles.hpp"

using namespace gkm;

namespace {

constexpr double pi = std::numbers::pi;

StepFunction random_step(std::mt19937_64& rng, std::size_t n, double spread = 2.0 * pi) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return StepFunction(std::move(v));
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

StepFunction minus(const StepFunction& a, const StepFunction& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return StepFunction(std::move(d));
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("gkm-test-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("examples") {
  TEST_CASE("nonlocal operator vanishes on constants") {
    const CouplingFunction D = couplings::sine();
    const StepFunction v(std::vector<double>(16, 2.2));
    const StepFunction a = apply_K(project(graphons::power_law(0.4), 16), D, v);
    const StepFunction b = apply_K(graphons::small_world(0.2, 0.1), D, v);
    for (double x : a.values()) CHECK(std::abs(x) <= 1e-15);
    for (double x : b.values()) CHECK(std::abs(x) <= 1e-15);
  }

  TEST_CASE("nonlocal operator on two cells") {
    const StepFunction v(std::vector<double>{0.0, pi / 2});
    const StepFunction Kv = apply_K(StepGraphon::constant(2, 1.0), couplings::sine(), v);
    CHECK(Kv[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Kv[1] == doctest::Approx(-0.5).epsilon(1e-15));
    const auto du = rhs(ModelSpec{forcings::zero(), couplings::sine(),
                                  AveragedBackend{std::make_shared<const StepGraphon>(StepGraphon::constant(2, 1.0))}, 2},
                        v.values(), 0.0);
    CHECK(du[0] == doctest::Approx(Kv[0]).epsilon(1e-15));
    CHECK(du[1] == doctest::Approx(Kv[1]).epsilon(1e-15));
  }

  TEST_CASE("nonlocal operator is Lipschitz") {
    std::mt19937_64 rng(41);
    const std::size_t n = 64;
    const Graphon W = graphons::power_law(0.4);
    const CouplingFunction D = couplings::sine();
    const StepGraphon Wn = project(W, n);
    const double bound = 2.0 * D.lipschitz * *W.l2_norm;
    for (int trial = 0; trial < 100; ++trial) {
      const StepFunction u = random_step(rng, n), v = random_step(rng, n);
      const double lhs = minus(apply_K(Wn, D, u), apply_K(Wn, D, v)).l2_norm();
      CHECK(lhs <= bound * minus(u, v).l2_norm());
    }
  }

  TEST_CASE("Galerkin solve with a zero kernel decouples the cells") {
    const std::size_t N = 32;
    const Trajectory tr = galerkin_solve(graphons::constant(0.0), forcings::linear(-1.0), couplings::sine(),
                                         profiles::linear(2.0 * pi), N, 1.0, 0.01);
    const auto u0 = initial_from_g(profiles::linear(2.0 * pi), N);
    for (std::size_t k = 0; k < tr.rows(); k += 10)
      for (std::size_t i = 0; i < N; ++i)
        CHECK(tr.state(k)[i] == doctest::Approx(u0[i] * std::exp(-tr.time(k))).epsilon(1e-9));
  }

  TEST_CASE("Galerkin solve on a step kernel at its own resolution") {
    std::mt19937_64 rng(2);
    const std::size_t n = 24;
    std::vector<double> v(n * n);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (double& x : v) x = u(rng);
    const StepGraphon S(n, v, false);
    const InitialProfile g = profiles::linear(2.0 * pi);
    const Trajectory galerkin =
        galerkin_solve(graphons::from_step(S), forcings::constant(0.3), couplings::sine(), g, n, 1.0, 0.005);
    const Model model(ModelSpec{forcings::constant(0.3), couplings::sine(),
                                AveragedBackend{std::make_shared<const StepGraphon>(S)}, n});
    const Trajectory direct = integrate(model, initial_from_g(g, n), 1.0, 0.005);
    CHECK(galerkin == direct);
  }

  TEST_CASE("Galerkin solve from a constant profile stays put") {
    for (const Graphon& W : {graphons::power_law(0.3), graphons::small_world(0.2, 0.3), graphons::constant(2.0)}) {
      const Trajectory tr =
          galerkin_solve(W, forcings::zero(), couplings::sine(), profiles::constant(1.25), 64, 1.0, 0.01);
      for (double x : tr.data()) CHECK(x == doctest::Approx(1.25).epsilon(1e-14));
    }
  }

  TEST_CASE("restriction averages blocks") {
    CHECK(restrict_to(StepFunction({1, 1, 3, 3}), 2) == StepFunction({1, 3}));
    const StepFunction u({0.1, -2, 5, 7.25, 3});
    CHECK(restrict_to(u, 5) == u);
  }

  TEST_CASE("restriction does not increase the norm") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
      const StepFunction u = random_step(rng, 96);
      for (std::size_t n : {1u, 3u, 12u, 48u}) CHECK(restrict_to(u, n).l2_norm() <= u.l2_norm() * (1 + 1e-15));
    }
  }

  TEST_CASE("prolongation repeats values") {
    CHECK(prolong_to(StepFunction({1, 3}), 4) == StepFunction({1, 1, 3, 3}));
  }

  TEST_CASE("prolongation is an isometry") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 100; ++trial) {
      const StepFunction u = random_step(rng, 10);
      for (std::size_t N : {10u, 20u, 70u}) {
        CHECK(prolong_to(u, N).l2_norm() == doctest::Approx(u.l2_norm()).epsilon(1e-15));
        CHECK(oracle::step_distance(prolong_to(u, N).values(), u.values()) == 0.0);
      }
    }
  }

  TEST_CASE("restriction inverts prolongation") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 100; ++trial) {
      const StepFunction u = random_step(rng, 7);
      for (std::size_t N : {7u, 21u, 63u}) CHECK(restrict_to(prolong_to(u, N), 7) == u);
    }
  }
}

TEST_SUITE("continuum") {
  TEST_CASE("projected operator is close to the analytic one") {
    std::mt19937_64 rng(46);
    const std::size_t n = 32;
    for (const Graphon& W : {graphons::power_law(0.4), graphons::small_world(0.2, 0.15)}) {
      for (double alpha : {1.0, std::pow(32.0, -0.45)}) {
        const StepGraphon barW = truncate_project(W, n, alpha);
        const double gap = l2_distance(barW, W);
        for (int trial = 0; trial < 10; ++trial) {
          const StepFunction v = random_step(rng, n);
          CAPTURE(W.id);
          CHECK(operator_distance(barW, W, couplings::sine(), v) <= gap);
        }
      }
    }
  }

  TEST_CASE("operator distance against direct evaluations") {
    std::mt19937_64 rng(47);
    const std::size_t n = 12;
    const StepFunction v = random_step(rng, n);
    const CouplingFunction D = couplings::sakaguchi(0.3);
    const Graphon W = graphons::constant(0.8);
    // The analytic operator of a constant kernel is itself piecewise constant.
    CHECK(operator_distance(project(W, n), W, D, v) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    const StepFunction Kv = apply_K(StepGraphon::constant(n, 0.8), D, v);
    CHECK(operator_distance(StepGraphon::constant(n, 0.0), W, D, v) == doctest::Approx(Kv.l2_norm()).epsilon(1e-9));

    // Step kernel at a finer resolution: compare with the exact refined operator.
    std::vector<double> vals(4 * n * 4 * n);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (double& x : vals) x = u(rng);
    const StepGraphon fine(4 * n, vals, false);
    const StepGraphon coarse = project(graphons::from_step(fine), n);
    const StepFunction fine_v = prolong_to(v, 4 * n);
    const StepFunction exact = apply_K(fine, D, fine_v);
    const StepFunction approx = prolong_to(apply_K(coarse, D, v), 4 * n);
    CHECK(operator_distance(coarse, graphons::from_step(fine), D, v) ==
          doctest::Approx(minus(exact, approx).l2_norm()).epsilon(1e-8));
  }

  TEST_CASE("Galerkin solutions approach a fine reference") {
    const Graphon W = graphons::power_law(0.4);
    const InitialProfile g = profiles::linear(2.0 * pi);
    const double T = 1.0, dt = 0.004;
    const Trajectory ref = galerkin_solve(W, forcings::zero(), couplings::sine(), g, 1024, T, dt);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {16u, 64u, 256u}) {
      const double e = sup_time_distance(galerkin_solve(W, forcings::zero(), couplings::sine(), g, n, T, dt), ref);
      CAPTURE(n);
      CHECK(e < prev);
      prev = e;
    }
  }

  TEST_CASE("prolongation and restriction are adjoint") {
    std::mt19937_64 rng(48);
    for (int trial = 0; trial < 100; ++trial) {
      const StepFunction u = random_step(rng, 8), w = random_step(rng, 40);
      CHECK(inner(prolong_to(u, 40).values(), w.values()) ==
            doctest::Approx(inner(u.values(), restrict_to(w, 8).values())).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("analytic operator uses the projected kernel") {
    std::mt19937_64 rng(49);
    const Graphon W = graphons::small_world(0.3, 0.2);
    const StepFunction v = random_step(rng, 20);
    CHECK(apply_K(W, couplings::sine(), v) == apply_K(project(W, 20), couplings::sine(), v));
  }

  TEST_CASE("mesh transfer preconditions") {
    CHECK_THROWS_AS(restrict_to(StepFunction({1, 2, 3}), 2), InvalidArgument);
    CHECK_THROWS_AS(prolong_to(StepFunction({1, 2}), 3), InvalidArgument);
    CHECK_THROWS_AS(apply_K(StepGraphon::constant(3, 1.0), couplings::sine(), StepFunction({1, 2})), InvalidArgument);
    CHECK_THROWS_AS(StepFunction(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(StepFunction({1.0, std::nan("")}), InvalidArgument);
  }

  TEST_CASE("step function norm matches the discrete norm") {
    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 20; ++trial) {
      const StepFunction u = random_step(rng, 33);
      CHECK(u.l2_norm() == doctest::Approx(discrete_l2_norm(u.values())).epsilon(1e-15));
      // Norm of the embedding computed over the breakpoints of a finer mesh.
      CHECK(u.l2_norm() == doctest::Approx(oracle::step_distance(u.values(), std::vector<double>(66, 0.0))).epsilon(1e-13));
    }
  }

  TEST_CASE("reference solutions are cached by content") {
    const auto dir = scratch_dir("cache");
    GalerkinOptions opts;
    opts.cache_dir = dir;
    const Graphon W = graphons::power_law(0.3);
    const InitialProfile g = profiles::linear(2.0 * pi);
    const Trajectory a = galerkin_solve(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01, opts);
    const auto file = dir / (reference_key(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01) + ".trj");
    REQUIRE(std::filesystem::exists(file));
    CHECK(galerkin_solve(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01, opts) == a);
    CHECK(galerkin_solve(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01) == a);

    CHECK(reference_key(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01) !=
          reference_key(W, forcings::zero(), couplings::sine(), g, 64, 0.6, 0.01));
    CHECK(reference_key(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01) !=
          reference_key(graphons::power_law(0.31), forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01));
    CHECK(reference_key(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01) !=
          reference_key(W, forcings::constant(1), couplings::sine(), g, 64, 0.5, 0.01));

    // A cache entry that does not match the request is recomputed.
    {
      std::ofstream out(file, std::ios::binary | std::ios::trunc);
      write_binary(out, Trajectory(64, 0.02, std::vector<double>(64 * 26, 0.0)));
    }
    CHECK(galerkin_solve(W, forcings::zero(), couplings::sine(), g, 64, 0.5, 0.01, opts) == a);
    std::filesystem::remove_all(dir);
  }
}
