#include "doctest.h"

#include "oracles.hpp"

#include "inclusive/counterfactual.hpp"
#include "inclusive/environments.hpp"
#include "inclusive/random.hpp"
#include "inclusive/simhuman.hpp"

#include <cmath>
#include <random>

using namespace inclusive;

namespace {

Trajectory line1d(double a, double b, double c, double d) { return Trajectory(Eigen::Vector4d(a, b, c, d)); }

LinearRollout integrator3() { return integrator_rollout(Vecd::Zero(1), 3); }

Eigen::Vector3d as3(const InputSequence& u) { return u.flattened(); }

}  // namespace

TEST_CASE("integrator rollout") {
  const LinearRollout g = integrator3();
  const Trajectory t = g.apply(InputSequence(Eigen::Vector3d(1, 2, -1)));
  CHECK(t.states().col(0) == Eigen::Vector4d(0, 1, 3, 2));
  CHECK(g.unflatten(g.flatten(t)) == t);
}

TEST_CASE("prox of the squared L1 norm matches brute force") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5), w(0.01, 2.0);
  for (int inst = 0; inst < 20; ++inst) {
    const Eigen::Vector3d v(u(rng), u(rng), u(rng));
    const double weight = w(rng);
    auto f = [&](const Eigen::Vector3d& x) {
      const double l1 = x.cwiseAbs().sum();
      return 0.5 * (x - v).squaredNorm() + weight * l1 * l1;
    };
    const Vecd p = prox_squared_l1(v, weight);
    CHECK(f(p) <= oracle::refined_grid_min3(f) + 1e-6);
  }
  CHECK(prox_squared_l1(Eigen::Vector3d(0, 0, 0), 1.0) == Vecd::Zero(3));
  // one active entry: x = v / (1 + 2w)
  CHECK(prox_squared_l1(Eigen::Vector3d(1, 0, 0), 0.5)(0) == doctest::Approx(0.5));
}

TEST_CASE("sparse solver limits") {
  const LinearRollout g = integrator3();
  const Trajectory target = line1d(0, 1, 2, 3);
  SolverConfig cfg;
  cfg.max_iters = 20000;

  cfg.lambda = 1e-9;
  const SolveResult tiny = solve_sparse_inputs(target, g, cfg);
  CHECK((as3(tiny.inputs) - Eigen::Vector3d(1, 1, 1)).norm() < 1e-6);
  CHECK((tiny.trajectory.states() - target.states()).norm() < 1e-6);

  cfg.lambda = 1e9;
  const SolveResult huge = solve_sparse_inputs(target, g, cfg);
  CHECK(as3(huge.inputs).norm() < 1e-6);
  CHECK(huge.trajectory.states().norm() < 1e-6);
}

TEST_CASE("sparse solver matches the grid oracle") {
  const LinearRollout g = integrator3();
  for (const auto& target : {Eigen::Vector4d(0, 1, 2, 3), Eigen::Vector4d(0, 1, 1, 2), Eigen::Vector4d(0, -1, 0.5, 0)}) {
    for (double lambda : {0.1, 1.0, 3.0}) {
      const SolveResult r = solve_sparse_inputs(Trajectory(target), g, SolverConfig{lambda});
      const double grid = oracle::refined_grid_min3([&](const Eigen::Vector3d& u) { return oracle::sparse_obj(target, u, lambda); });
      CHECK(r.converged);
      CHECK(oracle::sparse_obj(target, as3(r.inputs), lambda) == doctest::Approx(r.objective).epsilon(1e-12));
      CHECK(std::abs(r.objective - grid) <= 1e-3);
      CHECK(r.objective <= grid + 1e-9);
    }
  }
}

TEST_CASE("sparse objective trace never increases") {
  const SolveResult r = solve_sparse_inputs(line1d(0, 1, 1, 2), integrator3(), SolverConfig{1.0});
  REQUIRE(r.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
}

TEST_CASE("larger lambda gives sparser and smoother inputs") {
  const Trajectory target = line1d(0, 1, 0.5, 2);
  double prev_l1 = INFINITY, prev_change = INFINITY;
  for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const Vecd us = solve_sparse_inputs(target, integrator3(), SolverConfig{lambda}).inputs.flattened();
    const Vecd uc = solve_consistent_inputs(target, integrator3(), SolverConfig{lambda}).inputs.flattened();
    const double l1 = us.lpNorm<1>();
    const double change = (uc.tail(2) - uc.head(2)).squaredNorm();
    CHECK(l1 <= prev_l1 + 1e-9);
    CHECK(change <= prev_change + 1e-12);
    prev_l1 = l1;
    prev_change = change;
  }
}

TEST_CASE("consistent solver examples") {
  const LinearRollout g = integrator3();
  for (double lambda : {1e-9, 0.5, 1.0, 1e6}) {
    const SolveResult r = solve_consistent_inputs(line1d(0, 1, 2, 3), g, SolverConfig{lambda});
    CHECK((as3(r.inputs) - Eigen::Vector3d(1, 1, 1)).norm() < 1e-9);
    CHECK(r.objective < 1e-12);
  }
  // constant-input limit: minimize sum (target_t - t u)^2, u = (1 + 2 + 6) / (1 + 4 + 9)
  const SolveResult r = solve_consistent_inputs(line1d(0, 1, 1, 2), g, SolverConfig{1e8});
  for (Eigen::Index t = 0; t < 3; ++t) CHECK(std::abs(r.inputs.input(t)(0) - 9.0 / 14.0) < 1e-6);
  CHECK(std::abs(r.trajectory.states()(3, 0) - 27.0 / 14.0) < 1e-5);
}

TEST_CASE("consistent solver matches the grid oracle") {
  const LinearRollout g = integrator3();
  for (const auto& target : {Eigen::Vector4d(0, 1, 1, 2), Eigen::Vector4d(0, -1, 0.5, 0)}) {
    for (double lambda : {0.1, 1.0, 10.0}) {
      const SolveResult r = solve_consistent_inputs(Trajectory(target), g, SolverConfig{lambda});
      const double grid =
          oracle::refined_grid_min3([&](const Eigen::Vector3d& u) { return oracle::consistent_obj(target, u, lambda); });
      CHECK(r.converged);
      CHECK(oracle::consistent_obj(target, as3(r.inputs), lambda) == doctest::Approx(r.objective).epsilon(1e-12));
      CHECK(std::abs(r.objective - grid) <= 1e-3);
    }
  }
}

TEST_CASE("solvers reject mismatched shapes and bad settings") {
  CHECK_THROWS_AS(solve_sparse_inputs(Trajectory(Eigen::Vector3d(0, 1, 2)), integrator3(), SolverConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_consistent_inputs(line1d(0, 1, 2, 3), integrator3(), SolverConfig{0.0}), std::invalid_argument);
}

TEST_CASE("sparse solver reports non-convergence with the best iterate") {
  SolverConfig cfg{1.0};
  cfg.max_iters = 1;
  cfg.tol = 1e-15;
  const SolveResult r = solve_sparse_inputs(line1d(0, 1, 1, 2), integrator3(), cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.objective == doctest::Approx(*std::min_element(r.objective_trace.begin(), r.objective_trace.end())));
}

TEST_CASE("deformation matrix re-derived independently") {
  const Eigen::Index T = 6;
  const Matd a = deformation_matrix(T);
  Matd r = Matd::Zero(T - 1, T - 1);
  for (Eigen::Index i = 0; i < T - 1; ++i) {
    r(i, i) = -2;
    if (i > 0) r(i, i - 1) = 1;
    if (i < T - 2) r(i, i + 1) = 1;
  }
  Matd kinv = (r.transpose() * r).fullPivLu().inverse();
  kinv /= Eigen::JacobiSVD<Matd>(kinv).singularValues()(0);
  CHECK((a.block(1, 1, T - 1, T - 1) - kinv).norm() < 1e-10);
  CHECK(a.row(0).norm() == 0.0);
  CHECK(a.row(T).norm() == 0.0);
  CHECK(a.col(0).norm() == 0.0);
  CHECK(Eigen::JacobiSVD<Matd>(a).singularValues()(0) == doctest::Approx(1.0));
}

TEST_CASE("noisy deformation") {
  const Trajectory xi(Vecd::Zero(5));
  SUBCASE("zero noise is the identity") {
    for (const auto& t : deform_noisy(xi, DeformationSpec::smooth(4, 0.0, 3), 1)) CHECK(t == xi);
  }
  SUBCASE("re-multiplying A sigma reproduces the displacements") {
    const auto spec = DeformationSpec::smooth(4, 0.05, 2);
    const auto out = deform_noisy(xi, spec, 99);
    Rng rng(99);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (const auto& t : out) {
      Vecd sigma(5);
      for (Eigen::Index i = 0; i < 5; ++i) sigma(i) = 0.05 * n01(rng);
      Vecd expect = Vecd::Zero(5);
      for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) expect(i) += spec.shape(i, j) * sigma(j);
      CHECK((t.states().col(0) - expect).norm() < 1e-15);
      CHECK(t.states()(0, 0) == 0.0);
      CHECK(t.states()(4, 0) == 0.0);
      CHECK(t.states().col(0).norm() > 0.0);
    }
  }
  SUBCASE("endpoints are exact for any trajectory") {
    Matd s = Matd::Random(9, 2);
    const Trajectory t(s);
    for (const auto& d : deform_noisy(t, DeformationSpec::smooth(8, 0.3, 10), 5)) {
      CHECK(d.states().row(0) == s.row(0));
      CHECK(d.states().row(8) == s.row(8));
    }
  }
  CHECK_THROWS_AS(deform_noisy(xi, DeformationSpec::smooth(6), 1), std::invalid_argument);
}

TEST_CASE("choice set construction") {
  const Lavaworld env;
  Rng rng(3);
  const DemonstrationSet demos({random_rollout(env, rng), random_rollout(env, rng)});

  SUBCASE("no generators gives the demos") {
    const ChoiceSet c = build_choice_set(demos, {}, env, 1);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == demos[0]);
    CHECK(c[1] == demos[1]);
  }
  SUBCASE("counting bound") {
    const std::vector<Generator> gens{NoisyGenerator{0.05, 3}, SparseGenerator{SolverConfig{1.0}},
                                      ConsistentGenerator{SolverConfig{1.0}}};
    const ChoiceSet c = build_choice_set(demos, gens, env, 1);
    CHECK(c.size() >= 2);
    CHECK(c.size() <= 12);
  }
  SUBCASE("members replay from their provenance") {
    const auto gens = make_generators(CounterfactualBudget{});
    const ChoiceSet c = build_choice_set(demos, gens, env, 17);
    CHECK(c.size() > 2);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Trajectory& t = c[i];
      const Provenance& p = c.provenance(i);
      CHECK(t.horizon() == env.horizon());
      CHECK(t.state(0) == demos[static_cast<std::size_t>(p.source)].state(0));
      if (p.generator == "demo") continue;
      if (p.generator == "noisy") CHECK(t.state(env.horizon()) == demos[static_cast<std::size_t>(p.source)].state(env.horizon()));
      bool found = false;
      for (std::size_t j = 0; j < gens.size() && !found; ++j) {
        if (generator_name(gens[j]) != p.generator) continue;
        for (const auto& [again, prov] :
             generate_counterfactuals(demos[static_cast<std::size_t>(p.source)], p.source, gens[j], j, env, 17))
          if (canonical_round(again, ChoiceSet::kDedupDecimals) == canonical_round(t, ChoiceSet::kDedupDecimals) &&
              prov.seed == p.seed)
            found = true;
      }
      CHECK(found);
    }
  }
  SUBCASE("same seed, same set") {
    const auto gens = make_generators(CounterfactualBudget{});
    const ChoiceSet a = build_choice_set(demos, gens, env, 4);
    const ChoiceSet b = build_choice_set(demos, gens, env, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("make_generators follows the budget") {
  CounterfactualBudget b;
  CHECK(make_generators(b).size() == 7);
  b.noisy = 0;
  b.sparse_lambdas = {};
  CHECK(make_generators(b).size() == 3);
  CHECK(generator_name(make_generators(b)[0]) == "consistent");
}
