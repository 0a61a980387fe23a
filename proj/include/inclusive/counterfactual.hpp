#pragma once

#include "inclusive/dynamics.hpp"
#include "inclusive/environments.hpp"
#include "inclusive/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace inclusive {

/// Smooth endpoint-preserving deformation shape for a trajectory with
/// `horizon` + 1 waypoints.
///
/// With R the second-difference operator on the interior waypoints (the
/// endpoints held at zero displacement) and K = R^T R, the interior block is
/// K^{-1} scaled to unit spectral norm. Rows and columns for t = 0 and t = T
/// are zero.
Matd deformation_matrix(Eigen::Index horizon);

struct DeformationSpec {
  Matd shape;  // (T+1) x (T+1)
  double sigma_scale = 0.05;
  int count = 5;

  static DeformationSpec smooth(Eigen::Index horizon, double sigma_scale = 0.05, int count = 5);
  void validate() const;
};

/// `count` deformations xi + A sigma, sigma ~ N(0, sigma_scale^2) drawn
/// independently for every waypoint and state dimension.
std::vector<Trajectory> deform_noisy(const Trajectory& xi, const DeformationSpec& spec, std::uint64_t seed);

struct SolverConfig {
  double lambda = 1.0;
  int max_iters = 5000;
  double tol = 1e-8;
  std::optional<double> step;  // proximal step; 1/L when unset

  void validate() const;
};

struct SolveResult {
  InputSequence inputs;
  Trajectory trajectory;  // g(inputs)
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;          // consistent solver only
  std::vector<double> objective_trace;  // sparse solver only, one entry per iterate
};

/// argmin_x 1/2 ||x - v||^2 + weight * ||x||_1^2.
Vecd prox_squared_l1(const Vecd& v, double weight);

double sparse_objective(const Trajectory& xi, const LinearRollout& g, const Vecd& u, double lambda);
double consistent_objective(const Trajectory& xi, const LinearRollout& g, const Vecd& u, double lambda);

/// Proximal gradient on ||xi - g(U)||^2 + lambda ||U||_1^2, where ||U||_1 is
/// the L1 norm of the whole input sequence. Returns the best iterate; the
/// `converged` flag is false if max_iters ran out first.
SolveResult solve_sparse_inputs(const Trajectory& xi, const LinearRollout& g, const SolverConfig& cfg);

/// Direct solve of ||xi - g(U)||^2 + lambda sum_t ||u^t - u^{t-1}||^2.
SolveResult solve_consistent_inputs(const Trajectory& xi, const LinearRollout& g, const SolverConfig& cfg);

struct NoisyGenerator {
  double sigma_scale = 0.05;
  int count = 5;
};
struct SparseGenerator {
  SolverConfig solver;
};
struct ConsistentGenerator {
  SolverConfig solver;
};
using Generator = std::variant<NoisyGenerator, SparseGenerator, ConsistentGenerator>;

std::string generator_name(const Generator& g);

/// Per-demonstration counterfactual budget.
struct CounterfactualBudget {
  int noisy = 5;
  double sigma_scale = 0.05;
  std::vector<double> sparse_lambdas{0.1, 1.0, 10.0};
  std::vector<double> consistent_lambdas{0.1, 1.0, 10.0};
};

std::vector<Generator> make_generators(const CounterfactualBudget& budget);

/// Counterfactuals for one demonstration, tagged with their provenance.
std::vector<std::pair<Trajectory, Provenance>> generate_counterfactuals(
    const Trajectory& demo, int demo_index, const Generator& gen, std::size_t gen_index,
    const Environment& env, std::uint64_t seed);

/// The learner's choice set: the demonstrations plus every counterfactual
/// the generators derive from them.
ChoiceSet build_choice_set(const DemonstrationSet& demos, const std::vector<Generator>& generators,
                           const Environment& env, std::uint64_t seed);

}  // namespace inclusive
