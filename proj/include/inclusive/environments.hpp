#pragma once

#include "inclusive/dynamics.hpp"
#include "inclusive/random.hpp"
#include "inclusive/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace inclusive {

struct RolloutDiagnostics {
  int clamped_inputs = 0;
  int clamped_states = 0;
};

/// Replaces a proposed input with the input actually applied at step t from
/// `state`. Used to model teachers who cannot produce arbitrary inputs.
using InputFilter = std::function<Vecd(Eigen::Index t, const Vecd& state, const Vecd& proposed)>;

/// A deterministic benchmark task: dynamics g, feature map Phi, a discrete
/// hypothesis set and the machinery to populate a candidate trajectory bank.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index horizon() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index feature_dim() const = 0;
  virtual Vecd start_state() const = 0;
  /// Per-step input box, as a bound on the infinity norm.
  virtual double input_limit() const = 0;

  /// One step of the (clamped) dynamics.
  virtual Vecd step(const Vecd& x, const Vecd& u, RolloutDiagnostics* diag = nullptr) const = 0;
  /// The dynamics without clamping, as an affine map of the inputs.
  virtual LinearRollout linear_model(const Vecd& x0) const = 0;
  virtual FeatureVector features(const Trajectory& xi) const = 0;
  /// Elementwise [lower, upper] bounds of every feature for in-box inputs.
  virtual std::pair<FeatureVector, FeatureVector> feature_bounds() const = 0;

  virtual const std::vector<RewardHypothesis>& hypotheses() const = 0;
  /// Index into hypotheses() of the default teacher objective.
  virtual std::size_t true_index() const = 0;

  /// Goal-directed inputs used to seed optimization.
  virtual InputSequence nominal_inputs() const = 0;
  /// Smooth random inputs for broad bank coverage.
  virtual InputSequence random_inputs(Rng& rng) const = 0;

  RewardHypothesis true_theta() const { return hypotheses()[true_index()]; }
  FeatureMap feature_map() const;

  /// Throws std::invalid_argument if |U| != T.
  Trajectory rollout(const Vecd& x0, const InputSequence& u, RolloutDiagnostics* diag = nullptr) const;
  Trajectory rollout(const InputSequence& u) const { return rollout(start_state(), u); }
  /// Rollout where every proposed input passes through `filter`; the inputs
  /// actually applied are written to `applied` when non-null.
  Trajectory rollout_filtered(const Vecd& x0, const InputSequence& u, const InputFilter& filter,
                              InputSequence* applied = nullptr) const;
};

struct LavaworldSpec {
  Vecd start = Eigen::Vector2d(0.1, 0.1);
  Vecd goal = Eigen::Vector2d(0.9, 0.9);
  Vecd lava_center = Eigen::Vector2d(0.5, 0.5);
  double lava_radius = 0.15;
  double lava_width = 0.05;  // w in exp(-d^2 / w)
  double input_limit = 0.15;
  Eigen::Index horizon = 15;

  void validate() const;
};

/// 2-D point mass in the unit square steering around a lava disc.
///
/// Features (all to be maximized):
///   0: -path length, sum_t ||x_{t+1} - x_t||
///   1: -lava proximity, sum_{t=1..T} exp(-||x_t - c||^2 / w)
///   2: -distance from x_T to the goal
class Lavaworld final : public Environment {
 public:
  explicit Lavaworld(LavaworldSpec spec = {});

  std::string name() const override { return "lavaworld"; }
  Eigen::Index horizon() const override { return spec_.horizon; }
  Eigen::Index state_dim() const override { return 2; }
  Eigen::Index input_dim() const override { return 2; }
  Eigen::Index feature_dim() const override { return 3; }
  Vecd start_state() const override { return spec_.start; }
  double input_limit() const override { return spec_.input_limit; }

  Vecd step(const Vecd& x, const Vecd& u, RolloutDiagnostics* diag = nullptr) const override;
  LinearRollout linear_model(const Vecd& x0) const override;
  FeatureVector features(const Trajectory& xi) const override;
  std::pair<FeatureVector, FeatureVector> feature_bounds() const override;
  const std::vector<RewardHypothesis>& hypotheses() const override { return hypotheses_; }
  std::size_t true_index() const override { return 0; }
  InputSequence nominal_inputs() const override;
  InputSequence random_inputs(Rng& rng) const override;

  const LavaworldSpec& spec() const { return spec_; }

  /// Distance from x to the edge of the lava disc (0 inside).
  double lava_clearance(const Vecd& x) const;
  bool lava_visible(const Vecd& x, double visibility) const { return lava_clearance(x) <= visibility; }

  /// Reactive planner step: head for the goal, and when the lava is visible
  /// add `gain` times a unit repulsion that points away from the lava centre
  /// and around it on the goal side. Step length is `speed`, never
  /// overshooting the goal.
  Vecd greedy_input(const Vecd& x, double gain, double speed, double visibility) const;

 private:
  LavaworldSpec spec_;
  std::vector<RewardHypothesis> hypotheses_;
};

struct CoffeeWorldSpec {
  double start_x = 0.1;
  double goal_x = 0.9;
  double coupling = 0.6;     // tilt per unit input
  double tilt_decay = 0.85;  // in [0, 1)
  double spill_threshold = 0.35;
  double input_limit = 0.25;
  Eigen::Index horizon = 12;

  void validate() const;
};

/// Carrying a cup whose tilt is coupled to translation. State (x, phi):
///   x_{t+1} = x_t + u_t,  phi_{t+1} = decay * phi_t + c * u_t.
///
/// Features (all to be maximized):
///   0: -|x_T - goal|
///   1: -sum_t |phi_t|
///   2: -number of states with |phi_t| above the spill threshold
class CoffeeWorld final : public Environment {
 public:
  explicit CoffeeWorld(CoffeeWorldSpec spec = {});

  std::string name() const override { return "coffeeworld"; }
  Eigen::Index horizon() const override { return spec_.horizon; }
  Eigen::Index state_dim() const override { return 2; }
  Eigen::Index input_dim() const override { return 1; }
  Eigen::Index feature_dim() const override { return 3; }
  Vecd start_state() const override { return Eigen::Vector2d(spec_.start_x, 0.0); }
  double input_limit() const override { return spec_.input_limit; }

  Vecd step(const Vecd& x, const Vecd& u, RolloutDiagnostics* diag = nullptr) const override;
  LinearRollout linear_model(const Vecd& x0) const override;
  FeatureVector features(const Trajectory& xi) const override;
  std::pair<FeatureVector, FeatureVector> feature_bounds() const override;
  const std::vector<RewardHypothesis>& hypotheses() const override { return hypotheses_; }
  std::size_t true_index() const override { return 0; }
  InputSequence nominal_inputs() const override;
  InputSequence random_inputs(Rng& rng) const override;

  const CoffeeWorldSpec& spec() const { return spec_; }

  /// Lower bound on sum_t |phi_t| for any input sequence that reaches the
  /// goal and whose nonzero inputs all have magnitude >= u_min:
  /// c * max(u_min, |goal - start| / T).
  double tilt_lower_bound(double u_min) const;

 private:
  CoffeeWorldSpec spec_;
  std::vector<RewardHypothesis> hypotheses_;
};

/// Registered environment names: "lavaworld", "coffeeworld".
std::vector<std::string> environment_names();
std::unique_ptr<Environment> make_environment(const std::string& name);

struct HillClimbConfig {
  int restarts = 4;
  int iterations = 400;
};

/// Random-restart hill climbing on the input sequence, maximizing r_theta.
/// The first restart starts from nominal_inputs(). When `filter` is set the
/// search is over sequences the filter lets through.
Trajectory optimize_inputs(const Environment& env, const RewardHypothesis& theta, std::uint64_t seed,
                           const InputFilter& filter = nullptr, const HillClimbConfig& cfg = {});

Trajectory random_rollout(const Environment& env, Rng& rng);

/// One near-optimal trajectory per hypothesis, then random rollouts up to
/// `size` members.
ChoiceSet candidate_bank(const Environment& env, int size, std::uint64_t seed);

}  // namespace inclusive
