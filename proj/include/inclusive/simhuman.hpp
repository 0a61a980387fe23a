#pragma once

#include "inclusive/environments.hpp"
#include "inclusive/inference.hpp"
#include "inclusive/types.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace inclusive {

/// Teacher reacts to lava only within `radius` of the lava edge.
struct Visibility {
  double radius = 0.1;
};
/// Every nonzero per-step input has norm in [u_min, u_max].
struct MinInput {
  double u_min = 0.08;
  double u_max = 0.0;  // 0: the environment's input limit
};
struct Unlimited {};

using Limitation = std::variant<Unlimited, Visibility, MinInput>;

std::string limitation_name(const Limitation& l);

struct TeacherSpec {
  RewardHypothesis true_theta;
  Rationality beta_h{1.0};
  Limitation limitation = Unlimited{};
  int choice_set_size = 20;

  void validate() const;
};

/// Input filter enforcing the teacher's limitation in `env`. Throws
/// std::invalid_argument when the limitation does not apply to `env`.
InputFilter limitation_filter(const Environment& env, const Limitation& limitation);

/// The best trajectory for the teacher's true reward among those the
/// limitation allows.
Trajectory teacher_optimum(const Environment& env, const TeacherSpec& teacher, std::uint64_t seed);

/// The teacher's choice set C_H: the teacher optimum plus trajectories
/// produced under the limitation, `choice_set_size` members in total.
ChoiceSet build_human_choice_set(const Environment& env, const TeacherSpec& teacher, std::uint64_t seed);

/// Index drawn from the Boltzmann distribution over `rewards`.
std::size_t sample_boltzmann(const Vecd& rewards, double beta, Rng& rng);

/// n i.i.d. Boltzmann-rational picks from C_H under the teacher's reward.
DemonstrationSet sample_demonstrations(const ChoiceSet& choice_set_h, const TeacherSpec& teacher, int n,
                                       const FeatureMap& features, std::uint64_t seed);

/// Upper bound on the probability that a minimal-reward trajectory appears in
/// n demonstrations from a choice set of `choice_size` members with rewards
/// normalized to [0, 1].
double prop4_bound(int choice_size, Rationality beta, int n);

struct MonteCarloEstimate {
  double probability = 0.0;
  double sigma = 0.0;  // binomial standard error at the estimate
  int trials = 0;
};

/// Affine rescaling onto [0, 1]; throws std::invalid_argument if all equal.
Vecd minmax_normalize(const Vecd& rewards);

/// Fraction of trials in which `target` is among n Boltzmann draws over the
/// min-max normalized `rewards`.
MonteCarloEstimate demonstration_probability(const Vecd& rewards, std::size_t target, Rationality beta, int n,
                                             int trials, std::uint64_t seed);

/// Monte Carlo check of prop4_bound on the extremal reward profile: one
/// trajectory with reward 1, the rest 0, target among the zeros.
MonteCarloEstimate prop4_monte_carlo(int choice_size, Rationality beta, int n, int trials, std::uint64_t seed);

}  // namespace inclusive
