#pragma once

#include "inclusive/types.hpp"

#include <cstdint>
#include <vector>

namespace inclusive {

/// Boltzmann rationality coefficient beta >= 0.
class Rationality {
 public:
  explicit Rationality(double beta);
  double beta() const { return beta_; }

 private:
  double beta_;
};

/// Discrete distribution over a list of reward hypotheses.
class Belief {
 public:
  Belief(std::vector<RewardHypothesis> hypotheses, Vecd probs);

  static Belief uniform(std::vector<RewardHypothesis> hypotheses);

  std::size_t size() const { return hypotheses_.size(); }
  const std::vector<RewardHypothesis>& hypotheses() const { return hypotheses_; }
  const Vecd& probs() const { return probs_; }
  double prob(std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

  /// Most probable hypothesis; ties go to the lowest index.
  std::size_t map_index() const;

 private:
  std::vector<RewardHypothesis> hypotheses_;
  Vecd probs_;
};

/// Softmax of beta * rewards.
Vecd boltzmann_probabilities(const Vecd& rewards, double beta);

/// P(xi | theta, C) under the Boltzmann-rational model. `xi` must already be
/// a member of `choice_set`.
double boltzmann_likelihood(const Trajectory& xi, const RewardHypothesis& theta,
                            const ChoiceSet& choice_set, Rationality beta,
                            const FeatureMap& features);

/// sum over demos of log P(demo | theta, C), given demo features (k x N) and
/// choice-set features (k x M).
double log_likelihood(const Vecd& theta, const Matd& demo_features, const Matd& set_features,
                      double beta);

/// Unnormalized log posterior weight of every hypothesis.
Vecd log_posterior_weights(const Matd& demo_features, const Matd& set_features,
                           const Belief& prior, double beta);

/// Normalizes log weights into a belief; throws std::runtime_error naming beta
/// when every weight is -inf or non-finite.
Belief normalize_log_weights(const std::vector<RewardHypothesis>& hypotheses,
                             const Vecd& log_weights, double beta);

/// Bayesian update of `prior` from demonstrations against `choice_set`.
/// Every demonstration must be a member of the choice set.
Belief posterior(const DemonstrationSet& demos, const ChoiceSet& choice_set, const Belief& prior,
                 Rationality beta, const FeatureMap& features);

/// Shannon entropy in nats, with 0 ln 0 = 0.
double shannon_entropy(const Belief& b);
double shannon_entropy(const Vecd& probs);

/// Entropy of the distribution proportional to exp(log_weights), computed
/// without leaving log space.
double entropy_of_log_weights(const Vecd& log_weights);

struct MhConfig {
  int burn_in = 1000;
  int samples = 5000;
  int thin = 10;
  double step_scale = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MhResult {
  Matd samples;  // k x samples, unit-norm columns
  Vecd mean;     // renormalized sample mean
  double acceptance_rate = 0.0;
  bool low_acceptance = false;  // acceptance below 1%

  std::size_t size() const { return static_cast<std::size_t>(samples.cols()); }
  RewardHypothesis sample(std::size_t i) const;
  RewardHypothesis estimate() const { return {mean, "mh-mean"}; }
};

/// Random-walk Metropolis-Hastings on the unit sphere with a uniform prior.
MhResult mh_sample_posterior(const Matd& demo_features, const Matd& set_features, double beta,
                             const MhConfig& cfg);
MhResult mh_sample_posterior(const DemonstrationSet& demos, const ChoiceSet& choice_set,
                             Rationality beta, const FeatureMap& features, const MhConfig& cfg);

/// r_theta(xi_star) - r_theta(xi_robot).
double regret(const RewardHypothesis& theta_true, const Trajectory& xi_star,
              const Trajectory& xi_robot, const FeatureMap& features);

/// ||theta_true - theta_hat||_2.
double weight_error(const Vecd& theta_true, const Vecd& theta_hat);

}  // namespace inclusive
