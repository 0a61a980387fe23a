#include "inclusive/inference.hpp"

#include "inclusive/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace inclusive {

Rationality::Rationality(double beta) : beta_(beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument("rationality beta must be finite and >= 0");
}

Belief::Belief(std::vector<RewardHypothesis> hypotheses, Vecd probs)
    : hypotheses_(std::move(hypotheses)), probs_(std::move(probs)) {
  if (hypotheses_.empty()) throw std::invalid_argument("belief needs at least one hypothesis");
  if (static_cast<Eigen::Index>(hypotheses_.size()) != probs_.size())
    throw std::invalid_argument("belief: hypotheses and probabilities differ in length");
  if (!probs_.allFinite() || (probs_.array() < 0.0).any())
    throw std::invalid_argument("belief probabilities must be finite and non-negative");
  if (std::abs(probs_.sum() - 1.0) > 1e-9) throw std::invalid_argument("belief probabilities must sum to 1");
}

Belief Belief::uniform(std::vector<RewardHypothesis> hypotheses) {
  const auto n = static_cast<Eigen::Index>(hypotheses.size());
  if (n == 0) throw std::invalid_argument("belief needs at least one hypothesis");
  return Belief(std::move(hypotheses), Vecd::Constant(n, 1.0 / static_cast<double>(n)));
}

std::size_t Belief::map_index() const {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs_.size(); ++i)
    if (probs_(i) > probs_(best)) best = i;
  return static_cast<std::size_t>(best);
}

Vecd boltzmann_probabilities(const Vecd& rewards, double beta) {
  if (rewards.size() == 0) throw std::invalid_argument("boltzmann_probabilities: empty choice set");
  const Vecd scaled = beta * rewards;
  return (scaled.array() - log_sum_exp(scaled)).exp().matrix();
}

double boltzmann_likelihood(const Trajectory& xi, const RewardHypothesis& theta,
                            const ChoiceSet& choice_set, Rationality beta,
                            const FeatureMap& features) {
  if (choice_set.empty()) throw std::invalid_argument("boltzmann_likelihood: empty choice set");
  const auto idx = choice_set.index_of(xi);
  if (!idx) throw std::invalid_argument("boltzmann_likelihood: trajectory is not in the choice set");
  const Vecd r = rewards(theta, feature_matrix(choice_set, features));
  return boltzmann_probabilities(r, beta.beta())(static_cast<Eigen::Index>(*idx));
}

double log_likelihood(const Vecd& theta, const Matd& demo_features, const Matd& set_features,
                      double beta) {
  // Rewards relative to each demo: a demo facing only itself scores exactly
  // zero, and large beta cannot overflow.
  double total = 0.0;
  for (Eigen::Index d = 0; d < demo_features.cols(); ++d) {
    const Vecd rel = beta * ((set_features.colwise() - demo_features.col(d)).transpose() * theta);
    total -= log_sum_exp(rel);
  }
  return total;
}

Vecd log_posterior_weights(const Matd& demo_features, const Matd& set_features,
                           const Belief& prior, double beta) {
  if (set_features.cols() == 0) throw std::invalid_argument("posterior: empty choice set");
  Vecd out(static_cast<Eigen::Index>(prior.size()));
  for (std::size_t h = 0; h < prior.size(); ++h) {
    const auto i = static_cast<Eigen::Index>(h);
    const double p = prior.probs()(i);
    out(i) = (p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity()) +
             log_likelihood(prior.hypotheses()[h].weights, demo_features, set_features, beta);
  }
  return out;
}

Belief normalize_log_weights(const std::vector<RewardHypothesis>& hypotheses,
                             const Vecd& log_weights, double beta) {
  const double z = log_sum_exp(log_weights);
  if (!std::isfinite(z)) {
    std::ostringstream msg;
    msg << "posterior mass is numerically zero at beta=" << beta;
    throw std::runtime_error(msg.str());
  }
  Vecd probs = (log_weights.array() - z).exp().matrix();
  probs /= probs.sum();
  return Belief(hypotheses, std::move(probs));
}

Belief posterior(const DemonstrationSet& demos, const ChoiceSet& choice_set, const Belief& prior,
                 Rationality beta, const FeatureMap& features) {
  if (choice_set.empty()) throw std::invalid_argument("posterior: empty choice set");
  for (std::size_t i = 0; i < demos.size(); ++i)
    if (!choice_set.contains(demos[i]))
      throw std::invalid_argument("posterior: demonstration " + std::to_string(i) +
                                  " is not in the choice set");
  const Matd demo_phi = feature_matrix(demos, features);
  const Matd set_phi = feature_matrix(choice_set, features);
  return normalize_log_weights(prior.hypotheses(),
                               log_posterior_weights(demo_phi, set_phi, prior, beta.beta()), beta.beta());
}

double shannon_entropy(const Vecd& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
  return std::max(h, 0.0);
}

double shannon_entropy(const Belief& b) { return shannon_entropy(b.probs()); }

double entropy_of_log_weights(const Vecd& log_weights) {
  const double z = log_sum_exp(log_weights);
  double h = z;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    if (!std::isfinite(log_weights(i))) continue;
    h -= std::exp(log_weights(i) - z) * log_weights(i);
  }
  return std::max(h, 0.0);
}

void MhConfig::validate() const {
  if (burn_in < 0) throw std::invalid_argument("mh: burn_in must be >= 0");
  if (samples < 1) throw std::invalid_argument("mh: samples must be >= 1");
  if (thin < 1) throw std::invalid_argument("mh: thin must be >= 1");
  if (!(step_scale > 0.0)) throw std::invalid_argument("mh: step_scale must be > 0");
}

RewardHypothesis MhResult::sample(std::size_t i) const {
  return {samples.col(static_cast<Eigen::Index>(i)), "mh-sample"};
}

namespace {

Vecd standard_normal(Rng& rng, Eigen::Index k) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vecd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = n01(rng);
  return v;
}

Vecd random_unit(Rng& rng, Eigen::Index k) {
  for (;;) {
    Vecd v = standard_normal(rng, k);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace

MhResult mh_sample_posterior(const Matd& demo_features, const Matd& set_features, double beta,
                             const MhConfig& cfg) {
  cfg.validate();
  const Eigen::Index k = set_features.rows();
  if (k < 2) throw std::invalid_argument("mh: need at least 2 feature dimensions");
  if (demo_features.rows() != k) throw std::invalid_argument("mh: demo and choice-set features differ in k");

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // The proposal normalize(theta + s z) depends only on the angle between
  // the current and proposed points, so it is symmetric on the sphere.
  Vecd theta = random_unit(rng, k);
  double log_p = log_likelihood(theta, demo_features, set_features, beta);

  MhResult out;
  out.samples.resize(k, cfg.samples);
  const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.samples) * cfg.thin;
  long accepted = 0;
  int kept = 0;
  for (long it = 0; it < total; ++it) {
    Vecd proposal = theta + cfg.step_scale * standard_normal(rng, k);
    const double n = proposal.norm();
    if (n > 1e-12) {
      proposal /= n;
      const double log_q = log_likelihood(proposal, demo_features, set_features, beta);
      const double u = unif(rng);
      if (log_q >= log_p || std::log(u) < log_q - log_p) {
        theta = std::move(proposal);
        log_p = log_q;
        ++accepted;
      }
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) out.samples.col(kept++) = theta;
  }

  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  out.low_acceptance = out.acceptance_rate < 0.01;
  Vecd m = out.samples.rowwise().mean();
  const double mn = m.norm();
  // A mean of exactly zero has no direction; fall back to the last sample.
  out.mean = mn > 0.0 ? Vecd(m / mn) : Vecd(out.samples.col(out.samples.cols() - 1));
  return out;
}

MhResult mh_sample_posterior(const DemonstrationSet& demos, const ChoiceSet& choice_set,
                             Rationality beta, const FeatureMap& features, const MhConfig& cfg) {
  for (std::size_t i = 0; i < demos.size(); ++i)
    if (!choice_set.contains(demos[i]))
      throw std::invalid_argument("mh: demonstration " + std::to_string(i) + " is not in the choice set");
  return mh_sample_posterior(feature_matrix(demos, features), feature_matrix(choice_set, features),
                             beta.beta(), cfg);
}

double regret(const RewardHypothesis& theta_true, const Trajectory& xi_star,
              const Trajectory& xi_robot, const FeatureMap& features) {
  return reward(theta_true, features(xi_star)) - reward(theta_true, features(xi_robot));
}

double weight_error(const Vecd& theta_true, const Vecd& theta_hat) {
  if (theta_true.size() != theta_hat.size())
    throw std::invalid_argument("weight_error: dimension mismatch");
  return (theta_true - theta_hat).norm();
}

}  // namespace inclusive
