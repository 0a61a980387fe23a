#include "inclusive/types.hpp"

#include <cmath>
#include <stdexcept>

namespace inclusive {

Trajectory::Trajectory(Matd states) : states_(std::move(states)) {
  if (states_.rows() < 2) throw std::invalid_argument("trajectory needs at least 2 states");
  if (states_.cols() < 1) throw std::invalid_argument("trajectory states need dimension >= 1");
  if (!states_.allFinite()) throw std::invalid_argument("trajectory contains non-finite values");
}

InputSequence::InputSequence(Matd inputs) : inputs_(std::move(inputs)) {
  if (inputs_.rows() < 1 || inputs_.cols() < 1) throw std::invalid_argument("empty input sequence");
  if (!inputs_.allFinite()) throw std::invalid_argument("input sequence contains non-finite values");
}

Vecd InputSequence::flattened() const {
  Vecd flat(inputs_.size());
  for (Eigen::Index t = 0; t < inputs_.rows(); ++t)
    flat.segment(t * inputs_.cols(), inputs_.cols()) = inputs_.row(t).transpose();
  return flat;
}

InputSequence InputSequence::from_flat(const Vecd& flat, Eigen::Index steps, Eigen::Index dim) {
  if (flat.size() != steps * dim) throw std::invalid_argument("flat input has wrong size");
  Matd u(steps, dim);
  for (Eigen::Index t = 0; t < steps; ++t) u.row(t) = flat.segment(t * dim, dim).transpose();
  return InputSequence(std::move(u));
}

RewardHypothesis RewardHypothesis::normalized() const {
  const double n = weights.norm();
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize zero reward weights");
  return {weights / n, label};
}

double reward(const RewardHypothesis& theta, const FeatureVector& phi) {
  if (theta.weights.size() != phi.size())
    throw std::invalid_argument("reward: theta has " + std::to_string(theta.weights.size()) +
                                " weights but phi has " + std::to_string(phi.size()) + " features");
  return theta.weights.dot(phi);
}

Trajectory canonical_round(const Trajectory& traj, int decimals) {
  if (decimals < 0) throw std::invalid_argument("canonical_round: decimals must be >= 0");
  const double scale = std::pow(10.0, decimals);
  // nearbyint honours the default FE_TONEAREST mode, i.e. ties to even.
  // Adding 0.0 folds -0 into +0 so equal values share one representation.
  Matd out = traj.states().unaryExpr([scale](double v) { return std::nearbyint(v * scale) / scale + 0.0; });
  return Trajectory(std::move(out));
}

ChoiceSet::Key ChoiceSet::key_of(const Trajectory& traj) {
  const Trajectory r = canonical_round(traj, kDedupDecimals);
  Key key;
  key.reserve(static_cast<std::size_t>(r.states().size()) + 2);
  key.push_back(static_cast<double>(r.length()));
  key.push_back(static_cast<double>(r.dim()));
  for (Eigen::Index t = 0; t < r.length(); ++t)
    for (Eigen::Index j = 0; j < r.dim(); ++j) key.push_back(r.states()(t, j));
  return key;
}

bool ChoiceSet::insert(const Trajectory& traj, Provenance provenance) {
  auto [it, inserted] = index_.try_emplace(key_of(traj), members_.size());
  if (!inserted) return false;
  members_.push_back(traj);
  provenance_.push_back(std::move(provenance));
  return true;
}

bool ChoiceSet::contains(const Trajectory& traj) const { return index_.count(key_of(traj)) > 0; }

std::optional<std::size_t> ChoiceSet::index_of(const Trajectory& traj) const {
  auto it = index_.find(key_of(traj));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DemonstrationSet::DemonstrationSet(std::vector<Trajectory> demos) : demos_(std::move(demos)) {
  if (demos_.empty()) throw std::invalid_argument("demonstration set must hold at least one demo");
  for (const auto& d : demos_)
    if (d.length() != demos_.front().length() || d.dim() != demos_.front().dim())
      throw std::invalid_argument("demonstrations must share horizon and state dimension");
}

Matd feature_matrix(const std::vector<Trajectory>& trajs, const FeatureMap& features) {
  if (trajs.empty()) return Matd(0, 0);
  FeatureVector first = features(trajs.front());
  Matd out(first.size(), static_cast<Eigen::Index>(trajs.size()));
  out.col(0) = first;
  for (std::size_t i = 1; i < trajs.size(); ++i) {
    FeatureVector phi = features(trajs[i]);
    if (phi.size() != out.rows()) throw std::invalid_argument("feature map returned inconsistent sizes");
    out.col(static_cast<Eigen::Index>(i)) = phi;
  }
  return out;
}

}  // namespace inclusive
