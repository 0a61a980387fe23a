#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace inclusive {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vecd = Vec<double>;
using Matd = Mat<double>;

/// Feature values Phi(xi), one entry per feature dimension.
using FeatureVector = Vecd;

/// Fixed-horizon sequence of states. Row t holds the state at time t,
/// so a trajectory of horizon T has T+1 rows.
class Trajectory {
 public:
  explicit Trajectory(Matd states);

  const Matd& states() const { return states_; }
  Eigen::Index horizon() const { return states_.rows() - 1; }
  Eigen::Index length() const { return states_.rows(); }
  Eigen::Index dim() const { return states_.cols(); }
  Vecd state(Eigen::Index t) const { return states_.row(t).transpose(); }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.states_.rows() == b.states_.rows() && a.states_.cols() == b.states_.cols() &&
           a.states_ == b.states_;
  }

 private:
  Matd states_;
};

/// Teleoperation inputs; row t is u^t.
class InputSequence {
 public:
  explicit InputSequence(Matd inputs);

  const Matd& inputs() const { return inputs_; }
  Eigen::Index steps() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }
  Vecd input(Eigen::Index t) const { return inputs_.row(t).transpose(); }

  /// Row-major flattening (u^0, u^1, ...), the layout used by LinearRollout.
  Vecd flattened() const;
  static InputSequence from_flat(const Vecd& flat, Eigen::Index steps, Eigen::Index dim);

 private:
  Matd inputs_;
};

/// Linear reward weights theta; r_theta(xi) = theta . Phi(xi).
struct RewardHypothesis {
  Vecd weights;
  std::string label;

  Eigen::Index dim() const { return weights.size(); }
  RewardHypothesis normalized() const;
};

using FeatureMap = std::function<FeatureVector(const Trajectory&)>;

/// theta . phi. Throws std::invalid_argument on a dimension mismatch.
double reward(const RewardHypothesis& theta, const FeatureVector& phi);

/// Rewards of every column of a k x M feature matrix.
template <typename Derived>
Vecd rewards(const RewardHypothesis& theta, const Eigen::MatrixBase<Derived>& features) {
  return features.transpose() * theta.weights;
}

/// Numerically stable log(sum(exp(x))). Returns -inf for an all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

/// Rounds every coordinate half-to-even at `decimals` places.
Trajectory canonical_round(const Trajectory& traj, int decimals);

/// Where a choice-set member came from.
struct Provenance {
  std::string generator = "given";
  int source = -1;  // demonstration index, -1 when not derived from a demo
  double parameter = 0.0;
  std::uint64_t seed = 0;
};

/// Finite set of trajectories. Membership is decided on the canonical
/// rounding at kDedupDecimals places; iteration follows insertion order.
class ChoiceSet {
 public:
  static constexpr int kDedupDecimals = 9;

  ChoiceSet() = default;

  /// Returns false (and leaves the set untouched) for a duplicate.
  bool insert(const Trajectory& traj, Provenance provenance = {});
  bool contains(const Trajectory& traj) const;
  std::optional<std::size_t> index_of(const Trajectory& traj) const;

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const Trajectory& operator[](std::size_t i) const { return members_[i]; }
  const Provenance& provenance(std::size_t i) const { return provenance_[i]; }
  const std::vector<Trajectory>& members() const { return members_; }

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

 private:
  using Key = std::vector<double>;
  static Key key_of(const Trajectory& traj);

  std::vector<Trajectory> members_;
  std::vector<Provenance> provenance_;
  std::map<Key, std::size_t> index_;
};

/// The N trajectories a teacher actually showed, in order.
class DemonstrationSet {
 public:
  explicit DemonstrationSet(std::vector<Trajectory> demos);

  std::size_t size() const { return demos_.size(); }
  const Trajectory& operator[](std::size_t i) const { return demos_[i]; }
  const std::vector<Trajectory>& demos() const { return demos_; }
  auto begin() const { return demos_.begin(); }
  auto end() const { return demos_.end(); }

 private:
  std::vector<Trajectory> demos_;
};

/// k x M matrix whose columns are Phi of each trajectory.
Matd feature_matrix(const std::vector<Trajectory>& trajs, const FeatureMap& features);
inline Matd feature_matrix(const ChoiceSet& set, const FeatureMap& features) {
  return feature_matrix(set.members(), features);
}
inline Matd feature_matrix(const DemonstrationSet& demos, const FeatureMap& features) {
  return feature_matrix(demos.demos(), features);
}

}  // namespace inclusive
