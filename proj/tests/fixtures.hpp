#pragma once

#include "inclusive/types.hpp"

#include <random>
#include <vector>

namespace fixtures {

using inclusive::Matd;
using inclusive::Trajectory;
using inclusive::Vecd;

/// Two-state trajectory whose final state is `phi`; paired with point_features
/// it stands for an arbitrary feature vector.
inline Trajectory point(const Vecd& phi) {
  Matd s = Matd::Zero(2, phi.size());
  s.row(1) = phi.transpose();
  return Trajectory(s);
}

inline Vecd point_features(const Trajectory& t) { return t.states().row(1).transpose(); }

inline Vecd uniform_vec(std::mt19937_64& rng, Eigen::Index k, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vecd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = u(rng);
  return v;
}

}  // namespace fixtures
