#pragma once

#include "inclusive/types.hpp"

namespace inclusive {

/// Affine rollout map g(U) = offset + map * vec(U).
///
/// States are flattened row-major ((T+1)*d entries, time-major) and inputs
/// likewise (T*m entries). Both environments expose their unclamped dynamics
/// in this form so the counterfactual solvers can work on a plain least
/// squares structure.
struct LinearRollout {
  Matd map;
  Vecd offset;
  Eigen::Index steps = 0;
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;

  Vecd apply_flat(const Vecd& u) const { return offset + map * u; }
  Trajectory apply(const InputSequence& u) const;
  Vecd flatten(const Trajectory& xi) const;
  Trajectory unflatten(const Vecd& flat) const;
};

/// x_{t+1} = x_t + u_t in `x0.size()` dimensions over `steps` steps.
LinearRollout integrator_rollout(const Vecd& x0, Eigen::Index steps);

}  // namespace inclusive
