#include "inclusive/dynamics.hpp"

#include <stdexcept>

namespace inclusive {

Trajectory LinearRollout::apply(const InputSequence& u) const {
  if (u.steps() != steps || u.dim() != input_dim)
    throw std::invalid_argument("LinearRollout: input sequence has the wrong shape");
  return unflatten(apply_flat(u.flattened()));
}

Vecd LinearRollout::flatten(const Trajectory& xi) const {
  if (xi.horizon() != steps || xi.dim() != state_dim)
    throw std::invalid_argument("LinearRollout: trajectory has the wrong shape");
  Vecd flat(xi.states().size());
  for (Eigen::Index t = 0; t < xi.length(); ++t)
    flat.segment(t * state_dim, state_dim) = xi.states().row(t).transpose();
  return flat;
}

Trajectory LinearRollout::unflatten(const Vecd& flat) const {
  Matd s(steps + 1, state_dim);
  for (Eigen::Index t = 0; t <= steps; ++t) s.row(t) = flat.segment(t * state_dim, state_dim).transpose();
  return Trajectory(std::move(s));
}

LinearRollout integrator_rollout(const Vecd& x0, Eigen::Index steps) {
  const Eigen::Index d = x0.size();
  LinearRollout g;
  g.steps = steps;
  g.state_dim = d;
  g.input_dim = d;
  g.offset = x0.replicate(steps + 1, 1);
  g.map = Matd::Zero((steps + 1) * d, steps * d);
  for (Eigen::Index t = 1; t <= steps; ++t)
    for (Eigen::Index s = 0; s < t; ++s) g.map.block(t * d, s * d, d, d).setIdentity();
  return g;
}

}  // namespace inclusive
