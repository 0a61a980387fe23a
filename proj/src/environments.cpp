#include "inclusive/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace inclusive {

FeatureMap Environment::feature_map() const {
  return [this](const Trajectory& xi) { return features(xi); };
}

Trajectory Environment::rollout(const Vecd& x0, const InputSequence& u, RolloutDiagnostics* diag) const {
  if (u.steps() != horizon())
    throw std::invalid_argument(name() + ": expected " + std::to_string(horizon()) + " inputs, got " +
                                std::to_string(u.steps()));
  if (u.dim() != input_dim() || x0.size() != state_dim())
    throw std::invalid_argument(name() + ": input or state dimension mismatch");
  Matd s(horizon() + 1, state_dim());
  s.row(0) = x0.transpose();
  Vecd x = x0;
  for (Eigen::Index t = 0; t < horizon(); ++t) {
    x = step(x, u.input(t), diag);
    s.row(t + 1) = x.transpose();
  }
  return Trajectory(std::move(s));
}

Trajectory Environment::rollout_filtered(const Vecd& x0, const InputSequence& u, const InputFilter& filter,
                                         InputSequence* applied) const {
  if (!filter) {
    if (applied) *applied = u;
    return rollout(x0, u);
  }
  if (u.steps() != horizon()) throw std::invalid_argument(name() + ": wrong input length");
  Matd s(horizon() + 1, state_dim());
  Matd used(horizon(), input_dim());
  s.row(0) = x0.transpose();
  Vecd x = x0;
  for (Eigen::Index t = 0; t < horizon(); ++t) {
    Vecd ut = filter(t, x, u.input(t));
    const double lim = input_limit();
    ut = ut.cwiseMax(-lim).cwiseMin(lim);
    used.row(t) = ut.transpose();
    x = step(x, ut);
    s.row(t + 1) = x.transpose();
  }
  if (applied) *applied = InputSequence(std::move(used));
  return Trajectory(std::move(s));
}

// ---------------------------------------------------------------- Lavaworld

void LavaworldSpec::validate() const {
  auto inside = [](const Vecd& p) {
    return p.size() == 2 && (p.array() >= 0.0).all() && (p.array() <= 1.0).all();
  };
  if (!inside(start) || !inside(goal)) throw std::invalid_argument("lavaworld: start/goal outside the unit square");
  if (lava_center.size() != 2) throw std::invalid_argument("lavaworld: lava centre must be 2-D");
  if (!(lava_radius > 0.0)) throw std::invalid_argument("lavaworld: lava radius must be positive");
  if ((start - lava_center).norm() <= lava_radius || (goal - lava_center).norm() <= lava_radius)
    throw std::invalid_argument("lavaworld: start/goal inside the lava");
  if (!(lava_width > 0.0) || !(input_limit > 0.0)) throw std::invalid_argument("lavaworld: bad width/limit");
  if (horizon < 2) throw std::invalid_argument("lavaworld: horizon must be >= 2");
}

namespace {

std::vector<RewardHypothesis> make_hypotheses(std::initializer_list<std::pair<const char*, Eigen::Vector3d>> raw) {
  std::vector<RewardHypothesis> out;
  for (const auto& [label, w] : raw) out.push_back(RewardHypothesis{Vecd(w), label}.normalized());
  return out;
}

}  // namespace

Lavaworld::Lavaworld(LavaworldSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  // Weights over (-path length, -lava proximity, -goal distance).
  hypotheses_ = make_hypotheses({
      {"avoid-lava", {1.0, 0.5, 2.0}},
      {"ignore-lava", {1.0, 0.0, 2.0}},
      {"seek-lava", {1.0, -0.5, 2.0}},
      {"slight-lava", {1.0, 0.2, 2.0}},
      {"fear-lava", {1.0, 1.5, 2.0}},
      {"no-goal", {1.0, 0.5, 0.0}},
      {"wander", {-0.5, 0.5, 2.0}},
      {"lava-only", {0.0, 1.0, 1.0}},
  });
}

Vecd Lavaworld::step(const Vecd& x, const Vecd& u, RolloutDiagnostics* diag) const {
  const double lim = spec_.input_limit;
  Vecd uc = u.cwiseMax(-lim).cwiseMin(lim);
  if (diag && uc != u) ++diag->clamped_inputs;
  Vecd next = x + uc;
  Vecd clamped = next.cwiseMax(0.0).cwiseMin(1.0);
  if (diag && clamped != next) ++diag->clamped_states;
  return clamped;
}

LinearRollout Lavaworld::linear_model(const Vecd& x0) const { return integrator_rollout(x0, spec_.horizon); }

FeatureVector Lavaworld::features(const Trajectory& xi) const {
  double length = 0.0, lava = 0.0;
  for (Eigen::Index t = 0; t + 1 < xi.length(); ++t)
    length += (xi.states().row(t + 1) - xi.states().row(t)).norm();
  for (Eigen::Index t = 1; t < xi.length(); ++t) {
    const double d2 = (xi.state(t) - spec_.lava_center).squaredNorm();
    lava += std::exp(-d2 / spec_.lava_width);
  }
  const double goal = (xi.state(xi.horizon()) - spec_.goal).norm();
  return Eigen::Vector3d(-length, -lava, -goal);
}

std::pair<FeatureVector, FeatureVector> Lavaworld::feature_bounds() const {
  const double T = static_cast<double>(spec_.horizon);
  Vecd lo = Eigen::Vector3d(-T * spec_.input_limit * std::sqrt(2.0), -T, -std::sqrt(2.0));
  Vecd hi = Vecd::Zero(3);
  return {lo, hi};
}

InputSequence Lavaworld::nominal_inputs() const {
  Matd u(spec_.horizon, 2);
  Vecd x = spec_.start;
  for (Eigen::Index t = 0; t < spec_.horizon; ++t) {
    u.row(t) = greedy_input(x, 0.0, spec_.input_limit, 0.0).transpose();
    x = step(x, u.row(t).transpose());
  }
  return InputSequence(std::move(u));
}

InputSequence Lavaworld::random_inputs(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.02);
  const Eigen::Index T = spec_.horizon;
  const Vecd waypoint = Eigen::Vector2d(0.05 + 0.9 * unit(rng), 0.05 + 0.9 * unit(rng));
  const auto lo = std::min<Eigen::Index>(2, T - 1);
  const Eigen::Index switch_at = lo + static_cast<Eigen::Index>(unit(rng) * static_cast<double>(T - lo));
  const double lim = spec_.input_limit;
  const double speed1 = lim * (0.3 + 0.7 * unit(rng));
  const double speed2 = lim * (0.3 + 0.7 * unit(rng));
  Matd u(T, 2);
  Vecd x = spec_.start;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vecd target = t < switch_at ? waypoint : spec_.goal;
    const double speed = t < switch_at ? speed1 : speed2;
    Vecd dir = target - x;
    const double dist = dir.norm();
    Vecd ut = dist > 1e-12 ? Vecd(dir * (std::min(speed, dist) / dist)) : Vecd(Vecd::Zero(2));
    ut(0) += noise(rng);
    ut(1) += noise(rng);
    ut = ut.cwiseMax(-lim).cwiseMin(lim);
    u.row(t) = ut.transpose();
    x = step(x, ut);
  }
  return InputSequence(std::move(u));
}

double Lavaworld::lava_clearance(const Vecd& x) const {
  return std::max(0.0, (x - spec_.lava_center).norm() - spec_.lava_radius);
}

Vecd Lavaworld::greedy_input(const Vecd& x, double gain, double speed, double visibility) const {
  Vecd to_goal = spec_.goal - x;
  const double dist = to_goal.norm();
  if (dist < 1e-12) return Vecd::Zero(2);
  Vecd heading = to_goal / dist;
  if (gain > 0.0 && lava_visible(x, visibility)) {
    Vecd away = x - spec_.lava_center;
    const double an = away.norm();
    away = an > 1e-12 ? Vecd(away / an) : Vecd(-heading);
    Vecd tangent(2);
    tangent << -away(1), away(0);
    // Go around on whichever side makes progress; counter-clockwise on a tie.
    if (tangent.dot(heading) < 0.0) tangent = -tangent;
    heading += gain * (away + tangent).normalized();
  }
  const double hn = heading.norm();
  if (hn < 1e-12) return Vecd::Zero(2);
  Vecd u = heading * (std::min(speed, dist) / hn);
  const double lim = spec_.input_limit;
  return u.cwiseMax(-lim).cwiseMin(lim);
}

// -------------------------------------------------------------- CoffeeWorld

void CoffeeWorldSpec::validate() const {
  if (start_x < 0.0 || start_x > 1.0 || goal_x < 0.0 || goal_x > 1.0)
    throw std::invalid_argument("coffeeworld: start/goal must lie in [0, 1]");
  if (coupling == 0.0) throw std::invalid_argument("coffeeworld: coupling must be nonzero");
  if (tilt_decay < 0.0 || tilt_decay >= 1.0) throw std::invalid_argument("coffeeworld: tilt decay must be in [0, 1)");
  if (!(spill_threshold > 0.0) || !(input_limit > 0.0)) throw std::invalid_argument("coffeeworld: bad threshold/limit");
  if (horizon < 2) throw std::invalid_argument("coffeeworld: horizon must be >= 2");
}

CoffeeWorld::CoffeeWorld(CoffeeWorldSpec spec) : spec_(spec) {
  spec_.validate();
  // Weights over (-goal distance, -total tilt, -spills).
  hypotheses_ = make_hypotheses({
      {"upright", {1.0, 0.5, 0.5}},
      {"ignore-tilt", {1.0, 0.0, 0.0}},
      {"like-tilt", {1.0, -0.5, 0.0}},
      {"spills-only", {1.0, 0.0, 0.5}},
      {"tilt-only", {1.0, 0.5, 0.0}},
      {"stay-put", {0.2, 1.0, 1.0}},
      {"like-spill", {1.0, 0.0, -0.5}},
      {"careless", {1.0, 0.1, 0.1}},
  });
}

Vecd CoffeeWorld::step(const Vecd& x, const Vecd& u, RolloutDiagnostics* diag) const {
  const double lim = spec_.input_limit;
  const double uc = std::clamp(u(0), -lim, lim);
  if (diag && uc != u(0)) ++diag->clamped_inputs;
  return Eigen::Vector2d(x(0) + uc, spec_.tilt_decay * x(1) + spec_.coupling * uc);
}

LinearRollout CoffeeWorld::linear_model(const Vecd& x0) const {
  const Eigen::Index T = spec_.horizon;
  LinearRollout g;
  g.steps = T;
  g.state_dim = 2;
  g.input_dim = 1;
  g.offset.resize(2 * (T + 1));
  g.map = Matd::Zero(2 * (T + 1), T);
  for (Eigen::Index t = 0; t <= T; ++t) {
    g.offset(2 * t) = x0(0);
    g.offset(2 * t + 1) = std::pow(spec_.tilt_decay, static_cast<double>(t)) * x0(1);
    for (Eigen::Index s = 0; s < t; ++s) {
      g.map(2 * t, s) = 1.0;
      g.map(2 * t + 1, s) = spec_.coupling * std::pow(spec_.tilt_decay, static_cast<double>(t - 1 - s));
    }
  }
  return g;
}

FeatureVector CoffeeWorld::features(const Trajectory& xi) const {
  const double goal = std::abs(xi.states()(xi.horizon(), 0) - spec_.goal_x);
  double tilt = 0.0, spills = 0.0;
  for (Eigen::Index t = 0; t < xi.length(); ++t) {
    const double phi = std::abs(xi.states()(t, 1));
    tilt += phi;
    if (phi > spec_.spill_threshold) spills += 1.0;
  }
  return Eigen::Vector3d(-goal, -tilt, -spills);
}

std::pair<FeatureVector, FeatureVector> CoffeeWorld::feature_bounds() const {
  const double T = static_cast<double>(spec_.horizon);
  const double max_tilt = std::abs(spec_.coupling) * spec_.input_limit / (1.0 - spec_.tilt_decay);
  Vecd lo = Eigen::Vector3d(-(std::abs(spec_.goal_x - spec_.start_x) + T * spec_.input_limit),
                            -(T + 1.0) * max_tilt, -(T + 1.0));
  Vecd hi = Vecd::Zero(3);
  return {lo, hi};
}

InputSequence CoffeeWorld::nominal_inputs() const {
  const double u = (spec_.goal_x - spec_.start_x) / static_cast<double>(spec_.horizon);
  return InputSequence(Matd::Constant(spec_.horizon, 1, std::clamp(u, -spec_.input_limit, spec_.input_limit)));
}

InputSequence CoffeeWorld::random_inputs(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  const Eigen::Index T = spec_.horizon;
  const double travel = (spec_.goal_x - spec_.start_x) * (0.5 + 0.7 * unit(rng));
  const double pause_prob = 0.5 * unit(rng);
  const double bias = 2.0 * unit(rng);
  Vecd w(T);
  for (Eigen::Index t = 0; t < T; ++t)
    w(t) = unit(rng) < pause_prob ? 0.0 : std::max(0.0, bias + n01(rng));
  if (w.sum() <= 0.0) w(T - 1) = 1.0;
  Vecd u = w * (travel / w.sum());
  u = u.cwiseMax(-spec_.input_limit).cwiseMin(spec_.input_limit);
  return InputSequence(Matd(u));
}

double CoffeeWorld::tilt_lower_bound(double u_min) const {
  const double per_step = std::abs(spec_.goal_x - spec_.start_x) / static_cast<double>(spec_.horizon);
  return std::abs(spec_.coupling) * std::max(u_min, per_step);
}

// ------------------------------------------------------------------ registry

std::vector<std::string> environment_names() { return {"lavaworld", "coffeeworld"}; }

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "lavaworld") return std::make_unique<Lavaworld>();
  if (name == "coffeeworld") return std::make_unique<CoffeeWorld>();
  throw std::invalid_argument("unknown environment '" + name + "' (expected lavaworld or coffeeworld)");
}

// ---------------------------------------------------------------- search

Trajectory optimize_inputs(const Environment& env, const RewardHypothesis& theta, std::uint64_t seed,
                           const InputFilter& filter, const HillClimbConfig& cfg) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vecd x0 = env.start_state();
  const Eigen::Index T = env.horizon(), m = env.input_dim();
  const double lim = env.input_limit();

  auto evaluate = [&](const InputSequence& u, InputSequence& applied) {
    Trajectory xi = env.rollout_filtered(x0, u, filter, &applied);
    return std::make_pair(reward(theta, env.features(xi)), std::move(xi));
  };

  std::optional<Trajectory> best;
  double best_r = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, cfg.restarts); ++restart) {
    InputSequence u = restart == 0 ? env.nominal_inputs() : env.random_inputs(rng);
    InputSequence applied = u;
    auto [r, xi] = evaluate(u, applied);
    u = applied;
    for (int it = 0; it < cfg.iterations; ++it) {
      const double frac = static_cast<double>(it) / std::max(1, cfg.iterations - 1);
      const double scale = 0.5 * lim * std::pow(0.01, frac);
      Matd p = u.inputs();
      if (unit(rng) < 0.5) {
        const auto t = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(T)) % T;
        for (Eigen::Index j = 0; j < m; ++j) p(t, j) += scale * n01(rng);
      } else {
        for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += scale * n01(rng);
      }
      p = p.cwiseMax(-lim).cwiseMin(lim);
      InputSequence cand(std::move(p));
      InputSequence cand_applied = cand;
      auto [rc, xc] = evaluate(cand, cand_applied);
      if (rc > r) {
        r = rc;
        xi = std::move(xc);
        u = std::move(cand_applied);
      }
    }
    if (r > best_r) {
      best_r = r;
      best = std::move(xi);
    }
  }
  return *best;
}

Trajectory random_rollout(const Environment& env, Rng& rng) { return env.rollout(env.random_inputs(rng)); }

ChoiceSet candidate_bank(const Environment& env, int size, std::uint64_t seed) {
  const auto& hyps = env.hypotheses();
  if (size < static_cast<int>(hyps.size()))
    throw std::invalid_argument("candidate_bank: size must be at least the number of hypotheses");
  ChoiceSet bank;
  for (std::size_t h = 0; h < hyps.size(); ++h) {
    const std::uint64_t s = derive_seed(seed, {1, h});
    bank.insert(optimize_inputs(env, hyps[h], s), {"optimum", -1, static_cast<double>(h), s});
  }
  Rng rng(derive_seed(seed, {2}));
  const std::size_t target = static_cast<std::size_t>(size);
  for (std::size_t attempts = 0; bank.size() < target && attempts < 100 * target; ++attempts)
    bank.insert(random_rollout(env, rng), {"random", -1, 0.0, seed});
  return bank;
}

}  // namespace inclusive
