#include "inclusive/simhuman.hpp"

#include "inclusive/random.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace inclusive {

std::string limitation_name(const Limitation& l) {
  if (std::holds_alternative<Visibility>(l)) return "visibility";
  if (std::holds_alternative<MinInput>(l)) return "min_input";
  return "none";
}

void TeacherSpec::validate() const {
  if (true_theta.weights.size() == 0) throw std::invalid_argument("teacher: empty true_theta");
  if (choice_set_size < 2) throw std::invalid_argument("teacher: choice_set_size must be >= 2");
  if (const auto* v = std::get_if<Visibility>(&limitation); v && !(v->radius > 0.0))
    throw std::invalid_argument("teacher: visibility radius must be > 0");
  if (const auto* m = std::get_if<MinInput>(&limitation)) {
    if (!(m->u_min > 0.0)) throw std::invalid_argument("teacher: u_min must be > 0");
    if (m->u_max != 0.0 && !(m->u_max >= m->u_min)) throw std::invalid_argument("teacher: u_max must be >= u_min");
  }
}

InputFilter limitation_filter(const Environment& env, const Limitation& limitation) {
  if (const auto* vis = std::get_if<Visibility>(&limitation)) {
    const auto* lava = dynamic_cast<const Lavaworld*>(&env);
    if (!lava) throw std::invalid_argument("visibility limitation requires lavaworld, got " + env.name());
    // Until the lava has come into view the teacher heads straight for the
    // goal at full speed; afterwards any input is possible.
    auto seen = std::make_shared<bool>(false);
    const double radius = vis->radius;
    return [lava, radius, seen](Eigen::Index t, const Vecd& x, const Vecd& proposed) -> Vecd {
      if (t == 0) *seen = false;
      if (lava->lava_visible(x, radius)) *seen = true;
      if (*seen) return proposed;
      return lava->greedy_input(x, 0.0, lava->input_limit(), radius);
    };
  }
  if (const auto* mi = std::get_if<MinInput>(&limitation)) {
    const double u_min = mi->u_min;
    const double u_max = mi->u_max > 0.0 ? mi->u_max : std::numeric_limits<double>::infinity();
    return [u_min, u_max](Eigen::Index, const Vecd&, const Vecd& proposed) -> Vecd {
      const double n = proposed.norm();
      if (n > u_max) return proposed * (u_max / n);
      if (n >= u_min) return proposed;
      if (n < 0.5 * u_min) return Vecd::Zero(proposed.size());
      return proposed * (u_min / n);
    };
  }
  return nullptr;
}

Trajectory teacher_optimum(const Environment& env, const TeacherSpec& teacher, std::uint64_t seed) {
  teacher.validate();
  return optimize_inputs(env, teacher.true_theta, derive_seed(seed, {7}), limitation_filter(env, teacher.limitation));
}

ChoiceSet build_human_choice_set(const Environment& env, const TeacherSpec& teacher, std::uint64_t seed) {
  teacher.validate();
  const auto target = static_cast<std::size_t>(teacher.choice_set_size);
  ChoiceSet set;
  set.insert(teacher_optimum(env, teacher, seed), {"teacher-optimum", -1, 0.0, seed});

  // What the teacher would have shown for each candidate reward, under the
  // same limitation.
  const InputFilter limited = limitation_filter(env, teacher.limitation);
  const auto& hyps = env.hypotheses();
  for (std::size_t h = 0; h < hyps.size() && set.size() < target; ++h)
    if (hyps[h].weights != teacher.true_theta.weights)
      set.insert(optimize_inputs(env, hyps[h], derive_seed(seed, {9, h}), limited),
                 {"limited-optimum", static_cast<int>(h), 0.0, seed});

  Rng rng(derive_seed(seed, {8}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vecd x0 = env.start_state();

  if (const auto* vis = std::get_if<Visibility>(&teacher.limitation)) {
    const auto& lava = dynamic_cast<const Lavaworld&>(env);
    auto plan = [&](double gain, double speed) {
      Matd u(env.horizon(), 2);
      Vecd x = x0;
      for (Eigen::Index t = 0; t < env.horizon(); ++t) {
        u.row(t) = lava.greedy_input(x, gain, speed, vis->radius).transpose();
        x = env.step(x, u.row(t).transpose());
      }
      return env.rollout(x0, InputSequence(std::move(u)));
    };
    const double lim = env.input_limit();
    for (double speed : {1.0, 0.75, 0.5})
      for (double gain : {0.0, 0.5, 1.0, 2.0}) {
        if (set.size() >= target) break;
        set.insert(plan(gain, speed * lim), {"greedy", -1, gain, seed});
      }
    for (std::size_t attempts = 0; set.size() < target && attempts < 100 * target; ++attempts) {
      const double gain = 2.5 * unit(rng);
      set.insert(plan(gain, (0.4 + 0.6 * unit(rng)) * lim), {"greedy", -1, gain, seed});
    }
  } else {
    for (std::size_t attempts = 0; set.size() < target && attempts < 100 * target; ++attempts)
      set.insert(env.rollout_filtered(x0, env.random_inputs(rng), limited), {"limited-random", -1, 0.0, seed});
  }

  if (set.size() < target)
    throw std::runtime_error("build_human_choice_set: only produced " + std::to_string(set.size()) + " of " +
                             std::to_string(target) + " requested trajectories");
  return set;
}

std::size_t sample_boltzmann(const Vecd& rewards, double beta, Rng& rng) {
  const Vecd p = boltzmann_probabilities(rewards, beta);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    cum += p(i);
    if (u < cum) return static_cast<std::size_t>(i);
  }
  // Rounding left u above the final cumulative sum: take the last index with mass.
  for (Eigen::Index i = p.size() - 1; i >= 0; --i)
    if (p(i) > 0.0) return static_cast<std::size_t>(i);
  return 0;
}

DemonstrationSet sample_demonstrations(const ChoiceSet& choice_set_h, const TeacherSpec& teacher, int n,
                                       const FeatureMap& features, std::uint64_t seed) {
  if (choice_set_h.empty()) throw std::invalid_argument("sample_demonstrations: empty choice set");
  if (n < 1) throw std::invalid_argument("sample_demonstrations: n must be >= 1");
  const Vecd r = rewards(teacher.true_theta, feature_matrix(choice_set_h, features));
  Rng rng(seed);
  std::vector<Trajectory> demos;
  demos.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) demos.push_back(choice_set_h[sample_boltzmann(r, teacher.beta_h.beta(), rng)]);
  return DemonstrationSet(std::move(demos));
}

double prop4_bound(int choice_size, Rationality beta, int n) {
  if (choice_size < 2) throw std::invalid_argument("prop4_bound: choice set needs at least 2 members");
  if (n < 1) throw std::invalid_argument("prop4_bound: n must be >= 1");
  // 1 - [(|C|-2+e^b)/(|C|-1+e^b)]^N = 1 - (1 - 1/(|C|-1+e^b))^N
  const double pick = 1.0 / (static_cast<double>(choice_size) - 1.0 + std::exp(beta.beta()));
  return -std::expm1(static_cast<double>(n) * std::log1p(-pick));
}

Vecd minmax_normalize(const Vecd& rewards) {
  if (rewards.size() == 0) throw std::invalid_argument("minmax_normalize: empty rewards");
  const double lo = rewards.minCoeff(), hi = rewards.maxCoeff();
  if (!(hi > lo)) throw std::invalid_argument("minmax_normalize: all rewards are equal");
  return ((rewards.array() - lo) / (hi - lo)).matrix();
}

MonteCarloEstimate demonstration_probability(const Vecd& rewards, std::size_t target, Rationality beta, int n,
                                             int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte carlo: trials must be >= 1");
  if (n < 1) throw std::invalid_argument("monte carlo: n must be >= 1");
  if (target >= static_cast<std::size_t>(rewards.size())) throw std::invalid_argument("monte carlo: bad target");
  const Vecd r = minmax_normalize(rewards);
  long hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(trial)}));
    for (int d = 0; d < n; ++d)
      if (sample_boltzmann(r, beta.beta(), rng) == target) {
        ++hits;
        break;
      }
  }
  MonteCarloEstimate est;
  est.trials = trials;
  est.probability = static_cast<double>(hits) / static_cast<double>(trials);
  est.sigma = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(trials));
  return est;
}

MonteCarloEstimate prop4_monte_carlo(int choice_size, Rationality beta, int n, int trials, std::uint64_t seed) {
  if (choice_size < 2) throw std::invalid_argument("prop4_monte_carlo: choice set needs at least 2 members");
  Vecd r = Vecd::Zero(choice_size);
  r(0) = 1.0;
  return demonstration_probability(r, 1, beta, n, trials, seed);
}

}  // namespace inclusive
