#include "inclusive/experiments.hpp"

#include "inclusive/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace inclusive {

std::string to_string(MethodId m) {
  switch (m) {
    case MethodId::ideal: return "ideal";
    case MethodId::birl: return "birl";
    case MethodId::noise: return "noise";
    case MethodId::ours: return "ours";
  }
  return "?";
}

MethodId parse_method(const std::string& name) {
  for (MethodId m : all_methods())
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "' (valid: ideal, birl, noise, ours)");
}

std::vector<MethodId> all_methods() { return {MethodId::ideal, MethodId::birl, MethodId::noise, MethodId::ours}; }

std::string to_string(InferenceMode m) { return m == InferenceMode::discrete ? "discrete" : "continuous"; }

InferenceMode parse_inference(const std::string& name) {
  if (name == "discrete") return InferenceMode::discrete;
  if (name == "continuous") return InferenceMode::continuous;
  throw std::invalid_argument("unknown inference mode '" + name + "' (valid: discrete, continuous)");
}

void ExperimentConfig::validate() const {
  const auto names = environment_names();
  if (std::find(names.begin(), names.end(), env) == names.end())
    throw std::invalid_argument("unknown environment '" + env + "' (valid: lavaworld, coffeeworld)");
  if (n_demos < 1) throw std::invalid_argument("n_demos must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (choice_set_size != 0 && choice_set_size < 2) throw std::invalid_argument("choice_set_size must be >= 2");
  if (teacher_beta && !(*teacher_beta >= 0.0)) throw std::invalid_argument("teacher beta must be >= 0");
  if (bank_size < 1) throw std::invalid_argument("bank_size must be >= 1");
  if (budget.noisy < 0) throw std::invalid_argument("noisy budget must be >= 0");
  for (double l : budget.sparse_lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("sparse lambdas must be > 0");
  for (double l : budget.consistent_lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("consistent lambdas must be > 0");
  mh.validate();
}

TeacherSpec make_teacher(const Environment& env, const ExperimentConfig& cfg, double beta_h) {
  TeacherSpec t;
  t.true_theta = env.true_theta();
  t.beta_h = Rationality(beta_h);
  if (env.name() == "lavaworld") {
    t.limitation = Visibility{cfg.visibility.value_or(0.1)};
    t.choice_set_size = cfg.choice_set_size > 0 ? cfg.choice_set_size : 20;
  } else {
    t.limitation = MinInput{cfg.u_min.value_or(0.08), cfg.u_max.value_or(0.1)};
    t.choice_set_size = cfg.choice_set_size > 0 ? cfg.choice_set_size : 30;
  }
  return t;
}

ChoiceSet choice_set_for(MethodId method, const DemonstrationSet& demos, const Environment& env,
                         const ChoiceSet& human_set, const ChoiceSet& bank, const CounterfactualBudget& budget,
                         std::uint64_t seed) {
  switch (method) {
    case MethodId::ideal: {
      ChoiceSet out = human_set;
      for (std::size_t i = 0; i < demos.size(); ++i) out.insert(demos[i], {"demo", static_cast<int>(i), 0.0, 0});
      return out;
    }
    case MethodId::birl: {
      ChoiceSet out;
      for (std::size_t i = 0; i < demos.size(); ++i) out.insert(demos[i], {"demo", static_cast<int>(i), 0.0, 0});
      for (std::size_t i = 0; i < human_set.size(); ++i) out.insert(human_set[i], human_set.provenance(i));
      for (std::size_t i = 0; i < bank.size(); ++i) out.insert(bank[i], bank.provenance(i));
      return out;
    }
    case MethodId::noise: {
      std::vector<Generator> gens;
      if (budget.noisy > 0) gens.push_back(NoisyGenerator{budget.sigma_scale, budget.noisy});
      return build_choice_set(demos, gens, env, seed);
    }
    case MethodId::ours: return build_choice_set(demos, make_generators(budget), env, seed);
  }
  throw std::invalid_argument("unknown method");
}

double risk_metric(const Belief& actual, const Belief& gold) {
  if (actual.size() != gold.size()) throw std::invalid_argument("risk_metric: beliefs over different hypothesis lists");
  for (std::size_t i = 0; i < actual.size(); ++i)
    if (actual.hypotheses()[i].weights != gold.hypotheses()[i].weights)
      throw std::invalid_argument("risk_metric: beliefs over different hypothesis lists");
  return shannon_entropy(actual) - shannon_entropy(gold);
}

std::size_t best_in(const Matd& bank_features, const Vecd& theta) {
  const Vecd r = bank_features.transpose() * theta;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < r.size(); ++i)
    if (r(i) > r(best)) best = i;
  return static_cast<std::size_t>(best);
}

ExperimentRecord run_cell(const ExperimentConfig& cfg, const Environment& env, double beta, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const double beta_h = cfg.teacher_beta.value_or(beta);
  const Rationality beta_r(beta);
  const TeacherSpec teacher = make_teacher(env, cfg, beta_h);
  const FeatureMap phi = env.feature_map();

  const ChoiceSet human = build_human_choice_set(env, teacher, derive_seed(seed, {11}));
  const DemonstrationSet demos = sample_demonstrations(human, teacher, cfg.n_demos, phi, derive_seed(seed, {12}));
  const ChoiceSet bank = candidate_bank(env, cfg.bank_size, derive_seed(seed, {13}));
  const ChoiceSet learner = choice_set_for(cfg.method, demos, env, human, bank, cfg.budget, derive_seed(seed, {14}));

  const Belief prior = Belief::uniform(env.hypotheses());
  const Belief belief = posterior(demos, learner, prior, beta_r, phi);
  const Belief gold = posterior(demos, human, prior, beta_r, phi);

  Vecd theta_hat;
  if (cfg.inference == InferenceMode::discrete) {
    theta_hat = env.hypotheses()[belief.map_index()].weights;
  } else {
    MhConfig mh = cfg.mh;
    mh.seed = derive_seed(seed, {15, mh.seed});
    theta_hat = mh_sample_posterior(demos, learner, beta_r, phi, mh).mean;
  }

  const Matd bank_phi = feature_matrix(bank, phi);
  const Vecd& theta_true = teacher.true_theta.weights;
  const std::size_t star = best_in(bank_phi, theta_true);
  const std::size_t robot = best_in(bank_phi, theta_hat);

  ExperimentRecord rec;
  rec.env = env.name();
  rec.method = to_string(cfg.method);
  rec.beta_h = beta_h;
  rec.beta_r = beta;
  rec.seed = seed;
  rec.n_demos = cfg.n_demos;
  rec.belief_true = belief.prob(env.true_index());
  rec.entropy = shannon_entropy(belief);
  rec.entropy_gold = shannon_entropy(gold);
  rec.risk = risk_metric(belief, gold);
  rec.regret = theta_true.dot(bank_phi.col(static_cast<Eigen::Index>(star)) -
                              bank_phi.col(static_cast<Eigen::Index>(robot)));
  rec.weight_error = weight_error(theta_true, theta_hat);
  rec.choice_set_size = static_cast<int>(learner.size());
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

DemonstrationSet cell_demonstrations(const ExperimentConfig& cfg, const Environment& env, double beta,
                                     std::uint64_t seed) {
  const TeacherSpec teacher = make_teacher(env, cfg, cfg.teacher_beta.value_or(beta));
  const ChoiceSet human = build_human_choice_set(env, teacher, derive_seed(seed, {11}));
  return sample_demonstrations(human, teacher, cfg.n_demos, env.feature_map(), derive_seed(seed, {12}));
}

std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& beta_grid, int jobs) {
  cfg.validate();
  if (beta_grid.empty()) throw std::invalid_argument("run_sweep: empty beta grid");
  const auto env = make_environment(cfg.env);

  std::vector<std::pair<double, std::uint64_t>> cells;
  for (double b : beta_grid)
    for (std::uint64_t s : cfg.seeds) cells.emplace_back(b, s);

  std::vector<ExperimentRecord> out(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::string error_context;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        out[i] = run_cell(cfg, *env, cells[i].first, cells[i].second);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (!first_error) {
          std::ostringstream msg;
          msg << "cell (beta=" << cells[i].first << ", seed=" << cells[i].second << "): " << e.what();
          error_context = msg.str();
          first_error = std::current_exception();
        }
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) throw std::runtime_error(error_context);

  std::sort(out.begin(), out.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.env, a.method, a.beta_h, a.beta_r, a.seed) <
           std::tie(b.env, b.method, b.beta_h, b.beta_r, b.seed);
  });
  return out;
}

// ------------------------------------------------------ proposition suite

namespace {

constexpr double kRationalBeta = 1e6;

/// Abstract trajectories whose second waypoint is their feature vector.
Trajectory point(const Vecd& features) {
  Matd s = Matd::Zero(2, features.size());
  s.row(1) = features.transpose();
  return Trajectory(std::move(s));
}

FeatureVector point_features(const Trajectory& xi) { return xi.state(1); }

Vecd random_unit(Rng& rng, Eigen::Index k) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (;;) {
    Vecd v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = n01(rng);
    if (v.norm() > 1e-6) return v.normalized();
  }
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Smallest gap between distinct rewards of any hypothesis on `pts`.
double min_reward_gap(const std::vector<RewardHypothesis>& hyps, const std::vector<Vecd>& pts) {
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& h : hyps) {
    std::vector<double> r;
    for (const auto& p : pts) r.push_back(h.weights.dot(p));
    std::sort(r.begin(), r.end());
    for (std::size_t i = 1; i < r.size(); ++i) gap = std::min(gap, r[i] - r[i - 1]);
  }
  return gap;
}

ChoiceSet set_of(const std::vector<Vecd>& pts) {
  ChoiceSet s;
  for (const auto& p : pts) s.insert(point(p));
  return s;
}

}  // namespace

PropositionFamily proposition1_family(std::uint64_t seed, int instances) {
  PropositionFamily fam{"P1 risk ordering H(over) <= H(ideal) <= H(under)"};
  fam.instances = instances;
  Rng rng(derive_seed(seed, {101}));
  std::normal_distribution<double> n01(0.0, 1.0);
  const Rationality beta(kRationalBeta);
  double worst_route_gap = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    const Eigen::Index k = uniform_int(rng, 2, 4);
    std::vector<RewardHypothesis> hyps;
    std::vector<Vecd> universe;
    do {
      hyps.clear();
      universe.clear();
      const int n_hyp = uniform_int(rng, 2, 6);
      for (int h = 0; h < n_hyp; ++h) hyps.push_back({random_unit(rng, k), "h" + std::to_string(h)});
      const int m = uniform_int(rng, 6, 14);
      for (int i = 0; i < m; ++i) {
        Vecd p(k);
        for (Eigen::Index j = 0; j < k; ++j) p(j) = n01(rng);
        universe.push_back(p);
      }
    } while (min_reward_gap(hyps, universe) < 1e-3);

    std::shuffle(universe.begin(), universe.end(), rng);
    const int m = static_cast<int>(universe.size());
    const int m_h = uniform_int(rng, 2, m - 2);
    const std::vector<Vecd> human(universe.begin(), universe.begin() + m_h);

    const auto true_h = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(hyps.size()) - 1));
    std::size_t demo_idx = 0;
    for (std::size_t i = 1; i < human.size(); ++i)
      if (hyps[true_h].weights.dot(human[i]) > hyps[true_h].weights.dot(human[demo_idx])) demo_idx = i;

    // C_under: the demo plus a random part of the rest of C_H.
    std::vector<Vecd> under{human[demo_idx]};
    for (std::size_t i = 0; i < human.size(); ++i)
      if (i != demo_idx && uniform_int(rng, 0, 1) == 1) under.push_back(human[i]);
    // C_over: C_H plus at least one more trajectory from the universe.
    const int extra = uniform_int(rng, 1, m - m_h);
    const std::vector<Vecd> over(universe.begin(), universe.begin() + m_h + extra);

    const int n_demos = uniform_int(rng, 1, 3);
    const DemonstrationSet demos(std::vector<Trajectory>(static_cast<std::size_t>(n_demos), point(human[demo_idx])));
    const Belief prior = Belief::uniform(hyps);

    auto entropy_pair = [&](const std::vector<Vecd>& pts) {
      const ChoiceSet set = set_of(pts);
      const Matd demo_phi = feature_matrix(demos, point_features);
      const Matd set_phi = feature_matrix(set, point_features);
      const Vecd logw = log_posterior_weights(demo_phi, set_phi, prior, beta.beta());
      const double direct = shannon_entropy(posterior(demos, set, prior, beta, point_features));
      return std::make_pair(direct, entropy_of_log_weights(logw));
    };
    const auto [h_over, h_over_log] = entropy_pair(over);
    const auto [h_ideal, h_ideal_log] = entropy_pair(human);
    const auto [h_under, h_under_log] = entropy_pair(under);
    worst_route_gap = std::max({worst_route_gap, std::abs(h_over - h_over_log), std::abs(h_ideal - h_ideal_log),
                                std::abs(h_under - h_under_log)});
    if (h_over > h_ideal + 1e-9 || h_ideal > h_under + 1e-9) ++fam.violations;
  }
  if (worst_route_gap > 1e-9) ++fam.violations;
  fam.passed = fam.violations == 0;
  std::ostringstream d;
  d << instances << " instances, " << fam.violations << " violations beyond 1e-9, entropy routes agree within "
    << (worst_route_gap <= 1e-9 ? "1e-9" : "NOT 1e-9");
  fam.detail = d.str();
  return fam;
}

PropositionFamily proposition2_family(std::uint64_t seed, int instances) {
  PropositionFamily fam{"P2 overestimation learns the wrong reward"};
  fam.instances = instances;
  Rng rng(derive_seed(seed, {102}));
  std::normal_distribution<double> n01(0.0, 1.0);
  const Rationality beta(kRationalBeta);
  double min_wrong = 1.0;
  for (int inst = 0; inst < instances; ++inst) {
    const Eigen::Index k = uniform_int(rng, 2, 4);
    Vecd t_true, t_wrong;
    do {
      t_true = random_unit(rng, k);
      t_wrong = random_unit(rng, k);
    } while (t_true.dot(t_wrong) > 0.9);
    const std::vector<RewardHypothesis> hyps{{t_true, "true"}, {t_wrong, "wrong"}};

    // The demo is the teacher's best in C_H; the extra trajectory is better
    // for the true reward but worse for the wrong one, so in C_R the demo is
    // only optimal for the wrong reward.
    Vecd demo(k);
    for (Eigen::Index j = 0; j < k; ++j) demo(j) = n01(rng);
    std::vector<Vecd> human{demo};
    const int others = uniform_int(rng, 1, 5);
    while (static_cast<int>(human.size()) <= others) {
      Vecd p = demo - (0.1 + std::abs(n01(rng))) * (t_true + t_wrong) + 0.05 * random_unit(rng, k);
      if (t_true.dot(p) < t_true.dot(demo) - 1e-3 && t_wrong.dot(p) < t_wrong.dot(demo) - 1e-3) human.push_back(p);
    }
    std::vector<Vecd> over = human;
    over.push_back(demo + (0.2 + std::abs(n01(rng))) * (t_true - t_wrong));

    const DemonstrationSet demos(std::vector<Trajectory>(static_cast<std::size_t>(uniform_int(rng, 1, 3)), point(demo)));
    const Belief b = posterior(demos, set_of(over), Belief::uniform(hyps), beta, point_features);
    min_wrong = std::min(min_wrong, b.prob(1));
    if (b.prob(1) < 0.99) ++fam.violations;
  }
  fam.passed = fam.violations == 0;
  std::ostringstream d;
  d << instances << " instances, minimum wrong-hypothesis mass " << min_wrong;
  fam.detail = d.str();
  return fam;
}

PropositionFamily proposition3_family(std::uint64_t seed, int instances) {
  PropositionFamily fam{"P3 singleton C_R returns the prior"};
  fam.instances = instances;
  Rng rng(derive_seed(seed, {103}));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const Rationality beta(kRationalBeta);
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    const Eigen::Index k = uniform_int(rng, 2, 4);
    const int n_hyp = uniform_int(rng, 2, 6);
    std::vector<RewardHypothesis> hyps;
    Vecd p(n_hyp);
    for (int h = 0; h < n_hyp; ++h) {
      hyps.push_back({random_unit(rng, k), "h" + std::to_string(h)});
      p(h) = unit(rng);
    }
    p /= p.sum();
    const Belief prior(hyps, p);
    Vecd demo(k);
    for (Eigen::Index j = 0; j < k; ++j) demo(j) = n01(rng);
    const DemonstrationSet demos(std::vector<Trajectory>(static_cast<std::size_t>(uniform_int(rng, 1, 5)), point(demo)));
    const Belief b = posterior(demos, set_of({demo}), prior, beta, point_features);
    const double dev = (b.probs() - prior.probs()).cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    if (dev > 1e-12) ++fam.violations;
  }
  fam.passed = fam.violations == 0;
  std::ostringstream d;
  d << instances << " instances, max |posterior - prior| = " << worst;
  fam.detail = d.str();
  return fam;
}

bool PropositionReport::all_passed() const {
  return std::all_of(families.begin(), families.end(), [](const auto& f) { return f.passed; });
}

std::string PropositionReport::to_text() const {
  std::ostringstream out;
  for (const auto& f : families) out << (f.passed ? "PASS " : "FAIL ") << f.name << ": " << f.detail << '\n';
  out << (all_passed() ? "all proposition families passed" : "proposition families FAILED") << '\n';
  return out.str();
}

PropositionReport proposition_suite(std::uint64_t seed) {
  return {{proposition1_family(seed), proposition2_family(seed), proposition3_family(seed)}};
}

}  // namespace inclusive
