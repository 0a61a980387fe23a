#pragma once

#include "inclusive/counterfactual.hpp"
#include "inclusive/environments.hpp"
#include "inclusive/inference.hpp"
#include "inclusive/simhuman.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace inclusive {

/// How the learner builds its choice set C_R.
enum class MethodId {
  ideal,  // C_H itself (simulation only)
  birl,   // candidate bank, C_H and the demos: C_R contains C_H
  noise,  // demos plus noisy deformations
  ours,   // demos plus noisy, sparse and consistent counterfactuals
};

std::string to_string(MethodId m);
/// Throws std::invalid_argument listing the valid names.
MethodId parse_method(const std::string& name);
std::vector<MethodId> all_methods();

enum class InferenceMode { discrete, continuous };

std::string to_string(InferenceMode m);
InferenceMode parse_inference(const std::string& name);

struct ExperimentConfig {
  std::string env = "lavaworld";
  MethodId method = MethodId::ours;
  InferenceMode inference = InferenceMode::discrete;
  std::optional<double> teacher_beta;  // fixed beta_h; by default beta_h = beta_r
  std::optional<double> visibility;    // lavaworld teacher limitation
  std::optional<double> u_min;         // coffeeworld teacher limitation
  std::optional<double> u_max;
  int choice_set_size = 0;             // 0: environment default
  int n_demos = 3;
  std::vector<std::uint64_t> seeds{0};
  CounterfactualBudget budget;
  int bank_size = 500;
  MhConfig mh;
  std::string output;

  void validate() const;
};

/// The simulated teacher an experiment uses in `env`: the environment's true
/// hypothesis plus its default limitation, overridable through `cfg`.
TeacherSpec make_teacher(const Environment& env, const ExperimentConfig& cfg, double beta_h);

struct ExperimentRecord {
  std::string env;
  std::string method;
  double beta_h = 0.0;
  double beta_r = 0.0;
  std::uint64_t seed = 0;
  int n_demos = 0;
  double belief_true = 0.0;
  double entropy = 0.0;
  double entropy_gold = 0.0;
  double risk = 0.0;
  double regret = 0.0;
  double weight_error = 0.0;
  int choice_set_size = 0;
  double wall_time_ms = 0.0;
};

/// C_R for `method`. `human_set` is C_H and `bank` the candidate bank.
ChoiceSet choice_set_for(MethodId method, const DemonstrationSet& demos, const Environment& env,
                         const ChoiceSet& human_set, const ChoiceSet& bank, const CounterfactualBudget& budget,
                         std::uint64_t seed);

/// H(actual) - H(gold) in nats: negative is risk-seeking, positive risk-averse.
double risk_metric(const Belief& actual, const Belief& gold);

/// Index of the bank member with the highest r_theta; ties go to the lowest index.
std::size_t best_in(const Matd& bank_features, const Vecd& theta);

/// One sweep cell. Deterministic in (cfg, beta, seed).
ExperimentRecord run_cell(const ExperimentConfig& cfg, const Environment& env, double beta, std::uint64_t seed);

/// The demonstrations run_cell samples for (cfg, beta, seed).
DemonstrationSet cell_demonstrations(const ExperimentConfig& cfg, const Environment& env, double beta,
                                     std::uint64_t seed);

/// Every (beta, seed) cell of `cfg.method`, sorted by (env, method, beta_h,
/// beta_r, seed). Cells run on up to `jobs` threads; results do not depend on
/// the thread count.
std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& beta_grid,
                                        int jobs = 1);

struct PropositionFamily {
  std::string name;
  bool passed = false;
  int instances = 0;
  int violations = 0;
  std::string detail;
};

struct PropositionReport {
  std::vector<PropositionFamily> families;

  bool all_passed() const;
  std::string to_text() const;
};

/// Risk ordering (P1), overestimation worst case (P2) and underestimation
/// worst case (P3) on constructed instances at beta = 1e6.
PropositionFamily proposition1_family(std::uint64_t seed, int instances = 100);
PropositionFamily proposition2_family(std::uint64_t seed, int instances = 20);
PropositionFamily proposition3_family(std::uint64_t seed, int instances = 20);
PropositionReport proposition_suite(std::uint64_t seed);

}  // namespace inclusive
