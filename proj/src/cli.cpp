#include "inclusive/cli.hpp"

#include "inclusive/experiments.hpp"
#include "inclusive/records.hpp"
#include "inclusive/serialization.hpp"
#include "inclusive/simhuman.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace inclusive::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("bad seed '" + s + "'");
  return v;
}

int default_jobs() {
  if (const char* env = std::getenv("INCLUSIVE_IRL_JOBS")) {
    int v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
      throw UsageError("INCLUSIVE_IRL_JOBS must be a positive integer, got '" + s + "'");
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RunOptions {
  std::string env = "lavaworld";
  std::vector<std::string> methods{"ours"};
  std::string inference = "discrete";
  std::vector<double> beta_grid{0.1, 0.5, 1, 2, 5, 10, 100};
  int n_demos = 3;
  std::string seeds = "0";
  std::string out = "results";
  int jobs = 0;
  double teacher_beta = -1.0;
  double visibility = -1.0;
  double u_min = -1.0;
  double u_max = -1.0;
  int choice_set_size = 0;
  int bank_size = 500;
  bool record_timing = false;
  bool save_demos = false;
  ExperimentConfig base;
};

int cmd_run(RunOptions& o, std::ostream& out) {
  ExperimentConfig cfg = o.base;
  cfg.env = o.env;
  cfg.n_demos = o.n_demos;
  cfg.choice_set_size = o.choice_set_size;
  cfg.bank_size = o.bank_size;
  cfg.output = o.out;
  try {
    cfg.inference = parse_inference(o.inference);
    cfg.seeds = parse_seeds(o.seeds);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.teacher_beta >= 0.0) cfg.teacher_beta = o.teacher_beta;
  if (o.visibility >= 0.0) cfg.visibility = o.visibility;
  if (o.u_min >= 0.0) cfg.u_min = o.u_min;
  if (o.u_max >= 0.0) cfg.u_max = o.u_max;
  const int jobs = o.jobs > 0 ? o.jobs : default_jobs();

  std::vector<MethodId> methods;
  try {
    for (const auto& m : o.methods) methods.push_back(parse_method(m));
    for (double b : o.beta_grid)
      if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("beta values must be finite and >= 0");
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::vector<ExperimentRecord> records;
  for (MethodId m : methods) {
    ExperimentConfig c = cfg;
    c.method = m;
    auto part = run_sweep(c, o.beta_grid, jobs);
    records.insert(records.end(), part.begin(), part.end());
  }
  std::sort(records.begin(), records.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.env, a.method, a.beta_h, a.beta_r, a.seed) <
           std::tie(b.env, b.method, b.beta_h, b.beta_r, b.seed);
  });

  namespace fs = std::filesystem;
  fs::create_directories(o.out);
  {
    std::ofstream csv(fs::path(o.out) / "records.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (fs::path(o.out) / "records.csv").string());
    write_records_csv(csv, records, o.record_timing);
  }
  {
    std::ofstream js(fs::path(o.out) / "config.json", std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + (fs::path(o.out) / "config.json").string());
    js << config_json(cfg, methods, o.beta_grid, jobs);
  }
  if (o.save_demos) {
    const auto env = make_environment(cfg.env);
    fs::create_directories(fs::path(o.out) / "demos");
    for (double b : o.beta_grid)
      for (auto s : cfg.seeds) {
        const std::string name = cfg.env + "_beta" + format_double(b) + "_seed" + std::to_string(s) + ".txt";
        save_demonstrations((fs::path(o.out) / "demos" / name).string(), cell_demonstrations(cfg, *env, b, s));
      }
  }

  for (const auto& r : records)
    out << r.env << ' ' << r.method << " beta_h=" << format_double(r.beta_h) << " beta_r=" << format_double(r.beta_r)
        << " seed=" << r.seed << " belief_true=" << r.belief_true << " entropy=" << r.entropy << " risk=" << r.risk
        << " regret=" << r.regret << " weight_error=" << r.weight_error << " |C_R|=" << r.choice_set_size << '\n';
  out << "wrote " << records.size() << " records to " << (fs::path(o.out) / "records.csv").string() << '\n';
  return 0;
}

struct Prop4Options {
  int choices = 2;
  double beta = 5.0;
  int n = 50;
  int trials = 20000;
  std::uint64_t seed = 0;
};

int cmd_prop4(const Prop4Options& o, std::ostream& out) {
  if (o.choices < 2) throw UsageError("--choices must be >= 2");
  if (o.n < 1) throw UsageError("--n must be >= 1");
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  if (!(o.beta >= 0.0) || !std::isfinite(o.beta)) throw UsageError("--beta must be finite and >= 0");
  const double bound = prop4_bound(o.choices, Rationality(o.beta), o.n);
  const auto mc = prop4_monte_carlo(o.choices, Rationality(o.beta), o.n, o.trials, o.seed);
  const double lo = std::max(0.0, mc.probability - 3.0 * mc.sigma);
  const double hi = std::min(1.0, mc.probability + 3.0 * mc.sigma);
  out << "choices=" << o.choices << " beta=" << format_double(o.beta) << " n=" << o.n << '\n';
  out << "bound " << bound << '\n';
  out << "monte_carlo " << mc.probability << " sigma " << mc.sigma << " trials " << mc.trials << '\n';
  out << "interval_3sigma [" << lo << ", " << hi << "] "
      << (bound >= lo && bound <= hi ? "contains" : "excludes") << " the bound\n";
  return 0;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto a = parse_u64(text.substr(0, dots));
    const auto b = parse_u64(text.substr(dots + 2));
    if (b < a) throw UsageError("empty seed range '" + text + "'");
    for (auto s = a;; ++s) {
      seeds.push_back(s);
      if (s == b) break;
    }
    return seeds;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    seeds.push_back(parse_u64(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reward learning from limited demonstrations with counterfactual choice sets", "inclusive-irl"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML config file; a [run] section holds run options by long name", false);
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Run a beta sweep and write records.csv and config.json");
  run->add_option("--env", ro.env, "Environment: lavaworld or coffeeworld")->capture_default_str();
  run->add_option("--method", ro.methods, "Methods: ideal, birl, noise, ours (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--inference", ro.inference, "discrete (MAP) or continuous (MH mean)")->capture_default_str();
  run->add_option("--beta-grid", ro.beta_grid, "Learner rationality values")->delimiter(',')->capture_default_str();
  run->add_option("--n-demos", ro.n_demos, "Demonstrations per cell")->capture_default_str();
  run->add_option("--seeds", ro.seeds, "Seeds: a..b, a,b,c or a single value")->capture_default_str();
  run->add_option("--out", ro.out, "Output directory")->capture_default_str();
  run->add_option("--jobs", ro.jobs, "Worker threads (default INCLUSIVE_IRL_JOBS or all cores)");
  run->add_option("--teacher-beta", ro.teacher_beta, "Fix beta_h; by default beta_h = beta_r");
  run->add_option("--visibility", ro.visibility, "Lavaworld teacher visibility radius");
  run->add_option("--u-min", ro.u_min, "CoffeeWorld teacher minimum input");
  run->add_option("--u-max", ro.u_max, "CoffeeWorld teacher maximum input (default: the input limit)");
  run->add_option("--choice-set-size", ro.choice_set_size, "|C_H| (0: environment default)");
  run->add_option("--bank-size", ro.bank_size, "Candidate bank size")->capture_default_str();
  run->add_option("--noisy", ro.base.budget.noisy, "Noisy deformations per demo")->capture_default_str();
  run->add_option("--sigma-scale", ro.base.budget.sigma_scale, "Noisy deformation scale")->capture_default_str();
  run->add_option("--sparse-lambdas", ro.base.budget.sparse_lambdas, "Sparse solver lambdas")->delimiter(',');
  run->add_option("--consistent-lambdas", ro.base.budget.consistent_lambdas, "Consistent solver lambdas")
      ->delimiter(',');
  run->add_option("--mh-burn-in", ro.base.mh.burn_in, "MH iterations discarded")->capture_default_str();
  run->add_option("--mh-samples", ro.base.mh.samples, "MH samples kept")->capture_default_str();
  run->add_option("--mh-thin", ro.base.mh.thin, "MH iterations per kept sample")->capture_default_str();
  run->add_option("--mh-step", ro.base.mh.step_scale, "MH proposal step")->capture_default_str();
  run->add_option("--mh-seed", ro.base.mh.seed, "Mixed into each cell's MH seed")->capture_default_str();
  run->add_flag("--record-timing", ro.record_timing, "Write measured wall_time_ms instead of 0");
  run->add_flag("--save-demos", ro.save_demos, "Also write each cell's demonstrations under <out>/demos");

  Prop4Options po;
  auto* prop4 = app.add_subcommand("prop4", "Demonstration-probability bound next to a Monte Carlo estimate");
  prop4->add_option("--choices", po.choices, "|C|")->capture_default_str();
  prop4->add_option("--beta", po.beta, "Teacher rationality")->capture_default_str();
  prop4->add_option("--n", po.n, "Number of demonstrations")->capture_default_str();
  prop4->add_option("--trials", po.trials, "Monte Carlo trials")->capture_default_str();
  prop4->add_option("--seed", po.seed)->capture_default_str();

  std::uint64_t props_seed = 0;
  auto* props = app.add_subcommand("props", "Run the proposition property suite");
  props->add_option("--seed", props_seed)->capture_default_str();

  auto* version = app.add_subcommand("version", "Print the version");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*run) return cmd_run(ro, out);
    if (*prop4) return cmd_prop4(po, out);
    if (*props) {
      const auto report = proposition_suite(props_seed);
      out << report.to_text();
      return report.all_passed() ? 0 : 1;
    }
    if (*version) {
      out << "inclusive-irl " << kVersion << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace inclusive::cli
