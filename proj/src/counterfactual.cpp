#include "inclusive/counterfactual.hpp"

#include "inclusive/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace inclusive {

Matd deformation_matrix(Eigen::Index horizon) {
  if (horizon < 1) throw std::invalid_argument("deformation_matrix: horizon must be >= 1");
  Matd a = Matd::Zero(horizon + 1, horizon + 1);
  const Eigen::Index n = horizon - 1;
  if (n == 0) return a;
  Matd r = Matd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = -2.0;
    if (i > 0) r(i, i - 1) = 1.0;
    if (i + 1 < n) r(i, i + 1) = 1.0;
  }
  const Matd k = r.transpose() * r;
  Matd k_inv = k.ldlt().solve(Matd::Identity(n, n));
  Eigen::SelfAdjointEigenSolver<Matd> eig(k_inv, Eigen::EigenvaluesOnly);
  k_inv /= eig.eigenvalues().cwiseAbs().maxCoeff();
  a.block(1, 1, n, n) = k_inv;
  return a;
}

DeformationSpec DeformationSpec::smooth(Eigen::Index horizon, double sigma_scale, int count) {
  return {deformation_matrix(horizon), sigma_scale, count};
}

void DeformationSpec::validate() const {
  if (shape.rows() != shape.cols() || shape.rows() < 2)
    throw std::invalid_argument("deformation: shape must be square with at least 2 rows");
  if (!shape.allFinite()) throw std::invalid_argument("deformation: shape must be finite");
  if (!shape.row(0).isZero(0.0) || !shape.row(shape.rows() - 1).isZero(0.0))
    throw std::invalid_argument("deformation: endpoint rows of the shape must be zero");
  if (!(sigma_scale >= 0.0)) throw std::invalid_argument("deformation: sigma_scale must be >= 0");
  if (count < 1) throw std::invalid_argument("deformation: count must be >= 1");
}

std::vector<Trajectory> deform_noisy(const Trajectory& xi, const DeformationSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.shape.rows() != xi.length())
    throw std::invalid_argument("deform_noisy: shape does not match the trajectory length");
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int c = 0; c < spec.count; ++c) {
    Matd sigma(xi.length(), xi.dim());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) sigma.data()[i] = spec.sigma_scale * n01(rng);
    out.emplace_back(xi.states() + spec.shape * sigma);
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("solver: lambda must be > 0");
  if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
  if (step && !(*step > 0.0)) throw std::invalid_argument("solver: step must be > 0");
}

Vecd prox_squared_l1(const Vecd& v, double weight) {
  const Eigen::Index n = v.size();
  if (n == 0 || weight <= 0.0) return v;
  std::vector<double> a(v.data(), v.data() + n);
  for (double& x : a) x = std::abs(x);
  std::sort(a.begin(), a.end(), std::greater<>());
  if (a.front() == 0.0) return Vecd::Zero(n);
  // With k active entries the L1 norm of the result is s = (sum of the k
  // largest |v|) / (1 + 2 w k) and the shrinkage threshold is 2 w s.
  double prefix = 0.0, tau = 0.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    prefix += a[static_cast<std::size_t>(k - 1)];
    const double s = prefix / (1.0 + 2.0 * weight * static_cast<double>(k));
    tau = 2.0 * weight * s;
    const bool last = k == n || a[static_cast<std::size_t>(k)] <= tau;
    if (a[static_cast<std::size_t>(k - 1)] > tau && last) break;
  }
  Vecd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::max(std::abs(v(i)) - tau, 0.0);
    out(i) = v(i) < 0.0 ? -mag : mag;
  }
  return out;
}

namespace {

void check_shapes(const Trajectory& xi, const LinearRollout& g) {
  if (xi.horizon() != g.steps || xi.dim() != g.state_dim)
    throw std::invalid_argument("solver: trajectory does not match the rollout map");
}

/// Forward differences u^t - u^{t-1}, t = 1..T-1, as a matrix on vec(U).
Matd difference_operator(Eigen::Index steps, Eigen::Index m) {
  Matd d = Matd::Zero(std::max<Eigen::Index>(steps - 1, 0) * m, steps * m);
  for (Eigen::Index t = 1; t < steps; ++t)
    for (Eigen::Index j = 0; j < m; ++j) {
      d((t - 1) * m + j, t * m + j) = 1.0;
      d((t - 1) * m + j, (t - 1) * m + j) = -1.0;
    }
  return d;
}

double largest_eigenvalue(const Matd& sym) {
  Vecd v = Vecd::Ones(sym.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += 0.01 * static_cast<double>(i);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vecd w = sym * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / n;
    if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

double sparse_objective(const Trajectory& xi, const LinearRollout& g, const Vecd& u, double lambda) {
  const double l1 = u.lpNorm<1>();
  return (g.flatten(xi) - g.apply_flat(u)).squaredNorm() + lambda * l1 * l1;
}

double consistent_objective(const Trajectory& xi, const LinearRollout& g, const Vecd& u, double lambda) {
  const Matd d = difference_operator(g.steps, g.input_dim);
  return (g.flatten(xi) - g.apply_flat(u)).squaredNorm() + lambda * (d * u).squaredNorm();
}

SolveResult solve_sparse_inputs(const Trajectory& xi, const LinearRollout& g, const SolverConfig& cfg) {
  cfg.validate();
  check_shapes(xi, g);
  const Vecd target = g.flatten(xi) - g.offset;
  const Matd gtg = g.map.transpose() * g.map;
  const Vecd gtr = g.map.transpose() * target;
  const double lipschitz = 2.0 * largest_eigenvalue(gtg);
  const double step = cfg.step ? *cfg.step : (lipschitz > 0.0 ? 1.0 / lipschitz : 1.0);

  auto objective = [&](const Vecd& u) {
    const double l1 = u.lpNorm<1>();
    return (target - g.map * u).squaredNorm() + cfg.lambda * l1 * l1;
  };

  // Start from the unpenalized least-squares fit.
  Eigen::LDLT<Matd> ls(gtg);
  Vecd u = ls.info() == Eigen::Success ? Vecd(ls.solve(gtr)) : Vecd(Vecd::Zero(g.map.cols()));
  if (!u.allFinite()) u.setZero();
  double f = objective(u);
  Vecd best = u;
  double best_f = f;
  std::vector<double> trace{f};
  bool converged = false;
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    const Vecd grad = 2.0 * (gtg * u - gtr);
    Vecd next = prox_squared_l1(u - step * grad, step * cfg.lambda);
    const double change = (next - u).lpNorm<Eigen::Infinity>();
    u = std::move(next);
    f = objective(u);
    trace.push_back(f);
    if (f < best_f) {
      best_f = f;
      best = u;
    }
    if (change <= cfg.tol) {
      converged = true;
      break;
    }
  }
  InputSequence inputs = InputSequence::from_flat(best, g.steps, g.input_dim);
  Trajectory traj = g.apply(inputs);
  SolveResult res{std::move(inputs), std::move(traj)};
  res.objective = best_f;
  res.iterations = it;
  res.converged = converged;
  res.objective_trace = std::move(trace);
  return res;
}

SolveResult solve_consistent_inputs(const Trajectory& xi, const LinearRollout& g, const SolverConfig& cfg) {
  cfg.validate();
  check_shapes(xi, g);
  const Vecd target = g.flatten(xi) - g.offset;
  const Matd d = difference_operator(g.steps, g.input_dim);
  const Matd q = g.map.transpose() * g.map + cfg.lambda * d.transpose() * d;
  const Vecd b = g.map.transpose() * target;
  Eigen::LLT<Matd> llt(q);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_consistent_inputs: normal equations are singular");
  Vecd u = llt.solve(b);
  // One step of iterative refinement tightens the residual for large lambda.
  u += llt.solve(b - q * u);
  const double grad_norm = (2.0 * (q * u - b)).norm();
  InputSequence inputs = InputSequence::from_flat(u, g.steps, g.input_dim);
  Trajectory traj = g.apply(inputs);
  SolveResult res{std::move(inputs), std::move(traj)};
  res.objective = (target - g.map * u).squaredNorm() + cfg.lambda * (d * u).squaredNorm();
  res.iterations = 1;
  res.gradient_norm = grad_norm;
  res.converged = grad_norm <= cfg.tol * std::max(1.0, b.norm());
  return res;
}

std::string generator_name(const Generator& g) {
  return std::visit(
      [](const auto& gen) -> std::string {
        using T = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<T, NoisyGenerator>) return "noisy";
        else if constexpr (std::is_same_v<T, SparseGenerator>) return "sparse";
        else return "consistent";
      },
      g);
}

std::vector<Generator> make_generators(const CounterfactualBudget& budget) {
  std::vector<Generator> out;
  if (budget.noisy > 0) out.push_back(NoisyGenerator{budget.sigma_scale, budget.noisy});
  for (double l : budget.sparse_lambdas) out.push_back(SparseGenerator{SolverConfig{l}});
  for (double l : budget.consistent_lambdas) out.push_back(ConsistentGenerator{SolverConfig{l}});
  return out;
}

std::vector<std::pair<Trajectory, Provenance>> generate_counterfactuals(
    const Trajectory& demo, int demo_index, const Generator& gen, std::size_t gen_index,
    const Environment& env, std::uint64_t seed) {
  const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(demo_index), gen_index});
  std::vector<std::pair<Trajectory, Provenance>> out;
  if (const auto* noisy = std::get_if<NoisyGenerator>(&gen)) {
    const auto spec = DeformationSpec::smooth(demo.horizon(), noisy->sigma_scale, noisy->count);
    auto trajs = deform_noisy(demo, spec, s);
    for (std::size_t i = 0; i < trajs.size(); ++i)
      out.emplace_back(std::move(trajs[i]), Provenance{"noisy", demo_index, static_cast<double>(i), s});
    return out;
  }
  const Vecd x0 = demo.state(0);
  const LinearRollout g = env.linear_model(x0);
  if (const auto* sparse = std::get_if<SparseGenerator>(&gen)) {
    const SolveResult r = solve_sparse_inputs(demo, g, sparse->solver);
    out.emplace_back(env.rollout(x0, r.inputs), Provenance{"sparse", demo_index, sparse->solver.lambda, s});
  } else {
    const auto& consistent = std::get<ConsistentGenerator>(gen);
    const SolveResult r = solve_consistent_inputs(demo, g, consistent.solver);
    out.emplace_back(env.rollout(x0, r.inputs), Provenance{"consistent", demo_index, consistent.solver.lambda, s});
  }
  return out;
}

ChoiceSet build_choice_set(const DemonstrationSet& demos, const std::vector<Generator>& generators,
                           const Environment& env, std::uint64_t seed) {
  ChoiceSet set;
  for (std::size_t i = 0; i < demos.size(); ++i) set.insert(demos[i], {"demo", static_cast<int>(i), 0.0, 0});
  for (std::size_t i = 0; i < demos.size(); ++i)
    for (std::size_t j = 0; j < generators.size(); ++j)
      for (auto& [traj, prov] : generate_counterfactuals(demos[i], static_cast<int>(i), generators[j], j, env, seed))
        set.insert(traj, std::move(prov));
  return set;
}

}  // namespace inclusive
