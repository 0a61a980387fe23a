#include "doctest.h"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "inclusive/inference.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace inclusive;
using fixtures::point;
using fixtures::point_features;

namespace {

RewardHypothesis hyp(double a, double b) { return {Eigen::Vector2d(a, b), ""}; }

}  // namespace

TEST_CASE("boltzmann likelihood examples") {
  ChoiceSet c;
  const Trajectory a = point(Eigen::Vector2d(1, 0));
  const Trajectory b = point(Eigen::Vector2d(0, 0));
  c.insert(a);
  c.insert(b);
  const auto th = hyp(1, 0);
  CHECK(boltzmann_likelihood(a, th, c, Rationality(0), point_features) == doctest::Approx(0.5));
  CHECK(boltzmann_likelihood(a, th, c, Rationality(1), point_features) ==
        doctest::Approx(std::exp(1.0) / (1 + std::exp(1.0))).epsilon(1e-12));
  CHECK(boltzmann_likelihood(a, th, c, Rationality(1), point_features) == doctest::Approx(0.731059).epsilon(1e-6));

  ChoiceSet single;
  single.insert(b);
  CHECK(boltzmann_likelihood(b, th, single, Rationality(37), point_features) == 1.0);

  CHECK_THROWS_AS(boltzmann_likelihood(point(Eigen::Vector2d(5, 5)), th, c, Rationality(1), point_features),
                  std::invalid_argument);
  CHECK_THROWS_AS(boltzmann_likelihood(a, th, ChoiceSet{}, Rationality(1), point_features), std::invalid_argument);
  CHECK_THROWS_AS(Rationality(-1), std::invalid_argument);
}

TEST_CASE("boltzmann probabilities survive huge beta") {
  const Vecd p = boltzmann_probabilities(Eigen::Vector3d(1, 0.5, 0), 1e6);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p.allFinite());
}

TEST_CASE("posterior examples") {
  const Trajectory xi = point(Eigen::Vector2d(1, 0));
  const Trajectory xi2 = point(Eigen::Vector2d(0, 1));
  ChoiceSet c;
  c.insert(xi);
  c.insert(xi2);
  const DemonstrationSet d({xi});
  const Belief prior = Belief::uniform({hyp(1, 0), hyp(0, 1)});

  SUBCASE("shared denominators cancel") {
    const Belief b = posterior(d, c, prior, Rationality(5), point_features);
    CHECK(b.prob(0) == doctest::Approx(std::exp(5.0) / (1 + std::exp(5.0))).epsilon(1e-12));
    CHECK(b.prob(0) == doctest::Approx(0.99331).epsilon(1e-5));
    CHECK(b.map_index() == 0);
  }
  SUBCASE("singleton set returns the prior") {
    ChoiceSet single;
    single.insert(xi);
    const Belief skewed({hyp(1, 0), hyp(0, 1)}, Eigen::Vector2d(0.3, 0.7));
    const Belief b = posterior(d, single, skewed, Rationality(1e6), point_features);
    CHECK(b.prob(0) == 0.3);
    CHECK(b.prob(1) == 0.7);
  }
  SUBCASE("beta zero returns the prior") {
    const Belief skewed({hyp(1, 0), hyp(0, 1)}, Eigen::Vector2d(0.2, 0.8));
    const Belief b = posterior(d, c, skewed, Rationality(0), point_features);
    CHECK(b.prob(0) == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("demo outside the set is rejected") {
    CHECK_THROWS_AS(posterior(DemonstrationSet({point(Eigen::Vector2d(3, 3))}), c, prior, Rationality(1),
                              point_features),
                    std::invalid_argument);
  }
}

TEST_CASE("zero posterior mass names beta") {
  const Vecd lw = Vecd::Constant(2, -std::numeric_limits<double>::infinity());
  try {
    normalize_log_weights({hyp(1, 0), hyp(0, 1)}, lw, 2.5);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("beta=2.5") != std::string::npos);
  }
}

TEST_CASE("log-space posterior equals direct evaluation on random instances") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> kdist(2, 3), mdist(1, 6), ndist(1, 3), hdist(2, 5);
  std::uniform_real_distribution<double> bdist(0.0, 5.0);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int k = kdist(rng), m = mdist(rng), n = ndist(rng), nh = hdist(rng);
    ChoiceSet c;
    while (static_cast<int>(c.size()) < m) c.insert(point(fixtures::uniform_vec(rng, k, -1, 1)));
    std::uniform_int_distribution<int> pick(0, m - 1);
    std::vector<Trajectory> demos;
    for (int i = 0; i < n; ++i) demos.push_back(c[static_cast<std::size_t>(pick(rng))]);
    std::vector<RewardHypothesis> hs;
    for (int h = 0; h < nh; ++h) hs.push_back({fixtures::uniform_vec(rng, k, -1, 1), ""});
    Vecd pr = fixtures::uniform_vec(rng, nh, 0.05, 1.0);
    pr /= pr.sum();
    const double beta = bdist(rng);

    const Belief b = posterior(DemonstrationSet(demos), c, Belief(hs, pr), Rationality(beta), point_features);

    std::vector<std::vector<double>> rd(static_cast<std::size_t>(nh)), rs(static_cast<std::size_t>(nh));
    for (int h = 0; h < nh; ++h) {
      for (const auto& t : demos) rd[static_cast<std::size_t>(h)].push_back(hs[h].weights.dot(point_features(t)));
      for (const auto& t : c) rs[static_cast<std::size_t>(h)].push_back(hs[h].weights.dot(point_features(t)));
    }
    const auto direct = oracle::direct_posterior(std::vector<double>(pr.data(), pr.data() + nh), rd, rs, beta);
    for (int h = 0; h < nh; ++h) worst = std::max(worst, std::abs(direct[static_cast<std::size_t>(h)] - b.prob(h)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("adding members never raises a demo's likelihood") {
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 200; ++inst) {
    const Vecd th = fixtures::uniform_vec(rng, 3, -1, 1);
    Matd set = Matd::Zero(3, 1);
    set.col(0) = fixtures::uniform_vec(rng, 3, -1, 1);
    const Matd demo = set.col(0);
    double prev = log_likelihood(th, demo, set, 2.0);
    CHECK(prev == 0.0);
    for (int grow = 0; grow < 5; ++grow) {
      set.conservativeResize(3, set.cols() + 1);
      set.col(set.cols() - 1) = fixtures::uniform_vec(rng, 3, -1, 1);
      const double next = log_likelihood(th, demo, set, 2.0);
      CHECK(next <= prev + 1e-12);
      prev = next;
    }
  }
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(Vecd::Constant(4, 0.25)) == doctest::Approx(std::log(4.0)));
  CHECK(shannon_entropy(Vecd::Constant(4, 0.25)) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(shannon_entropy(Eigen::Vector3d(0, 1, 0)) == 0.0);
  CHECK(shannon_entropy(Eigen::Vector2d(0.75, 0.25)) == doctest::Approx(0.562335).epsilon(1e-6));
  const Eigen::Vector3d lw(-1.0, 2.0, -std::numeric_limits<double>::infinity());
  const Vecd p = (lw.array() - log_sum_exp(lw)).exp();
  CHECK(entropy_of_log_weights(lw) == doctest::Approx(shannon_entropy(p)).epsilon(1e-12));
}

TEST_CASE("regret and weight error") {
  const FeatureMap f = point_features;
  const RewardHypothesis th = hyp(1, 0);
  const Trajectory star = point(Eigen::Vector2d(2, 0));
  CHECK(regret(th, star, star, f) == 0.0);
  CHECK(regret(th, star, point(Eigen::Vector2d(1.5, 7)), f) == doctest::Approx(0.5));
  CHECK(weight_error(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)) == 0.0);
  CHECK(weight_error(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(weight_error(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.6, 0.8)) == doctest::Approx(0.894427).epsilon(1e-6));
  CHECK_THROWS_AS(weight_error(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("MH is deterministic and keeps samples on the sphere") {
  Matd set(2, 3);
  set << 1, 0, -1,
         0, 1, 0;
  const Matd demo = set.col(0);
  MhConfig cfg;
  cfg.burn_in = 100;
  cfg.samples = 300;
  cfg.seed = 42;
  const MhResult a = mh_sample_posterior(demo, set, 3.0, cfg);
  const MhResult b = mh_sample_posterior(demo, set, 3.0, cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.size() == 300);
  for (Eigen::Index i = 0; i < a.samples.cols(); ++i) CHECK(a.samples.col(i).norm() == doctest::Approx(1.0));
  CHECK(a.mean.norm() == doctest::Approx(1.0));
  cfg.seed = 43;
  CHECK_FALSE(mh_sample_posterior(demo, set, 3.0, cfg).samples == a.samples);
}

TEST_CASE("MH with beta zero is uniform on the circle") {
  Matd set(2, 2);
  set << 1, 0,
         0, 1;
  MhConfig cfg;
  cfg.step_scale = 3.0;
  cfg.seed = 7;
  const MhResult r = mh_sample_posterior(set.col(0), set, 0.0, cfg);
  CHECK(r.acceptance_rate == 1.0);
  constexpr int bins = 12;
  std::vector<int> counts(bins, 0);
  for (Eigen::Index i = 0; i < r.samples.cols(); ++i) {
    const double a = std::atan2(r.samples(1, i), r.samples(0, i)) + std::numbers::pi;
    counts[std::min(bins - 1, static_cast<int>(a / (2 * std::numbers::pi) * bins))]++;
  }
  const double expected = static_cast<double>(r.samples.cols()) / bins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99.9% quantile of chi-square with 11 degrees of freedom
  CHECK(chi2 < 31.26);
  CHECK(std::abs(r.samples.row(0).mean()) < 0.05);
  CHECK(std::abs(r.samples.row(1).mean()) < 0.05);
}

TEST_CASE("MH mean matches a dense grid posterior for k=2") {
  // Demo at angle 0 among 24 points on the unit circle.
  Matd set(2, 24);
  for (int j = 0; j < 24; ++j) set.col(j) = Eigen::Vector2d(std::cos(j * std::numbers::pi / 12), std::sin(j * std::numbers::pi / 12));
  const Matd demo = set.col(0);
  const double beta = 20.0;
  auto log_density = [&](double a) {
    const Eigen::Vector2d th(std::cos(a), std::sin(a));
    const Vecd r = beta * (set.transpose() * th);
    const double m = r.maxCoeff();
    return beta * th.dot(demo.col(0)) - (m + std::log((r.array() - m).exp().sum()));
  };
  const double grid = oracle::grid_mean_angle(log_density, 3600);
  MhConfig cfg;
  cfg.seed = 3;
  const MhResult r = mh_sample_posterior(demo, set, beta, cfg);
  const double got = std::atan2(r.mean(1), r.mean(0));
  CHECK(oracle::angle_between(got, grid) < 0.05);
  CHECK(oracle::angle_between(got, 0.0) < 0.05);
  CHECK_FALSE(r.low_acceptance);
}

TEST_CASE("MH flags low acceptance") {
  Matd set(2, 360);
  for (int j = 0; j < 360; ++j) set.col(j) = Eigen::Vector2d(std::cos(j * std::numbers::pi / 180), std::sin(j * std::numbers::pi / 180));
  MhConfig cfg;
  cfg.step_scale = 50.0;
  cfg.burn_in = 0;
  cfg.samples = 5000;
  cfg.thin = 1;
  const MhResult r = mh_sample_posterior(set.col(0), set, 1e5, cfg);
  CHECK(r.low_acceptance);
  CHECK(r.acceptance_rate < 0.01);
}

TEST_CASE("MH rejects bad configuration") {
  Matd set = Matd::Identity(2, 2);
  MhConfig cfg;
  cfg.thin = 0;
  CHECK_THROWS_AS(mh_sample_posterior(set.col(0), set, 1.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(mh_sample_posterior(Matd::Ones(1, 1), Matd::Ones(1, 1), 1.0, MhConfig{}), std::invalid_argument);
}
