#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "hcdesign/estimation.hpp"
#include "hcdesign/search.hpp"

using namespace hcdesign;

namespace {

ObservationSet observe(const Design& d, const Eigen::VectorXd& beta, double sd,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sd);
  ObservationSet obs{d.m(), d.circuits(), Eigen::VectorXd(static_cast<Eigen::Index>(d.n()))};
  for (std::size_t i = 0; i < d.n(); ++i) {
    obs.y[static_cast<Eigen::Index>(i)] = circuit_cost(d[i], beta) + (sd > 0 ? noise(rng) : 0.0);
  }
  return obs;
}

Eigen::VectorXd uniform_vec(Eigen::Index p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(p);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Posterior, EmptyDataReturnsPriorMean) {
  std::mt19937_64 rng(1);
  PriorSpec prior{uniform_vec(10, rng), uniform_vec(10, rng).array() + 0.5};
  const auto est = posterior_mean(ObservationSet::empty(5), prior);
  EXPECT_EQ(est.beta_hat, prior.mu);
  EXPECT_NEAR(est.scatter(0, 0), 1.0 / prior.r_diag[0], 1e-15);
}

TEST(Posterior, NoiseFreeIdentityProbe) {
  std::mt19937_64 rng(2);
  const Eigen::VectorXd beta = uniform_vec(6, rng);
  const auto obs = observe(Design(4, enumerate_all(4)), beta, 0.0, rng);
  const auto est = posterior_mean(obs, PriorSpec::isotropic(4, 1e-8));
  for (std::size_t i = 0; i < obs.n(); ++i) {
    EXPECT_NEAR(posterior_predict(obs.circuits[i], est), obs.y[static_cast<Eigen::Index>(i)], 1e-6);
  }
}

TEST(Posterior, StrongPriorPullsToMean) {
  std::mt19937_64 rng(3);
  const auto d = random_design(6, 30, 5);
  const auto obs = observe(d, uniform_vec(15, rng), 0.1, rng);
  const auto mu = uniform_vec(15, rng);
  const auto est = posterior_mean(obs, PriorSpec::isotropic(mu, 1e10));
  EXPECT_LE((est.beta_hat - mu).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Posterior, ResidualIdentity) {
  std::mt19937_64 rng(4);
  const auto d = random_design(7, 40, 9);
  const auto obs = observe(d, uniform_vec(21, rng), 0.2, rng);
  PriorSpec prior{uniform_vec(21, rng), uniform_vec(21, rng).array() + 0.01};
  const auto est = posterior_mean(obs, prior);
  const auto x = obs.x();
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal() += prior.r_diag;
  const Eigen::VectorXd resid =
      a * est.beta_hat - x.transpose() * obs.y - prior.r_diag.cwiseProduct(prior.mu);
  EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((a * est.scatter - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Posterior, ErrorPaths) {
  std::mt19937_64 rng(5);
  auto obs = observe(Design(4, enumerate_all(4)), uniform_vec(6, rng), 0.0, rng);
  obs.y[1] = std::nan("");
  EXPECT_THROW(posterior_mean(obs, PriorSpec::isotropic(4, 1.0)), InvalidInput);
  obs.y[1] = 1.0;
  EXPECT_THROW(posterior_mean(obs, PriorSpec::isotropic(5, 1.0)), DimensionError);
}

TEST(Posterior, PredictTrivia) {
  const auto c = canonicalize({1, 3, 2, 5, 4});
  EXPECT_EQ(posterior_predict(c, {Eigen::VectorXd::Zero(10), {}}), 0.0);
  const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(10, 1, 10);
  EXPECT_EQ(posterior_predict(c, {mu, {}}), circuit_cost(c, mu));
}

TEST(Ridge, HugePenaltyShrinksToMean) {
  std::mt19937_64 rng(6);
  const auto obs = observe(random_design(6, 30, 1), uniform_vec(15, rng), 0.1, rng);
  const auto fit = ridge_fit(obs, 1e12);
  EXPECT_LE(fit.beta.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fit.intercept, obs.y.mean(), 1e-9);
}

TEST(Ridge, ZeroPenaltyIsOls) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(30, 4);
  for (auto& v : x.reshaped()) v = g(rng);
  Eigen::VectorXd y(30);
  for (auto& v : y) v = g(rng);
  const auto fit = ridge_fit(x, y, 0.0);
  Eigen::MatrixXd xa(30, 5);
  xa << Eigen::VectorXd::Ones(30), x;
  const Eigen::VectorXd ols = xa.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  EXPECT_NEAR(fit.intercept, ols[0], 1e-10);
  EXPECT_LE((fit.beta - ols.tail(4)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ridge, SingularAtZeroPenalty) {
  std::mt19937_64 rng(8);
  const auto obs = observe(Design(6, enumerate_all(6)), uniform_vec(15, rng), 0.0, rng);
  try {
    ridge_fit(obs, 0.0);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda > 0"), std::string::npos);
  }
  EXPECT_THROW(ridge_fit(obs, -1.0), InvalidInput);
}

TEST(Ridge, NoiseFreeRoundTrip) {
  std::mt19937_64 rng(9);
  const auto obs = observe(Design(6, enumerate_all(6)), uniform_vec(15, rng), 0.0, rng);
  const auto fit = ridge_fit(obs, 1e-6);
  for (std::size_t i = 0; i < obs.n(); ++i) {
    EXPECT_NEAR(fit.predict(obs.circuits[i]), obs.y[static_cast<Eigen::Index>(i)], 1e-4);
  }
}

TEST(Ridge, BridgeToPosterior) {
  std::mt19937_64 rng(10);
  const auto obs = observe(random_design(7, 50, 3), uniform_vec(21, rng), 0.3, rng);
  const auto x = obs.x();
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd yc = obs.y.array() - obs.y.mean();
  for (double c : {0.01, 1.0, 30.0}) {
    const auto post = posterior_mean(xc, yc, PriorSpec::isotropic(7, c));
    EXPECT_LE((ridge_fit(x, obs.y, c).beta - post.beta_hat).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(RidgeCv, GridOfOne) {
  std::mt19937_64 rng(11);
  const auto obs = observe(random_design(6, 40, 2), uniform_vec(15, rng), 0.1, rng);
  EXPECT_EQ(ridge_cv(obs, 10, {0.37}, 1).best_lambda, 0.37);
}

TEST(RidgeCv, ErrorsMatchExplicitRefits) {
  std::mt19937_64 rng(12);
  const auto obs = observe(random_design(6, 37, 4), uniform_vec(15, rng), 0.2, rng);
  const std::vector<double> grid{0.001, 0.1, 1.0, 10.0};
  const std::size_t folds = 5;
  const auto res = ridge_cv(obs, folds, grid, 99);

  std::vector<std::size_t> order(obs.n());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuf(99);
  std::shuffle(order.begin(), order.end(), shuf);
  std::vector<std::size_t> fold_of(obs.n());
  for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = k % folds;
  const auto x = obs.x();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sse = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (std::size_t i = 0; i < obs.n(); ++i) {
        (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
      }
      const auto fit = ridge_fit(x(tr, Eigen::all), obs.y(tr), grid[g]);
      for (auto i : te) {
        const double r = obs.y[i] - fit.intercept - x.row(i).dot(fit.beta);
        sse += r * r;
      }
    }
    EXPECT_NEAR(res.cv_error[g], sse / static_cast<double>(obs.n()), 1e-8);
  }
  const auto best = std::min_element(res.cv_error.begin(), res.cv_error.end()) - res.cv_error.begin();
  EXPECT_EQ(res.best_lambda, grid[static_cast<std::size_t>(best)]);
  EXPECT_EQ(res.fit.lambda, res.best_lambda);
}

TEST(RidgeCv, PureNoisePicksLargestPenalty) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  const auto d = random_design(6, 60, 6);
  const auto grid = default_ridge_grid(15, 60);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    ObservationSet obs{6, d.circuits(), Eigen::VectorXd(60)};
    for (auto& v : obs.y) v = g(rng);
    if (ridge_cv(obs, 10, grid, static_cast<std::uint64_t>(t)).best_lambda == grid.back()) ++hits;
  }
  EXPECT_GE(hits, 80);
}

TEST(RidgeCv, StrongSignalPicksSmallPenalty) {
  std::mt19937_64 rng(14);
  const auto d = random_design(6, 60, 7);
  const auto grid = default_ridge_grid(15, 60);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const auto obs = observe(d, uniform_vec(15, rng), 0.01, rng);
    if (ridge_cv(obs, 10, grid, static_cast<std::uint64_t>(t)).best_lambda < grid[50]) ++hits;
  }
  EXPECT_GE(hits, 80);
}

TEST(RidgeCv, ConfigErrors) {
  std::mt19937_64 rng(15);
  const auto obs = observe(random_design(5, 8, 1), uniform_vec(10, rng), 0.1, rng);
  EXPECT_THROW(ridge_cv(obs, 10, {1.0}, 1), ConfigError);
  EXPECT_THROW(ridge_cv(obs, 1, {1.0}, 1), ConfigError);
  EXPECT_THROW(ridge_cv(obs, 4, {}, 1), ConfigError);
  EXPECT_THROW(ridge_cv(obs, 4, {-1.0}, 1), ConfigError);
}

TEST(RidgeCv, DeterministicPerSeed) {
  std::mt19937_64 rng(16);
  const auto obs = observe(random_design(6, 50, 2), uniform_vec(15, rng), 0.3, rng);
  const auto grid = default_ridge_grid(15, 50);
  EXPECT_EQ(ridge_cv(obs, 10, grid, 5).cv_error, ridge_cv(obs, 10, grid, 5).cv_error);
}

TEST(Grid, DefaultSpan) {
  const auto g = default_ridge_grid(190, 95);
  ASSERT_EQ(g.size(), 100u);
  EXPECT_NEAR(g.front(), 2e-4, 1e-16);
  EXPECT_NEAR(g.back(), 200.0, 1e-9);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}
