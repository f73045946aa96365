#ifndef HCDESIGN_ESTIMATION_HPP
#define HCDESIGN_ESTIMATION_HPP

// Edge-cost estimation from observed route totals: the conjugate-normal
// posterior mean (X'X + R)^{-1}(X'y + R mu) and ridge regression with an
// unpenalized intercept, optionally tuned by k-fold cross-validation.
//
// X built from circuits is never full column rank (every vertex has degree
// two), so coefficients are not identified; compare fitted totals instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/circuit.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"

namespace hcdesign {

// Observed totals y_i for circuits_i. Observation noise is N(0, sigma^2) with
// sigma^2 left unestimated; the posterior scatter is reported unscaled.
struct ObservationSet {
  int m = 0;
  std::vector<Circuit> circuits;
  Eigen::VectorXd y;

  std::size_t n() const { return circuits.size(); }

  static ObservationSet empty(int m) { return {m, {}, Eigen::VectorXd(0)}; }

  void validate() const {
    if (m < 3) throw InvalidInput("observations need m >= 3");
    if (static_cast<std::size_t>(y.size()) != circuits.size()) {
      throw DimensionError("observation set has " + std::to_string(circuits.size()) +
                           " circuits but " + std::to_string(y.size()) + " totals");
    }
    for (std::size_t i = 0; i < circuits.size(); ++i) {
      if (circuits[i].size() != m) {
        throw InvalidInput("observation " + std::to_string(i) + " is not a circuit on " +
                           std::to_string(m) + " vertices");
      }
      if (!std::isfinite(y[static_cast<Eigen::Index>(i)])) {
        throw InvalidInput("observation " + std::to_string(i) + " has a non-finite total");
      }
    }
  }

  Eigen::MatrixXd x() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n()),
                                                static_cast<Eigen::Index>(edge_count(m)));
    for (std::size_t i = 0; i < n(); ++i) {
      for (int e : tour_edges(circuits[i])) out(static_cast<Eigen::Index>(i), e) = 1.0;
    }
    return out;
  }
};

struct PosteriorEstimate {
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd scatter;  // (X'X + R)^{-1}
};

// Posterior mean for an arbitrary design matrix.
inline PosteriorEstimate posterior_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const PriorSpec& prior) {
  prior.validate();
  if (x.cols() != prior.mu.size()) {
    throw DimensionError("design matrix has " + std::to_string(x.cols()) +
                         " columns, prior has " + std::to_string(prior.mu.size()));
  }
  if (x.rows() != y.size()) throw DimensionError("X and y disagree on the run count");
  if (!y.allFinite()) throw InvalidInput("observed totals contain NaN or infinity");
  if (x.rows() == 0) {
    return {prior.mu, prior.r_diag.cwiseInverse().asDiagonal().toDenseMatrix()};
  }
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal() += prior.r_diag;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError("X'X + R is not positive definite");
  const Eigen::VectorXd rhs = x.transpose() * y + prior.r_diag.cwiseProduct(prior.mu);
  const auto p = a.rows();
  return {llt.solve(rhs), llt.solve(Eigen::MatrixXd::Identity(p, p))};
}

inline PosteriorEstimate posterior_mean(const ObservationSet& obs, const PriorSpec& prior) {
  obs.validate();
  prior.check_vertices(obs.m);
  return posterior_mean(obs.x(), obs.y, prior);
}

// Predicted total x(c)' beta_hat.
inline double posterior_predict(const Circuit& c, const PosteriorEstimate& est) {
  return circuit_cost(c, est.beta_hat);
}

struct RidgeFit {
  double intercept = 0.0;
  Eigen::VectorXd beta;
  double lambda = 0.0;

  double predict(const Circuit& c) const { return intercept + circuit_cost(c, beta); }
};

// argmin ||y - b0 - X beta||^2 + lambda ||beta||^2, intercept unpenalized.
inline RidgeFit ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("ridge penalty must be finite and >= 0");
  }
  if (x.rows() != y.size()) throw DimensionError("X and y disagree on the run count");
  if (x.rows() == 0) throw InvalidInput("ridge regression needs at least one observation");
  if (!y.allFinite()) throw InvalidInput("observed totals contain NaN or infinity");
  const Eigen::RowVectorXd xbar = x.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;

  Eigen::VectorXd beta;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
    if (qr.rank() < xc.cols()) {
      throw NumericError("X'X is singular (rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(xc.cols()) + "); use a penalty lambda > 0");
    }
    beta = qr.solve(yc);
  } else {
    Eigen::MatrixXd a = xc.transpose() * xc;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("ridge system is not positive definite");
    beta = llt.solve(xc.transpose() * yc);
  }
  return {ybar - xbar.dot(beta), std::move(beta), lambda};
}

inline RidgeFit ridge_fit(const ObservationSet& obs, double lambda) {
  obs.validate();
  return ridge_fit(obs.x(), obs.y, lambda);
}

// 100 log-spaced penalties over [1e-4, 1e2] * (p / n).
inline std::vector<double> default_ridge_grid(std::size_t p, std::size_t n,
                                              std::size_t count = 100) {
  const double scale = static_cast<double>(p) / static_cast<double>(std::max<std::size_t>(n, 1));
  std::vector<double> grid(count);
  const double lo = std::log10(1e-4), hi = std::log10(1e2);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = scale * std::pow(10.0, lo + t * (hi - lo));
  }
  return grid;
}

struct RidgeCvResult {
  double best_lambda = 0.0;
  RidgeFit fit;
  std::vector<double> cv_error;  // mean held-out squared error per grid entry
};

// k-fold cross-validated ridge. Rows are shuffled with `seed` and dealt into
// folds round-robin; the penalty with the smallest pooled held-out squared
// error wins (first in grid order on ties) and is refit on all rows.
inline RidgeCvResult ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              std::size_t folds, const std::vector<double>& grid,
                              std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (n < folds) {
    throw ConfigError("cross-validation with " + std::to_string(folds) + " folds needs n >= " +
                      std::to_string(folds) + ", got " + std::to_string(n));
  }
  if (grid.empty()) throw ConfigError("penalty grid is empty");
  for (double l : grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("penalties must be finite and >= 0");
  }
  if (x.rows() != y.size()) throw DimensionError("X and y disagree on the run count");
  if (!y.allFinite()) throw InvalidInput("observed totals contain NaN or infinity");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = k % folds;

  std::vector<double> sse(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    }
    const Eigen::MatrixXd xtr = x(train, Eigen::all);
    const Eigen::VectorXd ytr = y(train);
    const Eigen::RowVectorXd xbar = xtr.colwise().mean();
    const double ybar = ytr.mean();
    const Eigen::MatrixXd xc = xtr.rowwise() - xbar;
    const Eigen::VectorXd yc = ytr.array() - ybar;

    // beta(lambda) = V diag(s / (s^2 + lambda)) U' yc
    Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    const Eigen::VectorXd w = svd.matrixU().transpose() * yc;
    const Eigen::MatrixXd z = (x(test, Eigen::all).rowwise() - xbar) * svd.matrixV();
    const Eigen::VectorXd yte = y(test);
    const double tol = s.size() > 0 ? s[0] * 1e-10 * static_cast<double>(std::max(xc.rows(), xc.cols())) : 0.0;

    Eigen::VectorXd coef(s.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        coef[i] = s[i] > tol ? s[i] / (s[i] * s[i] + grid[g]) * w[i] : 0.0;
      }
      const Eigen::VectorXd resid = (yte.array() - ybar).matrix() - z * coef;
      sse[g] += resid.squaredNorm();
    }
  }

  RidgeCvResult out;
  out.cv_error.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.cv_error[g] = sse[g] / static_cast<double>(n);
    if (out.cv_error[g] < out.cv_error[best]) best = g;
  }
  out.best_lambda = grid[best];
  out.fit = ridge_fit(x, y, out.best_lambda);
  return out;
}

inline RidgeCvResult ridge_cv(const ObservationSet& obs, std::size_t folds,
                              const std::vector<double>& grid, std::uint64_t seed) {
  obs.validate();
  return ridge_cv(obs.x(), obs.y, folds, grid, seed);
}

}  // namespace hcdesign

#endif  // HCDESIGN_ESTIMATION_HPP
