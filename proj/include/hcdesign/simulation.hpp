#ifndef HCDESIGN_SIMULATION_HPP
#define HCDESIGN_SIMULATION_HPP

// Delivery-route simulation study and design-efficiency replication.
//
// An experiment fixes one random instance (zones on the unit square, Euclidean
// edge costs) and, for each run size n, one annealed design. Each replication
// redraws the congestion noise, simulates the route totals of the design,
// estimates edge costs three ways (prior only, cross-validated ridge, Bayes),
// extracts a route with each heuristic and scores it on the replication's true
// edge costs (distances plus congestion shocks, white noise excluded).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/circuit.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"
#include "hcdesign/estimation.hpp"
#include "hcdesign/parallel.hpp"
#include "hcdesign/routes.hpp"
#include "hcdesign/search.hpp"

namespace hcdesign {

enum class Scenario { a, b };
enum class Method { prior, frequentist, bayes };
enum class Heuristic { nn, arb, two_opt };
// Which edge costs a returned route is scored on: the replication's true
// costs (distances plus congestion shocks), those plus white noise, or the
// clean distances.
enum class ScoreBasis { systematic, realized, clean };

inline constexpr Method kMethods[] = {Method::prior, Method::frequentist, Method::bayes};
inline constexpr Heuristic kHeuristics[] = {Heuristic::nn, Heuristic::arb, Heuristic::two_opt};

inline const char* to_string(Scenario s) { return s == Scenario::a ? "a" : "b"; }

inline const char* to_string(Method m) {
  switch (m) {
    case Method::prior: return "prior";
    case Method::frequentist: return "frequentist";
    case Method::bayes: return "bayes";
  }
  return "?";
}

inline const char* to_string(Heuristic h) {
  switch (h) {
    case Heuristic::nn: return "nn";
    case Heuristic::arb: return "arb";
    case Heuristic::two_opt: return "2opt";
  }
  return "?";
}

inline const char* to_string(ScoreBasis s) {
  switch (s) {
    case ScoreBasis::systematic: return "systematic";
    case ScoreBasis::realized: return "realized";
    case ScoreBasis::clean: return "clean";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "a") return Scenario::a;
  if (s == "b") return Scenario::b;
  throw ConfigError("unknown scenario '" + s + "' (expected a|b)");
}

inline ScoreBasis parse_score_basis(const std::string& s) {
  if (s == "systematic") return ScoreBasis::systematic;
  if (s == "realized") return ScoreBasis::realized;
  if (s == "clean") return ScoreBasis::clean;
  throw ConfigError("unknown score basis '" + s + "' (expected systematic|realized|clean)");
}

struct NoiseParams {
  double white_sd = 0.1;
  double congestion_mean = 0.5;  // scenario (a)
  double congestion_sd = 0.25;   // scenario (a)
};

struct ScenarioConfig {
  int m = 20;
  Scenario scenario = Scenario::a;
  NoiseParams noise;
  std::vector<std::size_t> n_values{49, 96, 191, 381};
  std::size_t replications = 100;
  double tau = 0.1;  // prior precision R = tau^2 I
  std::uint64_t base_seed = 1;
  std::size_t design_iters = 10000;
  std::size_t cv_folds = 10;
  ScoreBasis score = ScoreBasis::systematic;
  unsigned threads = 1;

  void validate() const {
    if (m < 4) throw ConfigError("simulation needs m >= 4");
    if (!(noise.white_sd >= 0.0) || !(noise.congestion_sd >= 0.0)) {
      throw ConfigError("noise standard deviations must be >= 0");
    }
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
    if (n_values.empty()) throw ConfigError("no run sizes given");
    for (auto n : n_values) {
      if (n < cv_folds) {
        throw ConfigError("run size " + std::to_string(n) + " is smaller than the " +
                          std::to_string(cv_folds) + " cross-validation folds");
      }
    }
    if (design_iters < 1) throw ConfigError("design_iters must be >= 1");
  }
};

struct Instance {
  Eigen::MatrixX2d points;   // zone coordinates, row i is vertex i+1
  Eigen::VectorXd beta_star; // Euclidean edge costs
};

// m zones i.i.d. uniform on [0,1]^2 with Euclidean edge costs.
inline Instance generate_instance(int m, std::uint64_t seed) {
  if (m < 3) throw InvalidInput("an instance needs m >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Instance out{Eigen::MatrixX2d(m, 2), Eigen::VectorXd(static_cast<Eigen::Index>(edge_count(m)))};
  for (int i = 0; i < m; ++i) {
    out.points(i, 0) = unif(rng);
    out.points(i, 1) = unif(rng);
  }
  for (int j = 1; j <= m; ++j) {
    for (int k = j + 1; k <= m; ++k) {
      out.beta_star[static_cast<Eigen::Index>(edge_offset(j, k, m))] =
          (out.points.row(j - 1) - out.points.row(k - 1)).norm();
    }
  }
  return out;
}

// Linear-interpolation sample quantile (the usual "type 7" definition).
inline double quantile(std::vector<double> v, double prob) {
  if (v.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

namespace detail {

inline double normal_draw(std::mt19937_64& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

inline void add_white_noise(Eigen::VectorXd& costs, double sd, std::mt19937_64& rng) {
  for (Eigen::Index e = 0; e < costs.size(); ++e) costs[e] += normal_draw(rng, 0.0, sd);
}

}  // namespace detail

// Noncentral t with 3 degrees of freedom: (Z + delta) / sqrt(V / 3).
inline double noncentral_t3(double delta, std::mt19937_64& rng) {
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double v = std::chi_squared_distribution<double>(3.0)(rng);
  return (z + delta) / std::sqrt(v / 3.0);
}

// One draw of perturbed edge costs. `systematic` holds the congestion shocks
// only; `realized` adds the white noise and is what route totals are built from.
struct PerturbedCosts {
  Eigen::VectorXd systematic;
  Eigen::VectorXd realized;
};

// Scenario (a): edges strictly below the 25th percentile of beta_star get a
// N(congestion_mean, congestion_sd^2) shock, then every edge gets white noise.
inline PerturbedCosts draw_scenario_a(const Eigen::VectorXd& beta_star, std::uint64_t seed,
                                      const NoiseParams& noise = {}) {
  vertices_for_edge_count(static_cast<std::size_t>(beta_star.size()));
  const double q25 = quantile({beta_star.begin(), beta_star.end()}, 0.25);
  std::mt19937_64 rng(seed);
  PerturbedCosts out{beta_star, {}};
  for (Eigen::Index e = 0; e < beta_star.size(); ++e) {
    if (beta_star[e] < q25) {
      out.systematic[e] += detail::normal_draw(rng, noise.congestion_mean, noise.congestion_sd);
    }
  }
  out.realized = out.systematic;
  detail::add_white_noise(out.realized, noise.white_sd, rng);
  return out;
}

// Scenario (b): every edge gets a noncentral t_3 shock with noncentrality
// 1 / beta_star, then white noise.
inline PerturbedCosts draw_scenario_b(const Eigen::VectorXd& beta_star, std::uint64_t seed,
                                      const NoiseParams& noise = {}) {
  const int m = vertices_for_edge_count(static_cast<std::size_t>(beta_star.size()));
  for (Eigen::Index e = 0; e < beta_star.size(); ++e) {
    if (!(beta_star[e] > 0.0)) {
      const auto edge = edge_at(static_cast<std::size_t>(e), m);
      throw InvalidInput("edge (" + std::to_string(edge.j) + "," + std::to_string(edge.k) +
                         ") has non-positive cost; noncentrality 1/cost is undefined");
    }
  }
  std::mt19937_64 rng(seed);
  PerturbedCosts out{beta_star, {}};
  for (Eigen::Index e = 0; e < beta_star.size(); ++e) {
    out.systematic[e] += noncentral_t3(1.0 / beta_star[e], rng);
  }
  out.realized = out.systematic;
  detail::add_white_noise(out.realized, noise.white_sd, rng);
  return out;
}

inline Eigen::VectorXd noise_scenario_a(const Eigen::VectorXd& beta_star, std::uint64_t seed,
                                        const NoiseParams& noise = {}) {
  return draw_scenario_a(beta_star, seed, noise).realized;
}

inline Eigen::VectorXd noise_scenario_b(const Eigen::VectorXd& beta_star, std::uint64_t seed,
                                        const NoiseParams& noise = {}) {
  return draw_scenario_b(beta_star, seed, noise).realized;
}

inline PerturbedCosts draw_scenario(Scenario s, const Eigen::VectorXd& beta_star,
                                    std::uint64_t seed, const NoiseParams& noise = {}) {
  return s == Scenario::a ? draw_scenario_a(beta_star, seed, noise)
                          : draw_scenario_b(beta_star, seed, noise);
}

// y_i = total of circuit i under `perturbed`.
inline ObservationSet simulate_observations(const Design& d, const Eigen::VectorXd& perturbed) {
  if (static_cast<std::size_t>(perturbed.size()) != d.p()) {
    throw DimensionError("cost vector has length " + std::to_string(perturbed.size()) +
                         ", design needs " + std::to_string(d.p()));
  }
  ObservationSet obs{d.m(), d.circuits(), Eigen::VectorXd(static_cast<Eigen::Index>(d.n()))};
  for (std::size_t i = 0; i < d.n(); ++i) {
    obs.y[static_cast<Eigen::Index>(i)] = circuit_cost(d[i], perturbed);
  }
  return obs;
}

struct ReplicationResult {
  std::size_t rep = 0;
  Method method = Method::prior;
  Heuristic heuristic = Heuristic::nn;
  std::size_t n = 0;
  Scenario scenario = Scenario::a;
  // NaN when the estimate for this method could not be computed.
  double true_cost = std::numeric_limits<double>::quiet_NaN();
};

// Everything that is fixed across replications of one (instance, n) cell.
struct ExperimentCell {
  Instance instance;
  Design design;
};

namespace detail {

inline constexpr std::uint64_t kInstanceStream = 0x1257A11CEULL;
inline constexpr std::uint64_t kDesignStream = 0xDE5161ULL;
inline constexpr std::uint64_t kCvStream = 1;
inline constexpr std::uint64_t kInsertionStream = 2;

}  // namespace detail

inline std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t rep) {
  return mix_seed(base_seed, rep);
}

// The instance shared by every cell of an experiment.
inline Instance experiment_instance(const ScenarioConfig& cfg) {
  return generate_instance(cfg.m, mix_seed(cfg.base_seed, detail::kInstanceStream));
}

// Annealed n-run design used for every replication of the cell.
inline Design experiment_design(const ScenarioConfig& cfg, std::size_t n) {
  const auto prior = PriorSpec::isotropic(cfg.m, cfg.tau * cfg.tau);
  SearchConfig sc;
  sc.max_iter = cfg.design_iters;
  sc.seed = mix_seed(cfg.base_seed, detail::kDesignStream + n);
  return simulated_annealing_search(random_design(cfg.m, n, sc.seed), prior, sc).design;
}

inline Eigen::VectorXd estimate_costs(Method method, const ObservationSet& obs,
                                      const Eigen::VectorXd& prior_mu, const ScenarioConfig& cfg,
                                      std::uint64_t cv_seed) {
  switch (method) {
    case Method::prior:
      return prior_mu;
    case Method::frequentist: {
      const auto grid = default_ridge_grid(edge_count(obs.m), obs.n());
      return ridge_cv(obs, cfg.cv_folds, grid, cv_seed).fit.beta;
    }
    case Method::bayes:
      return posterior_mean(obs, PriorSpec::isotropic(prior_mu, cfg.tau * cfg.tau)).beta_hat;
  }
  throw ConfigError("unknown estimation method");
}

inline Circuit extract_route(Heuristic h, const Eigen::VectorXd& beta, int m,
                             std::uint64_t seed) {
  switch (h) {
    case Heuristic::nn:
      return nearest_neighbor_best(beta, m);
    case Heuristic::arb:
      return arbitrary_insertion_route(beta, m, seed);
    case Heuristic::two_opt:
      return two_opt_improve(nearest_neighbor_best(beta, m), beta);
  }
  throw ConfigError("unknown heuristic");
}

// Nine results (method x heuristic) for one replication of one cell. A method
// whose estimate fails yields NaN costs for its three rows.
inline std::vector<ReplicationResult> run_replication(const ScenarioConfig& cfg,
                                                      const ExperimentCell& cell,
                                                      std::size_t rep) {
  const std::uint64_t seed = replication_seed(cfg.base_seed, rep);
  const PerturbedCosts costs =
      draw_scenario(cfg.scenario, cell.instance.beta_star, seed, cfg.noise);
  const ObservationSet obs = simulate_observations(cell.design, costs.realized);
  const Eigen::VectorXd& score_costs = cfg.score == ScoreBasis::systematic ? costs.systematic
                                       : cfg.score == ScoreBasis::realized ? costs.realized
                                                                           : cell.instance.beta_star;

  std::vector<ReplicationResult> out;
  out.reserve(9);
  for (Method method : kMethods) {
    std::optional<Eigen::VectorXd> beta_hat;
    try {
      beta_hat = estimate_costs(method, obs, cell.instance.beta_star, cfg,
                                mix_seed(seed, detail::kCvStream));
    } catch (const Error&) {
      beta_hat.reset();
    }
    for (Heuristic h : kHeuristics) {
      ReplicationResult r{rep, method, h, cell.design.n(), cfg.scenario};
      if (beta_hat) {
        const auto route =
            extract_route(h, *beta_hat, cfg.m, mix_seed(seed, detail::kInsertionStream));
        r.true_cost = circuit_cost(route, score_costs);
      }
      out.push_back(r);
    }
  }
  return out;
}

struct CellSummary {
  std::size_t n = 0;
  Method method = Method::prior;
  Heuristic heuristic = Heuristic::nn;
  std::size_t count = 0;  // non-missing replications
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ExperimentResult {
  ScenarioConfig config;
  std::vector<ReplicationResult> rows;  // ordered by n, rep, method, heuristic
  std::vector<CellSummary> summary;     // ordered by n, method, heuristic

  const CellSummary& cell(std::size_t n, Method m, Heuristic h) const {
    for (const auto& c : summary) {
      if (c.n == n && c.method == m && c.heuristic == h) return c;
    }
    throw InvalidInput("no summary cell for n=" + std::to_string(n));
  }
};

inline std::vector<CellSummary> summarize(const std::vector<ReplicationResult>& rows) {
  std::map<std::tuple<std::size_t, int, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.n, static_cast<int>(r.method), static_cast<int>(r.heuristic)}];
    if (std::isfinite(r.true_cost)) g.push_back(r.true_cost);
  }
  std::vector<CellSummary> out;
  for (const auto& [key, costs] : groups) {
    CellSummary s;
    s.n = std::get<0>(key);
    s.method = static_cast<Method>(std::get<1>(key));
    s.heuristic = static_cast<Heuristic>(std::get<2>(key));
    s.count = costs.size();
    if (!costs.empty()) {
      s.median = quantile(costs, 0.5);
      s.q1 = quantile(costs, 0.25);
      s.q3 = quantile(costs, 0.75);
      s.min = *std::min_element(costs.begin(), costs.end());
      s.max = *std::max_element(costs.begin(), costs.end());
    } else {
      s.median = s.q1 = s.q3 = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(s);
  }
  return out;
}

// Full study: one instance, one design per n, cfg.replications replications
// per n. Replications run in parallel; output order is fixed.
inline ExperimentResult run_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  ExperimentResult out{cfg, {}, {}};
  const Instance instance = experiment_instance(cfg);
  for (std::size_t n : cfg.n_values) {
    const ExperimentCell cell{instance, experiment_design(cfg, n)};
    std::vector<std::vector<ReplicationResult>> per_rep(cfg.replications);
    parallel_for(cfg.replications, cfg.threads,
                 [&](std::size_t rep) { per_rep[rep] = run_replication(cfg, cell, rep); });
    for (auto& rows : per_rep) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  out.summary = summarize(out.rows);
  return out;
}

struct Table2Config {
  std::size_t restarts = 10;
  // Passes for bubble sort, proposals for annealing; 0 picks the default
  // (100 passes, 10000 proposals).
  std::size_t max_iter = 0;
  double tau2 = 0.01;
  std::uint64_t seed = 7;
  unsigned threads = 1;
};

struct Table2Result {
  int m = 0;
  std::size_t n = 0;
  Algorithm algorithm = Algorithm::bubble;
  double median = 0.0;
  std::vector<double> efficiencies;  // one per trial, in trial order
};

inline std::size_t default_iterations(Algorithm a) {
  return a == Algorithm::bubble ? 100 : 10000;
}

// Median relative D-efficiency of `trials` independent best-of-restarts
// searches under R = tau2 * I.
inline Table2Result replicate_table2(int m, std::size_t n, Algorithm algo, std::size_t trials,
                                     const Table2Config& cfg) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto prior = PriorSpec::isotropic(m, cfg.tau2);
  const double full = full_design_log_det(m, prior);
  Table2Result out{m, n, algo, 0.0, std::vector<double>(trials)};
  parallel_for(trials, cfg.threads, [&](std::size_t t) {
    SearchConfig sc;
    sc.max_iter = cfg.max_iter ? cfg.max_iter : default_iterations(algo);
    sc.restarts = cfg.restarts;
    sc.seed = mix_seed(cfg.seed, t);
    const auto best = multi_start(algo, m, n, prior, sc);
    Eigen::MatrixXd a = moment_matrix(best.design).entries;
    a.diagonal() += prior.r_diag;
    out.efficiencies[t] = relative_d_efficiency_from_log_det(log_det_spd(a), full, edge_count(m));
  });
  out.median = median(out.efficiencies);
  return out;
}

}  // namespace hcdesign

#endif  // HCDESIGN_SIMULATION_HPP
