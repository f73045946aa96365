#ifndef HCDESIGN_CLI_HPP
#define HCDESIGN_CLI_HPP

// Command-line front end. run() takes the arguments after the program name and
// returns the exit status: 0 success, 2 invalid configuration or input,
// 3 numeric failure, 1 anything else.
//
// `--config file.json` supplies a flat object keyed by long flag names, e.g.
// {"m": 6, "n": 16, "algo": "bubble"}. Flags given on the command line win.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcdesign/construct.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"
#include "hcdesign/estimation.hpp"
#include "hcdesign/io.hpp"
#include "hcdesign/parallel.hpp"
#include "hcdesign/routes.hpp"
#include "hcdesign/search.hpp"
#include "hcdesign/simulation.hpp"

namespace hcdesign::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

namespace detail {

inline bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return io::format_double(v.get<double>());
  throw ConfigError("config values must be strings, numbers, booleans or arrays of those");
}

// Appends config-file entries for every flag not already on the command line.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  json cfg;
  try {
    cfg = io::read_json_file(*path);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || flag_given(args, key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key);
    if (value.is_array()) {
      for (const auto& v : value) extra.push_back(scalar_text(v));
    } else {
      extra.push_back(scalar_text(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = io::open_out(path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

inline PriorSpec prior_or_isotropic(const std::string& path, int m, double tau2) {
  if (path.empty()) return PriorSpec::isotropic(m, tau2);
  auto prior = io::load_prior(path);
  prior.check_vertices(m);
  return prior;
}

inline void add_common(CLI::App* sub, std::string& config, unsigned& threads) {
  sub->add_option("--config", config, "JSON file with flag values (flags take precedence)");
  sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace detail

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian D-optimal designs over Hamiltonian circuits"};
  app.name("hcdesign");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::string config;
  unsigned threads = default_threads();

  // construct
  int c_m = 6;
  std::string c_from, c_out;
  auto* construct = app.add_subcommand("construct", "expand a half-fraction design to m vertices");
  construct->add_option("--m", c_m, "target vertex count")->required();
  construct->add_option("--from", c_from,
                        "starting design file (default: stored m=5 design, or m=4 when --m 4)");
  construct->add_option("--out", c_out, "design file, '-' for stdout");
  detail::add_common(construct, config, threads);

  // search
  std::string s_algo = "bubble", s_prior, s_out;
  int s_m = 6;
  std::size_t s_n = 16, s_iters = 0, s_restarts = 10;
  std::uint64_t s_seed = 1;
  double s_tau2 = 0.01, s_cooling = 1.0;
  auto* search = app.add_subcommand("search", "search for a Bayesian D-optimal design");
  search->add_option("--algo", s_algo, "bubble or anneal")
      ->check(CLI::IsMember({"bubble", "anneal"}));
  search->add_option("--m", s_m, "vertex count")->required();
  search->add_option("--n", s_n, "run size")->required();
  search->add_option("--iters", s_iters,
                     "passes (bubble) or proposals (anneal); 0 = 100 / 10000");
  search->add_option("--restarts", s_restarts, "independent starts, best kept");
  search->add_option("--seed", s_seed, "random seed");
  search->add_option("--prior", s_prior, "prior JSON (default: mu = 0, R = tau2 * I)");
  search->add_option("--tau2", s_tau2, "prior precision when --prior is absent");
  search->add_option("--cooling", s_cooling, "annealing temperature scale");
  search->add_option("--out", s_out, "design file, '-' for stdout");
  detail::add_common(search, config, threads);

  // eval
  std::string e_design, e_prior, e_out;
  double e_tau2 = 0.01;
  auto* eval = app.add_subcommand("eval", "criterion value and relative D-efficiency of a design");
  eval->add_option("--design", e_design, "design file")->required();
  eval->add_option("--prior", e_prior, "prior JSON (default: mu = 0, R = tau2 * I)");
  eval->add_option("--tau2", e_tau2, "prior precision when --prior is absent");
  eval->add_option("--out", e_out, "JSON output, '-' for stdout");
  detail::add_common(eval, config, threads);

  // estimate
  std::string t_obs, t_method = "bayes", t_prior, t_out;
  double t_lambda = -1.0;
  std::size_t t_folds = 10;
  std::uint64_t t_seed = 1;
  auto* estimate = app.add_subcommand("estimate", "estimate edge costs from observed totals");
  estimate->add_option("--obs", t_obs, "observation CSV (v1..vm,y)")->required();
  estimate->add_option("--method", t_method, "bayes or ridge")
      ->check(CLI::IsMember({"bayes", "ridge"}));
  estimate->add_option("--prior", t_prior, "prior JSON (required for bayes)");
  estimate->add_option("--lambda", t_lambda,
                       "ridge penalty; negative selects it by cross-validation");
  estimate->add_option("--folds", t_folds, "cross-validation folds");
  estimate->add_option("--seed", t_seed, "fold assignment seed");
  estimate->add_option("--out", t_out, "estimate JSON, '-' for stdout");
  detail::add_common(estimate, config, threads);

  // route
  std::string r_algo = "nn", r_beta, r_starts = "depot", r_out;
  std::uint64_t r_seed = 1;
  auto* route = app.add_subcommand("route", "extract a low-cost circuit from edge costs");
  route->add_option("--algo", r_algo, "nn, arb, 2opt or exact")
      ->check(CLI::IsMember({"nn", "arb", "2opt", "exact"}));
  route->add_option("--beta", r_beta, "JSON with 'beta_hat' or 'beta'")->required();
  route->add_option("--starts", r_starts,
                    "nn/2opt: 'depot' (greedy from vertex m), 'all' (best first stop) or a "
                    "vertex number");
  route->add_option("--seed", r_seed, "insertion order seed (arb)");
  route->add_option("--out", r_out, "circuit file, '-' for stdout");
  detail::add_common(route, config, threads);

  // simulate
  ScenarioConfig sim;
  std::string sim_scenario = "a", sim_score = "systematic", sim_out, sim_summary;
  auto* simulate = app.add_subcommand("simulate", "route-cost study over noisy instances");
  simulate->add_option("--scenario", sim_scenario, "a (congestion) or b (noncentral t)")
      ->check(CLI::IsMember({"a", "b"}));
  simulate->add_option("--m", sim.m, "zones");
  simulate->add_option("--n-values", sim.n_values, "run sizes")->delimiter(',');
  simulate->add_option("--replications", sim.replications, "replications per run size");
  simulate->add_option("--tau", sim.tau, "prior scale, R = tau^2 I");
  simulate->add_option("--white-sd", sim.noise.white_sd, "white noise standard deviation");
  simulate->add_option("--design-iters", sim.design_iters, "annealing proposals per design");
  simulate->add_option("--folds", sim.cv_folds, "ridge cross-validation folds");
  simulate->add_option("--score", sim_score,
                       "cost basis for scoring routes: systematic, realized or clean")
      ->check(CLI::IsMember({"systematic", "realized", "clean"}));
  simulate->add_option("--seed", sim.base_seed, "base seed");
  simulate->add_option("--out", sim_out, "results CSV, '-' for stdout");
  simulate->add_option("--summary", sim_summary, "summary JSON");
  detail::add_common(simulate, config, threads);

  // table2
  Table2Config t2;
  int t2_m = 6;
  std::size_t t2_n = 16, t2_trials = 100;
  std::string t2_algo = "bubble", t2_out;
  auto* table2 = app.add_subcommand("table2", "median relative D-efficiency of repeated searches");
  table2->add_option("--m", t2_m, "vertex count")->required();
  table2->add_option("--n", t2_n, "run size")->required();
  table2->add_option("--algo", t2_algo, "bubble or anneal")
      ->check(CLI::IsMember({"bubble", "anneal"}));
  table2->add_option("--trials", t2_trials, "independent best-of-restarts searches");
  table2->add_option("--restarts", t2.restarts, "starts per trial");
  table2->add_option("--iters", t2.max_iter, "passes / proposals; 0 = 100 / 10000");
  table2->add_option("--tau2", t2.tau2, "prior precision, R = tau2 * I");
  table2->add_option("--seed", t2.seed, "seed");
  table2->add_option("--out", t2_out, "JSON output, '-' for stdout");
  detail::add_common(table2, config, threads);

  try {
    auto args = detail::merge_config(argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*construct) {
      Design d = c_from.empty() ? base_design(c_m == 4 ? 4 : 5) : io::load_design(c_from);
      d = expand_to(std::move(d), c_m);
      detail::Output o(c_out, out);
      io::write_design(o.stream(), d);
    } else if (*search) {
      const auto algo = parse_algorithm(s_algo);
      const auto prior = detail::prior_or_isotropic(s_prior, s_m, s_tau2);
      SearchConfig sc;
      sc.max_iter = s_iters ? s_iters : default_iterations(algo);
      sc.restarts = s_restarts;
      sc.seed = s_seed;
      sc.cooling_scale = s_cooling;
      sc.threads = threads;
      const auto res = multi_start(algo, s_m, s_n, prior, sc);
      detail::Output o(s_out, out);
      io::write_design(o.stream(), res.design);
      err << json{{"log_det", res.log_det},
                  {"rel_efficiency", relative_d_efficiency(res.design, prior)}}
                 .dump()
          << '\n';
    } else if (*eval) {
      const auto d = io::load_design(e_design);
      const auto prior = detail::prior_or_isotropic(e_prior, d.m(), e_tau2);
      Eigen::MatrixXd a = moment_matrix(d).entries;
      a.diagonal() += prior.r_diag;
      const double norm_ld = log_det_spd(a);
      const double full_ld = full_design_log_det(d.m(), prior);
      json j{{"m", d.m()},
             {"n", d.n()},
             {"p", d.p()},
             {"log_det", bayes_d_criterion(d, prior)},
             {"normalized_log_det", norm_ld},
             {"full_design_log_det", full_ld},
             {"rel_efficiency", relative_d_efficiency_from_log_det(norm_ld, full_ld, d.p())}};
      detail::Output o(e_out, out);
      o.stream() << j.dump(2) << '\n';
    } else if (*estimate) {
      const auto obs = io::load_observations(t_obs);
      json j;
      if (t_method == "bayes") {
        if (t_prior.empty()) throw ConfigError("--method bayes needs --prior");
        auto prior = io::load_prior(t_prior);
        j = io::estimate_to_json(posterior_mean(obs, prior).beta_hat);
      } else {
        RidgeFit fit;
        if (t_lambda >= 0.0) {
          fit = ridge_fit(obs, t_lambda);
        } else {
          const auto grid = default_ridge_grid(edge_count(obs.m), obs.n());
          fit = ridge_cv(obs, t_folds, grid, t_seed).fit;
        }
        j = io::estimate_to_json(fit.beta, fit.lambda);
        j["intercept"] = fit.intercept;
      }
      detail::Output o(t_out, out);
      o.stream() << j.dump(2) << '\n';
    } else if (*route) {
      const Eigen::VectorXd beta = io::beta_from_json(io::read_json_file(r_beta));
      const int m = vertices_for_edge_count(static_cast<std::size_t>(beta.size()));
      const auto greedy = [&]() {
        if (r_starts == "all") return nearest_neighbor_best(beta, m);
        if (r_starts == "depot") return nearest_neighbor_route(beta, m);
        int first = 0;
        try {
          first = std::stoi(r_starts);
        } catch (const std::exception&) {
          throw ConfigError("--starts must be 'depot', 'all' or a vertex number");
        }
        return nearest_neighbor_route(beta, m, first);
      };
      std::optional<Circuit> c;
      if (r_algo == "nn") c = greedy();
      else if (r_algo == "2opt") c = two_opt_improve(greedy(), beta);
      else if (r_algo == "arb") c = arbitrary_insertion_route(beta, m, r_seed);
      else c = brute_force_optimal(beta, m);
      detail::Output o(r_out, out);
      o.stream() << io::format_circuit(*c) << '\n';
      err << "cost " << io::format_double(circuit_cost(*c, beta)) << '\n';
    } else if (*simulate) {
      sim.scenario = parse_scenario(sim_scenario);
      sim.score = parse_score_basis(sim_score);
      sim.threads = threads;
      const auto res = run_experiment(sim);
      {
        detail::Output o(sim_out, out);
        io::write_results_csv(o.stream(), res.rows);
      }
      if (!sim_summary.empty()) {
        detail::Output o(sim_summary, out);
        o.stream() << io::summary_to_json(res).dump(2) << '\n';
      }
    } else if (*table2) {
      t2.threads = threads;
      const auto res = replicate_table2(t2_m, t2_n, parse_algorithm(t2_algo), t2_trials, t2);
      json j{{"m", res.m},
             {"n", res.n},
             {"algo", to_string(res.algorithm)},
             {"trials", t2_trials},
             {"median", res.median},
             {"efficiencies", res.efficiencies}};
      detail::Output o(t2_out, out);
      o.stream() << j.dump(2) << '\n';
    }
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace hcdesign::cli

#endif  // HCDESIGN_CLI_HPP
