#ifndef HCDESIGN_SEARCH_HPP
#define HCDESIGN_SEARCH_HPP

// Heuristic design search: adjacent-exchange bubble sort, simulated annealing
// with logarithmic cooling, and best-of-k multi-start orchestration.
//
// Both searches act on rooted rows (vertex 1 in position 0) and only exchange
// positions i and i+1 for 1 <= i <= m-2, so every intermediate row is still a
// Hamiltonian circuit. Rows are canonicalized only when a Design is returned.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/circuit.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"
#include "hcdesign/parallel.hpp"

namespace hcdesign {

enum class Algorithm { bubble, anneal };

inline Algorithm parse_algorithm(const std::string& id) {
  if (id == "bubble") return Algorithm::bubble;
  if (id == "anneal") return Algorithm::anneal;
  throw ConfigError("unknown search algorithm '" + id + "' (expected bubble|anneal)");
}

inline const char* to_string(Algorithm a) {
  return a == Algorithm::bubble ? "bubble" : "anneal";
}

struct SearchConfig {
  // Outer passes for bubble sort, proposals for annealing.
  std::size_t max_iter = 100;
  std::size_t restarts = 1;
  std::uint64_t seed = 1;
  // Annealing temperature at step t is cooling_scale / log(t + 2); zero gives
  // a greedy walk that never accepts a deterioration.
  double cooling_scale = 1.0;
  unsigned threads = 1;
  // Keep the criterion value after every accepted move.
  bool record_trace = false;

  void validate() const {
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    if (!(cooling_scale >= 0.0) || !std::isfinite(cooling_scale)) {
      throw ConfigError("cooling_scale must be finite and >= 0");
    }
  }
};

struct SearchResult {
  Design design;
  double log_det = 0.0;        // log|X'X + R| of `design`
  std::vector<double> trace;   // accepted criterion values, if recorded
  std::size_t accepted = 0;
};

// Maintains (X'X + R)^{-1} and log|X'X + R| for a design of rooted rows under
// adjacent exchanges. Each exchange is a rank-two change (old row out, new row
// in), handled with the determinant lemma and a Woodbury update; the inverse
// is rebuilt from a fresh Cholesky factorization every `refresh_interval`
// accepted moves to bound drift.
class CriterionTracker {
 public:
  CriterionTracker(int m, std::vector<std::vector<int>> rows, const PriorSpec& prior,
                   std::size_t refresh_interval = 256)
      : m_(m),
        p_(static_cast<Eigen::Index>(edge_count(m))),
        rows_(std::move(rows)),
        r_diag_(prior.r_diag),
        refresh_interval_(refresh_interval) {
    prior.check_vertices(m);
    if (rows_.empty()) throw InvalidInput("a design needs at least one run");
    edges_.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      detail::check_permutation(rows_[i]);
      if (static_cast<int>(rows_[i].size()) != m_ || rows_[i][0] != 1) {
        throw InvalidInput("search rows must be rooted permutations of 1..m");
      }
      edges_[i] = tour_edges(rows_[i]);
    }
    refresh();
  }

  int m() const { return m_; }
  std::size_t n() const { return rows_.size(); }
  double log_det() const { return log_det_; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }

  // Change in log|X'X + R| if positions pos and pos+1 of `row` are exchanged.
  double swap_delta(std::size_t row, int pos) const {
    const auto cand = swapped_edges(row, pos);
    const auto& old = edges_[row];
    const double a = quad(cand, cand);
    const double b = quad(cand, old);
    const double c = quad(old, old);
    const double ratio = (1.0 + a) * (1.0 - c) + b * b;
    if (!(ratio > 0.0)) throw NumericError("rank-two update lost positive definiteness");
    return std::log(ratio);
  }

  // Applies the exchange and returns the new log-determinant.
  double apply_swap(std::size_t row, int pos) {
    const auto cand = swapped_edges(row, pos);
    auto& old = edges_[row];
    const double a = quad(cand, cand);
    const double b = quad(cand, old);
    const double c = quad(old, old);
    const double ratio = (1.0 + a) * (1.0 - c) + b * b;
    if (!(ratio > 0.0)) throw NumericError("rank-two update lost positive definiteness");

    auto& seq = rows_[row];
    std::swap(seq[static_cast<std::size_t>(pos)], seq[static_cast<std::size_t>(pos) + 1]);
    if (++since_refresh_ >= refresh_interval_) {
      old = cand;
      refresh();
      return log_det_;
    }

    // B <- B - BU K^{-1} (BU)' with U = [x_new, x_old], K = diag(1,-1) + U'BU.
    Eigen::VectorXd bn = Eigen::VectorXd::Zero(p_);
    Eigen::VectorXd bo = Eigen::VectorXd::Zero(p_);
    for (int e : cand) bn += inverse_.col(e);
    for (int e : old) bo += inverse_.col(e);
    const double k11 = 1.0 + a, k12 = b, k22 = c - 1.0;
    const double det = k11 * k22 - k12 * k12;
    const double i11 = k22 / det, i12 = -k12 / det, i22 = k11 / det;
    inverse_.noalias() -= i11 * bn * bn.transpose();
    inverse_.noalias() -= i12 * (bn * bo.transpose() + bo * bn.transpose());
    inverse_.noalias() -= i22 * bo * bo.transpose();
    old = cand;
    log_det_ += std::log(ratio);
    return log_det_;
  }

  // Recomputes the inverse and log-determinant from scratch.
  void refresh() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p_, p_);
    for (const auto& e : edges_) {
      for (int u : e) {
        for (int v : e) a(u, v) += 1.0;
      }
    }
    a.diagonal() += r_diag_;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("X'X + R is not positive definite");
    log_det_ = 0.0;
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < p_; ++i) log_det_ += 2.0 * std::log(diag[i]);
    inverse_ = llt.solve(Eigen::MatrixXd::Identity(p_, p_));
    since_refresh_ = 0;
  }

  Design design() const {
    std::vector<Circuit> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(canonicalize(r));
    return Design(m_, std::move(out));
  }

 private:
  std::vector<int> swapped_edges(std::size_t row, int pos) const {
    const auto& seq = rows_[row];
    const auto i = static_cast<std::size_t>(pos);
    const auto mm = static_cast<std::size_t>(m_);
    std::vector<int> e = edges_[row];
    const int prev = seq[i - 1];
    const int x = seq[i];
    const int y = seq[i + 1];
    const int next = seq[(i + 2) % mm];
    e[i - 1] = edge_id(prev, y);
    e[i + 1] = edge_id(x, next);
    return e;
  }

  int edge_id(int u, int v) const {
    if (u > v) std::swap(u, v);
    return static_cast<int>(edge_offset(u, v, m_));
  }

  double quad(const std::vector<int>& u, const std::vector<int>& v) const {
    double s = 0.0;
    for (int i : u) {
      for (int j : v) s += inverse_(i, j);
    }
    return s;
  }

  int m_;
  Eigen::Index p_;
  std::vector<std::vector<int>> rows_;
  std::vector<std::vector<int>> edges_;
  Eigen::VectorXd r_diag_;
  Eigen::MatrixXd inverse_;
  double log_det_ = 0.0;
  std::size_t refresh_interval_;
  std::size_t since_refresh_ = 0;
};

namespace detail {

inline std::vector<std::vector<int>> rooted_rows(const Design& d) {
  std::vector<std::vector<int>> rows;
  rows.reserve(d.n());
  for (const auto& c : d.circuits()) rows.push_back(c.vertices());
  return rows;
}

inline std::vector<std::vector<int>> random_rows(int m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> rows(n, std::vector<int>(static_cast<std::size_t>(m)));
  for (auto& r : rows) {
    std::iota(r.begin(), r.end(), 1);
    std::shuffle(r.begin() + 1, r.end(), rng);
  }
  return rows;
}

// Annealing draws from a stream distinct from the initial-design stream.
inline constexpr std::uint64_t kAnnealStream = 0xA11EA1ULL;

}  // namespace detail

// n circuits from uniformly shuffled (2..m) prefixed by vertex 1.
inline Design random_design(int m, std::size_t n, std::uint64_t seed) {
  if (m < 3) throw InvalidInput("random_design needs m >= 3");
  if (n < 1) throw InvalidInput("random_design needs n >= 1");
  std::vector<Circuit> out;
  out.reserve(n);
  for (const auto& r : detail::random_rows(m, n, seed)) out.push_back(canonicalize(r));
  return Design(m, std::move(out));
}

// Greedy adjacent-exchange search. Each row is swept over positions 2..m
// (1-based), accepting any exchange that strictly increases log|X'X + R|;
// a row is re-swept until a sweep accepts nothing. Stops after max_iter outer
// passes or the first pass without an accepted exchange.
inline SearchResult bubble_sort_search(const Design& d0, const PriorSpec& prior,
                                       const SearchConfig& cfg) {
  cfg.validate();
  constexpr double kMinGain = 1e-10;
  CriterionTracker tracker(d0.m(), detail::rooted_rows(d0), prior);
  SearchResult out{d0, tracker.log_det(), {}, 0};
  const int m = d0.m();
  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    bool any = false;
    for (std::size_t r = 0; r < tracker.n(); ++r) {
      bool swept = true;
      while (swept) {
        swept = false;
        for (int pos = 1; pos + 1 < m; ++pos) {
          if (tracker.swap_delta(r, pos) > kMinGain) {
            const double value = tracker.apply_swap(r, pos);
            ++out.accepted;
            if (cfg.record_trace) out.trace.push_back(value);
            swept = any = true;
          }
        }
      }
    }
    if (!any) break;
  }
  out.design = tracker.design();
  out.log_det = bayes_d_criterion(out.design, prior);
  return out;
}

// Simulated annealing over adjacent exchanges. Improvements are always
// accepted; a deterioration delta < 0 is accepted with probability
// exp(delta * log(t + 2) / cooling_scale). Returns the best design visited.
inline SearchResult simulated_annealing_search(const Design& d0, const PriorSpec& prior,
                                               const SearchConfig& cfg) {
  cfg.validate();
  CriterionTracker tracker(d0.m(), detail::rooted_rows(d0), prior);
  std::mt19937_64 rng(mix_seed(cfg.seed, detail::kAnnealStream));
  std::uniform_int_distribution<std::size_t> pick_row(0, tracker.n() - 1);
  std::uniform_int_distribution<int> pick_pos(1, std::max(1, d0.m() - 2));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SearchResult out{d0, tracker.log_det(), {}, 0};
  auto best_rows = tracker.rows();
  double best = tracker.log_det();
  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    const std::size_t r = pick_row(rng);
    const int pos = pick_pos(rng);
    const double u = unif(rng);
    const double delta = tracker.swap_delta(r, pos);
    bool accept = delta >= 0.0;
    if (!accept && cfg.cooling_scale > 0.0) {
      accept = u < std::exp(delta * std::log(static_cast<double>(t) + 2.0) / cfg.cooling_scale);
    }
    if (!accept) continue;
    const double value = tracker.apply_swap(r, pos);
    ++out.accepted;
    if (cfg.record_trace) out.trace.push_back(value);
    if (value > best) {
      best = value;
      best_rows = tracker.rows();
    }
  }
  std::vector<Circuit> rows;
  rows.reserve(best_rows.size());
  for (const auto& r : best_rows) rows.push_back(canonicalize(r));
  out.design = Design(d0.m(), std::move(rows));
  out.log_det = bayes_d_criterion(out.design, prior);
  return out;
}

inline SearchResult run_search(Algorithm algo, const Design& d0, const PriorSpec& prior,
                               const SearchConfig& cfg) {
  return algo == Algorithm::bubble ? bubble_sort_search(d0, prior, cfg)
                                   : simulated_annealing_search(d0, prior, cfg);
}

// Best of cfg.restarts independent searches. Restart r starts from
// random_design(m, n, seed + r) and runs with seed + r, so the result does not
// depend on the thread count. Ties go to the lowest restart index.
inline SearchResult multi_start(Algorithm algo, int m, std::size_t n, const PriorSpec& prior,
                                const SearchConfig& cfg) {
  cfg.validate();
  prior.check_vertices(m);
  std::vector<std::optional<SearchResult>> runs(cfg.restarts);
  parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
    SearchConfig local = cfg;
    local.seed = cfg.seed + r;
    local.restarts = 1;
    runs[r] = run_search(algo, random_design(m, n, local.seed), prior, local);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r]->log_det > runs[best]->log_det) best = r;
  }
  return std::move(*runs[best]);
}

}  // namespace hcdesign

#endif  // HCDESIGN_SEARCH_HPP
