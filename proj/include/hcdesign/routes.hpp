#ifndef HCDESIGN_ROUTES_HPP
#define HCDESIGN_ROUTES_HPP

// Route extraction from (estimated) edge costs: nearest neighbor rooted at the
// depot m, arbitrary insertion, a 2-opt improver and an exact enumeration
// oracle for small m.
//
// The 2-opt improver stands in for chained Lin-Kernighan, which is not
// implemented here.

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
#include "hcdesign/error.hpp"

namespace hcdesign {

namespace detail {

inline void check_costs(const Eigen::VectorXd& beta, int m) {
  if (m < 3) throw InvalidInput("routes need m >= 3, got " + std::to_string(m));
  if (static_cast<std::size_t>(beta.size()) != edge_count(m)) {
    throw DimensionError("cost vector has length " + std::to_string(beta.size()) +
                         ", expected C(" + std::to_string(m) + ",2) = " +
                         std::to_string(edge_count(m)));
  }
  if (!beta.allFinite()) throw InvalidInput("cost vector contains NaN or infinity");
}

inline double edge_cost(const Eigen::VectorXd& beta, int u, int v, int m) {
  if (u > v) std::swap(u, v);
  return beta[static_cast<Eigen::Index>(edge_offset(u, v, m))];
}

}  // namespace detail

// Greedy tour from the depot m. With `first_vertex` the second stop is forced;
// afterwards the cheapest unvisited neighbour of the last stop is appended,
// ties going to the lowest vertex number.
inline Circuit nearest_neighbor_route(const Eigen::VectorXd& beta, int m,
                                      std::optional<int> first_vertex = std::nullopt) {
  detail::check_costs(beta, m);
  std::vector<int> path{m};
  std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
  used[static_cast<std::size_t>(m)] = 1;
  if (first_vertex) {
    const int f = *first_vertex;
    if (f < 1 || f >= m) {
      throw InvalidInput("first vertex " + std::to_string(f) + " must lie in 1.." +
                         std::to_string(m - 1));
    }
    path.push_back(f);
    used[static_cast<std::size_t>(f)] = 1;
  }
  while (static_cast<int>(path.size()) < m) {
    const int last = path.back();
    int pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int u = 1; u <= m; ++u) {
      if (used[static_cast<std::size_t>(u)]) continue;
      const double c = detail::edge_cost(beta, last, u, m);
      if (pick == 0 || c < best) {
        best = c;
        pick = u;
      }
    }
    path.push_back(pick);
    used[static_cast<std::size_t>(pick)] = 1;
  }
  return canonicalize(path);
}

// Nearest neighbor from every first stop 1..m-1; cheapest under `beta` wins,
// lowest first stop on ties.
inline Circuit nearest_neighbor_best(const Eigen::VectorXd& beta, int m) {
  detail::check_costs(beta, m);
  std::optional<Circuit> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int f = 1; f < m; ++f) {
    auto c = nearest_neighbor_route(beta, m, f);
    const double cost = circuit_cost(c, beta);
    if (!best || cost < best_cost) {
      best_cost = cost;
      best = std::move(c);
    }
  }
  return *best;
}

// Arbitrary insertion: a random 3-cycle, then the remaining vertices in random
// order, each inserted where beta_iu + beta_uj - beta_ij is smallest.
inline Circuit arbitrary_insertion_route(const Eigen::VectorXd& beta, int m,
                                         std::uint64_t seed) {
  detail::check_costs(beta, m);
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> tour(order.begin(), order.begin() + 3);
  tour.reserve(static_cast<std::size_t>(m));
  for (std::size_t idx = 3; idx < order.size(); ++idx) {
    const int u = order[idx];
    std::size_t at = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tour.size(); ++k) {
      const int i = tour[k];
      const int j = tour[(k + 1) % tour.size()];
      const double inc = detail::edge_cost(beta, i, u, m) + detail::edge_cost(beta, u, j, m) -
                         detail::edge_cost(beta, i, j, m);
      if (inc < best) {
        best = inc;
        at = k;
      }
    }
    tour.insert(tour.begin() + static_cast<std::ptrdiff_t>(at) + 1, u);
  }
  return canonicalize(tour);
}

// Best-improvement 2-opt: each pass applies the single segment reversal with
// the largest cost reduction; stops at a local optimum or after max_passes.
inline Circuit two_opt_improve(const Circuit& c, const Eigen::VectorXd& beta,
                               std::size_t max_passes = 1000) {
  const int m = c.size();
  detail::check_costs(beta, m);
  std::vector<int> t = c.vertices();
  const auto w = [&](int u, int v) { return detail::edge_cost(beta, u, v, m); };
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    double best_gain = 1e-12;
    int bi = -1, bj = -1;
    for (int i = 0; i + 2 < m; ++i) {
      for (int j = i + 2; j < m; ++j) {
        if (i == 0 && j == m - 1) continue;
        const int a = t[static_cast<std::size_t>(i)];
        const int b = t[static_cast<std::size_t>(i + 1)];
        const int x = t[static_cast<std::size_t>(j)];
        const int y = t[static_cast<std::size_t>((j + 1) % m)];
        const double gain = w(a, b) + w(x, y) - w(a, x) - w(b, y);
        if (gain > best_gain) {
          best_gain = gain;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    std::reverse(t.begin() + bi + 1, t.begin() + bj + 1);
  }
  return canonicalize(t);
}

// Exact minimum-cost circuit by enumeration (m <= 10); the lexicographically
// smallest circuit wins ties.
inline Circuit brute_force_optimal(const Eigen::VectorXd& beta, int m) {
  detail::check_costs(beta, m);
  if (m > kMaxEnumerableVertices) {
    throw SizeLimit("brute_force_optimal supports m <= " +
                    std::to_string(kMaxEnumerableVertices) + ", got m=" + std::to_string(m));
  }
  const auto all = enumerate_all(m);
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double cost = circuit_cost(std::span<const int>(all[i].vertices()), beta);
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return all[best];
}

// Worst-case ratio guaranteed for nearest neighbor on metric instances:
// 0.5 * ceil(log2 m) + 0.5.
inline double nn_ratio_bound(int m) {
  int bits = 0;
  while ((1 << bits) < m) ++bits;
  return 0.5 * bits + 0.5;
}

// Throws InvalidInput naming the first triple that breaks the triangle
// inequality (beyond a relative tolerance of 1e-12).
inline void check_metric(const Eigen::VectorXd& beta, int m) {
  detail::check_costs(beta, m);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k <= m; ++k) {
        if (k == i) continue;
        const double lhs = detail::edge_cost(beta, i, j, m) + detail::edge_cost(beta, i, k, m);
        const double rhs = detail::edge_cost(beta, j, k, m);
        if (lhs < rhs - 1e-12 * std::max(1.0, std::abs(rhs))) {
          throw InvalidInput("costs violate the triangle inequality at (" + std::to_string(i) +
                             "," + std::to_string(j) + "," + std::to_string(k) + ")");
        }
      }
    }
  }
  for (Eigen::Index e = 0; e < beta.size(); ++e) {
    if (beta[e] < 0.0) throw InvalidInput("metric costs must be non-negative");
  }
}

struct NnBoundReport {
  double max_ratio = 0.0;     // worst NN route over all first stops / optimum
  double bound = 0.0;         // nn_ratio_bound(m)
  double optimal_cost = 0.0;
  bool within_bound = true;
};

inline NnBoundReport nn_bound_check(const Eigen::VectorXd& beta, int m) {
  check_metric(beta, m);
  NnBoundReport out;
  out.bound = nn_ratio_bound(m);
  out.optimal_cost = circuit_cost(brute_force_optimal(beta, m), beta);
  for (int f = 1; f < m; ++f) {
    const double cost = circuit_cost(nearest_neighbor_route(beta, m, f), beta);
    const double ratio = out.optimal_cost > 0.0 ? cost / out.optimal_cost : 1.0;
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  out.within_bound = out.max_ratio <= out.bound + 1e-12;
  return out;
}

}  // namespace hcdesign

#endif  // HCDESIGN_ROUTES_HPP
