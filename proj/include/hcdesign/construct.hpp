#ifndef HCDESIGN_CONSTRUCT_HPP
#define HCDESIGN_CONSTRUCT_HPP

// Exact constructions of optimal fractional designs: stored base designs, the
// recursive half-fraction expansion and an exhaustive-search oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/circuit.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"

namespace hcdesign {

inline constexpr double kMaxExhaustiveSubsets = 1e7;

enum class Sampling { without_replacement, with_replacement };

namespace detail {

inline double binomial(double n, double k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) -
                             std::lgamma(n - k + 1)));
}

// Advances idx to the next combination (strictly increasing) or multiset
// (non-decreasing) of values in [0, pool). Returns false after the last one.
inline bool next_selection(std::vector<std::size_t>& idx, std::size_t pool,
                           Sampling mode) {
  const std::size_t n = idx.size();
  for (std::size_t pos = n; pos-- > 0;) {
    const std::size_t limit =
        mode == Sampling::without_replacement ? pool - (n - pos) : pool - 1;
    if (idx[pos] < limit) {
      ++idx[pos];
      for (std::size_t q = pos + 1; q < n; ++q) {
        idx[q] = mode == Sampling::without_replacement ? idx[q - 1] + 1 : idx[q - 1];
      }
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Best n-run design drawn from the full set of circuits, by log|X'X + R|.
// Selections are visited in lexicographic order and only a strictly larger
// criterion replaces the incumbent, so ties resolve to the first selection.
inline Design exhaustive_optimal(int m, std::size_t n, const PriorSpec& prior,
                                 Sampling mode = Sampling::without_replacement) {
  prior.check_vertices(m);
  if (n == 0) throw InvalidInput("exhaustive_optimal needs n >= 1");
  const auto pool = enumerate_all(m);
  const double total =
      mode == Sampling::without_replacement
          ? detail::binomial(static_cast<double>(pool.size()), static_cast<double>(n))
          : detail::binomial(static_cast<double>(pool.size() + n - 1),
                             static_cast<double>(n));
  if (mode == Sampling::without_replacement && n > pool.size()) {
    throw InvalidInput("cannot pick " + std::to_string(n) + " distinct circuits out of " +
                       std::to_string(pool.size()));
  }
  if (total > kMaxExhaustiveSubsets) {
    throw SizeLimit("exhaustive search over " + std::to_string(total) +
                    " selections exceeds the 1e7 guard");
  }

  const auto p = static_cast<Eigen::Index>(edge_count(m));
  std::vector<std::vector<int>> edges;
  edges.reserve(pool.size());
  for (const auto& c : pool) edges.push_back(tour_edges(c));

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = mode == Sampling::without_replacement ? i : 0;
  }
  std::vector<std::size_t> best_idx = idx;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd a(p, p);
  do {
    a.setZero();
    a.diagonal() = prior.r_diag;
    for (std::size_t i : idx) {
      for (int u : edges[i]) {
        for (int v : edges[i]) a(u, v) += 1.0;
      }
    }
    const double value = log_det_spd(a);
    if (!std::isfinite(best) || value > best + 1e-12 * std::max(1.0, std::abs(best))) {
      best = value;
      best_idx = idx;
    }
  } while (detail::next_selection(idx, pool.size(), mode));

  std::vector<Circuit> rows;
  rows.reserve(n);
  for (std::size_t i : best_idx) rows.push_back(pool[i]);
  return Design(m, std::move(rows));
}

// Stored optimal base designs for the recursive construction. m = 5 is the
// six-run half fraction; m = 4 comes from exhaustive search over six-run
// multisets (there are only three circuits on K_4).
inline Design base_design(int m) {
  if (m == 5) {
    const int rows[6][5] = {{1, 2, 4, 3, 5}, {1, 2, 3, 5, 4}, {1, 2, 5, 4, 3},
                            {1, 5, 2, 3, 4}, {1, 3, 2, 4, 5}, {1, 3, 5, 2, 4}};
    std::vector<Circuit> out;
    for (const auto& r : rows) out.push_back(canonicalize(std::span<const int>(r, 5)));
    return Design(5, std::move(out));
  }
  if (m == 4) {
    return exhaustive_optimal(4, 6, PriorSpec::isotropic(4, 1e-6),
                              Sampling::with_replacement);
  }
  throw InvalidInput("no stored base design for m=" + std::to_string(m) +
                     "; use recursive_expand from m=5 or a search algorithm");
}

// One step of the half-fraction recursion: every row of an (m-1)-vertex design
// yields m-1 rows, its successive clockwise rotations (a_1..a_{m-1} ->
// a_{m-1}, a_1..a_{m-2}) shifted up by one and prefixed with vertex 1.
inline Design recursive_expand(const Design& d) {
  const int prev = d.m();
  if (prev < 3) throw InvalidInput("recursive_expand needs m-1 >= 3");
  const int m = prev + 1;
  std::vector<Circuit> out;
  out.reserve(d.n() * static_cast<std::size_t>(prev));
  std::vector<int> row(static_cast<std::size_t>(prev));
  std::vector<int> next(static_cast<std::size_t>(m));
  for (const auto& c : d.circuits()) {
    row = c.vertices();
    for (int r = 0; r < prev; ++r) {
      next[0] = 1;
      for (int i = 0; i < prev; ++i) next[static_cast<std::size_t>(i + 1)] = row[static_cast<std::size_t>(i)] + 1;
      out.push_back(canonicalize(next));
      std::rotate(row.rbegin(), row.rbegin() + 1, row.rend());
    }
  }
  return Design(m, std::move(out));
}

// Expands `d` repeatedly until it has `m` vertices.
inline Design expand_to(Design d, int m) {
  if (m < d.m()) {
    throw InvalidInput("cannot shrink a design from m=" + std::to_string(d.m()) +
                       " to m=" + std::to_string(m));
  }
  while (d.m() < m) d = recursive_expand(d);
  return d;
}

}  // namespace hcdesign

#endif  // HCDESIGN_CONSTRUCT_HPP
