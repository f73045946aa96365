#ifndef HCDESIGN_CIRCUIT_HPP
#define HCDESIGN_CIRCUIT_HPP

// Hamiltonian circuits on the complete graph K_m: canonical form, enumeration,
// edge indexing and the edge-indicator encoding used by every model matrix.
//
// Vertices are 1-based. Edges (j, k) with j < k are numbered 0..C(m,2)-1 in
// lexicographic order (1,2), (1,3), ..., (1,m), (2,3), ..., (m-1,m).

#include <algorithm>
#include <compare>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/error.hpp"

namespace hcdesign {

inline constexpr int kMaxEnumerableVertices = 10;

// Number of undirected edges of K_m.
constexpr std::size_t edge_count(int m) {
  return static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
}

// (m-1)!/2, the number of distinct Hamiltonian circuits on K_m.
constexpr std::size_t circuit_count(int m) {
  std::size_t f = 1;
  for (int i = 2; i < m; ++i) f *= static_cast<std::size_t>(i);
  return m < 3 ? 0 : f / 2;
}

struct EdgeIndex {
  int j = 0;  // smaller endpoint
  int k = 0;  // larger endpoint
  std::size_t linear_index = 0;

  friend bool operator==(const EdgeIndex&, const EdgeIndex&) = default;
};

// Linear index without validation. Requires 1 <= j < k <= m.
constexpr std::size_t edge_offset(int j, int k, int m) {
  const auto jj = static_cast<std::size_t>(j - 1);
  return jj * static_cast<std::size_t>(2 * m - j) / 2 +
         static_cast<std::size_t>(k - j - 1);
}

inline EdgeIndex edge_index(int j, int k, int m) {
  if (j == k) {
    throw InvalidInput("edge (" + std::to_string(j) + "," + std::to_string(k) +
                       ") is a loop");
  }
  if (j < 1 || k < 1 || j > m || k > m) {
    throw InvalidInput("edge (" + std::to_string(j) + "," + std::to_string(k) +
                       ") outside 1.." + std::to_string(m));
  }
  if (j > k) std::swap(j, k);
  return {j, k, edge_offset(j, k, m)};
}

// Inverse of edge_index.
inline EdgeIndex edge_at(std::size_t linear_index, int m) {
  if (linear_index >= edge_count(m)) {
    throw InvalidInput("edge index " + std::to_string(linear_index) +
                       " out of range for m=" + std::to_string(m));
  }
  std::size_t rest = linear_index;
  int j = 1;
  while (rest >= static_cast<std::size_t>(m - j)) {
    rest -= static_cast<std::size_t>(m - j);
    ++j;
  }
  return {j, j + 1 + static_cast<int>(rest), linear_index};
}

// Vertex count inferred from an edge-vector length; throws if p is not C(m,2).
inline int vertices_for_edge_count(std::size_t p) {
  for (int m = 2; edge_count(m) <= p; ++m) {
    if (edge_count(m) == p) return m;
  }
  throw DimensionError("length " + std::to_string(p) +
                       " is not C(m,2) for any m");
}

namespace detail {

inline void check_permutation(std::span<const int> seq) {
  const int m = static_cast<int>(seq.size());
  if (m < 3) {
    throw InvalidInput("a circuit needs at least 3 vertices, got " +
                       std::to_string(m));
  }
  std::vector<char> seen(static_cast<std::size_t>(m) + 1, 0);
  for (int v : seq) {
    if (v < 1 || v > m) {
      throw InvalidInput("vertex " + std::to_string(v) + " outside 1.." +
                         std::to_string(m));
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw InvalidInput("vertex " + std::to_string(v) + " repeated");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

}  // namespace detail

// A Hamiltonian circuit in canonical form: starts at vertex 1 and its second
// vertex is smaller than its last. Only constructible through canonicalize().
class Circuit {
 public:
  int size() const { return static_cast<int>(vertices_.size()); }
  const std::vector<int>& vertices() const { return vertices_; }
  int operator[](std::size_t i) const { return vertices_[i]; }

  friend auto operator<=>(const Circuit&, const Circuit&) = default;
  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  explicit Circuit(std::vector<int> v) : vertices_(std::move(v)) {}
  friend Circuit canonicalize(std::span<const int> seq);
  friend std::vector<Circuit> enumerate_all(int m);

  std::vector<int> vertices_;
};

// Representative of the orbit of `seq` under rotation and reversal.
inline Circuit canonicalize(std::span<const int> seq) {
  detail::check_permutation(seq);
  const std::size_t m = seq.size();
  const auto start =
      static_cast<std::size_t>(std::find(seq.begin(), seq.end(), 1) - seq.begin());
  std::vector<int> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = seq[(start + i) % m];
  if (out[1] > out[m - 1]) std::reverse(out.begin() + 1, out.end());
  return Circuit(std::move(out));
}

inline Circuit canonicalize(std::initializer_list<int> seq) {
  return canonicalize(std::span<const int>(seq.begin(), seq.size()));
}

// All (m-1)!/2 circuits, lexicographically sorted.
inline std::vector<Circuit> enumerate_all(int m) {
  if (m < 3 || m > kMaxEnumerableVertices) {
    throw SizeLimit("enumerate_all supports 3 <= m <= " +
                    std::to_string(kMaxEnumerableVertices) + "; m=" +
                    std::to_string(m) + " has " +
                    std::to_string(m >= 3 ? circuit_count(m) : 0) + " circuits");
  }
  std::vector<Circuit> out;
  out.reserve(circuit_count(m));
  std::vector<int> tail(static_cast<std::size_t>(m - 1));
  std::iota(tail.begin(), tail.end(), 2);
  do {
    if (tail.front() < tail.back()) {
      std::vector<int> v;
      v.reserve(static_cast<std::size_t>(m));
      v.push_back(1);
      v.insert(v.end(), tail.begin(), tail.end());
      out.push_back(Circuit(std::move(v)));
    }
  } while (std::next_permutation(tail.begin(), tail.end()));
  return out;
}

// Linear indices of the m edges of a vertex sequence (closing edge included),
// written in tour order. `seq` must already be a permutation of 1..m.
inline void tour_edges(std::span<const int> seq, std::span<int> out) {
  const int m = static_cast<int>(seq.size());
  for (int i = 0; i < m; ++i) {
    int a = seq[static_cast<std::size_t>(i)];
    int b = seq[static_cast<std::size_t>((i + 1) % m)];
    if (a > b) std::swap(a, b);
    out[static_cast<std::size_t>(i)] = static_cast<int>(edge_offset(a, b, m));
  }
}

inline std::vector<int> tour_edges(std::span<const int> seq) {
  std::vector<int> out(seq.size());
  tour_edges(seq, out);
  return out;
}

inline std::vector<int> tour_edges(const Circuit& c) {
  return tour_edges(std::span<const int>(c.vertices()));
}

// Edge-indicator row x(c) of length C(m,2).
inline Eigen::VectorXd encode(const Circuit& c) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edge_count(c.size())));
  for (int e : tour_edges(c)) x[e] = 1.0;
  return x;
}

inline double circuit_cost(std::span<const int> seq, const Eigen::VectorXd& beta) {
  const int m = static_cast<int>(seq.size());
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    int a = seq[static_cast<std::size_t>(i)];
    int b = seq[static_cast<std::size_t>((i + 1) % m)];
    if (a > b) std::swap(a, b);
    total += beta[static_cast<Eigen::Index>(edge_offset(a, b, m))];
  }
  return total;
}

// Total cost of the circuit, return edge included.
inline double circuit_cost(const Circuit& c, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != edge_count(c.size())) {
    throw DimensionError("cost vector has length " + std::to_string(beta.size()) +
                         ", expected C(" + std::to_string(c.size()) + ",2) = " +
                         std::to_string(edge_count(c.size())));
  }
  return circuit_cost(std::span<const int>(c.vertices()), beta);
}

}  // namespace hcdesign

#endif  // HCDESIGN_CIRCUIT_HPP
