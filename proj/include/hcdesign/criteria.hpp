#ifndef HCDESIGN_CRITERIA_HPP
#define HCDESIGN_CRITERIA_HPP

// Designs, priors, model matrices and the Bayesian D-criterion.
//
// All determinants are handled on the log scale through a Cholesky
// factorization; |X'X + R| overflows a double long before p = C(10,2).

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hcdesign/circuit.hpp"
#include "hcdesign/error.hpp"

namespace hcdesign {

// An ordered multiset of circuits on a common vertex count.
class Design {
 public:
  Design(int m, std::vector<Circuit> circuits) : m_(m), circuits_(std::move(circuits)) {
    check();
  }

  explicit Design(std::vector<Circuit> circuits)
      : m_(circuits.empty() ? 0 : circuits.front().size()), circuits_(std::move(circuits)) {
    check();
  }

  int m() const { return m_; }
  std::size_t n() const { return circuits_.size(); }
  std::size_t p() const { return edge_count(m_); }
  const std::vector<Circuit>& circuits() const { return circuits_; }
  const Circuit& operator[](std::size_t i) const { return circuits_[i]; }

  friend bool operator==(const Design&, const Design&) = default;

 private:
  void check() const {
    if (circuits_.empty()) throw InvalidInput("a design needs at least one run");
    for (const auto& c : circuits_) {
      if (c.size() != m_) {
        throw InvalidInput("design mixes m=" + std::to_string(m_) + " with a circuit on " +
                           std::to_string(c.size()) + " vertices");
      }
    }
  }

  int m_;
  std::vector<Circuit> circuits_;
};

// Normal prior N(mu, R^{-1}) on the edge costs; R is diagonal.
struct PriorSpec {
  Eigen::VectorXd mu;
  Eigen::VectorXd r_diag;

  int m() const { return vertices_for_edge_count(static_cast<std::size_t>(mu.size())); }

  void validate() const {
    if (mu.size() != r_diag.size()) {
      throw DimensionError("prior mu has length " + std::to_string(mu.size()) +
                           " but r_diag has " + std::to_string(r_diag.size()));
    }
    vertices_for_edge_count(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index i = 0; i < r_diag.size(); ++i) {
      if (!(r_diag[i] > 0.0) || !std::isfinite(r_diag[i])) {
        throw InvalidInput("prior precision r_diag[" + std::to_string(i) +
                           "] must be positive and finite");
      }
      if (!std::isfinite(mu[i])) {
        throw InvalidInput("prior mean mu[" + std::to_string(i) + "] is not finite");
      }
    }
  }

  void check_vertices(int m) const {
    validate();
    if (static_cast<std::size_t>(mu.size()) != edge_count(m)) {
      throw DimensionError("prior has " + std::to_string(mu.size()) +
                           " edges, design needs C(" + std::to_string(m) +
                           ",2) = " + std::to_string(edge_count(m)));
    }
  }

  // R = precision * I with the given mean (zero when omitted).
  static PriorSpec isotropic(int m, double precision) {
    const auto p = static_cast<Eigen::Index>(edge_count(m));
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Constant(p, precision)};
  }

  static PriorSpec isotropic(Eigen::VectorXd mu, double precision) {
    const auto p = mu.size();
    return {std::move(mu), Eigen::VectorXd::Constant(p, precision)};
  }
};

struct MomentMatrix {
  Eigen::MatrixXd entries;
  bool normalized = true;  // divided by the run count
};

inline Eigen::MatrixXd model_matrix(const Design& d) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.n()),
                                            static_cast<Eigen::Index>(d.p()));
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (int e : tour_edges(d[i])) x(static_cast<Eigen::Index>(i), e) = 1.0;
  }
  return x;
}

// X'X accumulated from the sparse rows.
inline Eigen::MatrixXd information_matrix(const Design& d) {
  const auto p = static_cast<Eigen::Index>(d.p());
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  for (const auto& c : d.circuits()) {
    const auto edges = tour_edges(c);
    for (int a : edges) {
      for (int b : edges) xtx(a, b) += 1.0;
    }
  }
  return xtx;
}

inline MomentMatrix moment_matrix(const Design& d) {
  return {information_matrix(d) / static_cast<double>(d.n()), true};
}

// log|A| for symmetric positive definite A.
inline double log_det_spd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError("matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double s = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) s += std::log(diag[i]);
  return 2.0 * s;
}

// log|X'X + R|.
inline double bayes_d_criterion(const Design& d, const PriorSpec& prior) {
  prior.check_vertices(d.m());
  Eigen::MatrixXd a = information_matrix(d);
  a.diagonal() += prior.r_diag;
  return log_det_spd(a);
}

// Q(ij,kl) = 0 on the diagonal, 2 for disjoint edges, 1 for edges sharing a
// vertex.
inline Eigen::MatrixXi q_matrix(int m) {
  if (m < 3) throw InvalidInput("q_matrix needs m >= 3, got " + std::to_string(m));
  const auto p = static_cast<Eigen::Index>(edge_count(m));
  Eigen::MatrixXi q(p, p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto e = edge_at(static_cast<std::size_t>(r), m);
    for (Eigen::Index c = 0; c < p; ++c) {
      const auto f = edge_at(static_cast<std::size_t>(c), m);
      if (r == c) {
        q(r, c) = 0;
      } else if (e.j != f.j && e.j != f.k && e.k != f.j && e.k != f.k) {
        q(r, c) = 2;
      } else {
        q(r, c) = 1;
      }
    }
  }
  return q;
}

// Per-run moment matrix of the full design, in closed form:
// 2/(m-1) I + 2/((m-1)(m-2)) Q.
inline MomentMatrix full_moment_matrix(int m) {
  if (m < 3) {
    throw InvalidInput("full_moment_matrix needs m >= 3, got " + std::to_string(m));
  }
  const double md = m;
  const auto p = static_cast<Eigen::Index>(edge_count(m));
  Eigen::MatrixXd out = (2.0 / ((md - 1.0) * (md - 2.0))) * q_matrix(m).cast<double>();
  out.diagonal() += Eigen::VectorXd::Constant(p, 2.0 / (md - 1.0));
  return {std::move(out), true};
}

// log|M_f + R| using the closed-form full-design moment matrix.
inline double full_design_log_det(int m, const PriorSpec& prior) {
  prior.check_vertices(m);
  Eigen::MatrixXd a = full_moment_matrix(m).entries;
  a.diagonal() += prior.r_diag;
  return log_det_spd(a);
}

// (|X'X/n + R| / |M_f + R|)^(1/p), evaluated from log-determinants. Pass
// `full_log_det` to reuse a precomputed denominator.
inline double relative_d_efficiency_from_log_det(double design_log_det,
                                                 double full_log_det, std::size_t p) {
  return std::exp((design_log_det - full_log_det) / static_cast<double>(p));
}

inline double relative_d_efficiency(const Design& d, const PriorSpec& prior) {
  prior.check_vertices(d.m());
  Eigen::MatrixXd a = moment_matrix(d).entries;
  a.diagonal() += prior.r_diag;
  return relative_d_efficiency_from_log_det(log_det_spd(a),
                                            full_design_log_det(d.m(), prior), d.p());
}

}  // namespace hcdesign

#endif  // HCDESIGN_CRITERIA_HPP
