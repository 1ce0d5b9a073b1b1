#pragma once

// Independent reference computations for the tests: dense eigensolves, dense
// Laplacians built entry by entry, and small random graphs.

#include "clusterstab/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <random>
#include <vector>

namespace oracle {

using clusterstab::Edge;
using clusterstab::Pattern;
using clusterstab::PatternMatrix;
using clusterstab::PatternPtr;
using clusterstab::WeightMatrix;

inline Eigen::MatrixXd dense_laplacian(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      L(i, j) = -A(i, j);
      L(i, i) += A(i, j);
    }
  }
  return L;
}

inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues();
}

/// λ_{k+1} - λ_k of L(A) for dense symmetric A (1-based k).
inline double gap(const Eigen::MatrixXd& A, int k) {
  const Eigen::VectorXd ev = eigenvalues(dense_laplacian(A));
  return ev(k) - ev(k - 1);
}

/// Connected random graph: a spanning path plus edges kept with probability p,
/// weights uniform in [lo, hi].
inline WeightMatrix random_graph(int n, double p, std::uint64_t seed, double lo = 0.5, double hi = 1.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (u(rng) < p) edges.push_back({i, j});
    }
  }
  auto pattern = std::make_shared<const Pattern>(n, edges);
  Eigen::VectorXd w(static_cast<Eigen::Index>(pattern->edge_count()));
  for (Eigen::Index e = 0; e < w.size(); ++e) w(e) = lo + (hi - lo) * u(rng);
  return WeightMatrix(pattern, w);
}

inline PatternMatrix random_pattern_matrix(const PatternPtr& pattern, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(pattern->edge_count()));
  for (Eigen::Index e = 0; e < v.size(); ++e) v(e) = g(rng);
  return PatternMatrix(pattern, v);
}

inline Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  }
  return 0.5 * (M + M.transpose());
}

/// Frobenius inner product of dense matrices.
inline double frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

}  // namespace oracle
