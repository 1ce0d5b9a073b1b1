#include "clusterstab/laplacian.hpp"

#include <cmath>
#include <vector>

namespace clusterstab {

double LowRankSym::entry(int i, int j) const {
  return (U.row(i) * S * U.row(j).transpose()).value();
}

Eigen::MatrixXd LowRankSym::to_dense() const { return U * S * U.transpose(); }

double frobenius_inner(const LowRankSym& a, const LowRankSym& b) {
  // tr(Ua Sa Uaᵀ Ub Sb Ubᵀ) = tr(Sa C Sb Cᵀ) with C = Uaᵀ Ub
  const Eigen::MatrixXd c = a.U.transpose() * b.U;
  return (a.S * c * b.S * c.transpose()).trace();
}

double frobenius_norm(const LowRankSym& a) { return std::sqrt(std::max(0.0, frobenius_inner(a, a))); }

SparseMatrix laplacian(const Pattern& pattern, const Eigen::VectorXd& edge_values) {
  const int n = pattern.size();
  const auto& edges = pattern.edges();
  if (static_cast<std::size_t>(edge_values.size()) != edges.size()) {
    throw StructuralError("edge value count does not match pattern");
  }
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * edges.size() + static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = edge_values[static_cast<Eigen::Index>(e)];
    degree[edges[e].i] += w;
    degree[edges[e].j] += w;
    trips.emplace_back(edges[e].i, edges[e].j, -w);
    trips.emplace_back(edges[e].j, edges[e].i, -w);
  }
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, degree[i]);
  SparseMatrix lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

SparseMatrix laplacian(const WeightMatrix& w) { return laplacian(w.pattern(), w.weights()); }

SparseMatrix laplacian(const PatternMatrix& a) { return laplacian(a.pattern(), a.values()); }

Eigen::MatrixXd laplacian_dense(const Eigen::MatrixXd& a, double symmetry_tol) {
  if (a.rows() != a.cols()) throw StructuralError("Laplacian input must be square");
  const double scale = std::max(1.0, a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
    throw StructuralError("Laplacian input must be symmetric");
  }
  Eigen::MatrixXd off = a;
  off.diagonal().setZero();
  Eigen::MatrixXd lap = -off;
  lap.diagonal() = off.rowwise().sum();
  return lap;
}

Eigen::VectorXd laplacian_apply(const Pattern& pattern, const Eigen::VectorXd& edge_values,
                                const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pattern.size());
  const auto& edges = pattern.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = edge_values[static_cast<Eigen::Index>(e)];
    const double d = w * (v[edges[e].i] - v[edges[e].j]);
    out[edges[e].i] += d;
    out[edges[e].j] -= d;
  }
  return out;
}

double laplacian_norm_bound(const Pattern& pattern, const Eigen::VectorXd& edge_values) {
  const int n = pattern.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd abs_sum = Eigen::VectorXd::Zero(n);
  const auto& edges = pattern.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = edge_values[static_cast<Eigen::Index>(e)];
    sum[edges[e].i] += w;
    sum[edges[e].j] += w;
    abs_sum[edges[e].i] += std::abs(w);
    abs_sum[edges[e].j] += std::abs(w);
  }
  double bound = 0.0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(sum[i]) + abs_sum[i]);
  return bound;
}

PatternMatrix laplacian_adjoint(const Eigen::MatrixXd& m, const PatternPtr& pattern) {
  if (m.rows() != m.cols() || m.rows() != pattern->size()) {
    throw StructuralError("adjoint input has the wrong shape");
  }
  const auto& edges = pattern->edges();
  Eigen::VectorXd vals(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int i = edges[e].i;
    const int j = edges[e].j;
    vals[static_cast<Eigen::Index>(e)] = 0.5 * (m(i, i) + m(j, j)) - 0.5 * (m(i, j) + m(j, i));
  }
  return {pattern, std::move(vals)};
}

PatternMatrix laplacian_adjoint(const LowRankSym& m, const PatternPtr& pattern) {
  if (m.size() != pattern->size()) throw StructuralError("adjoint input has the wrong shape");
  const Eigen::MatrixXd us = m.U * m.S;
  const Eigen::VectorXd diag = us.cwiseProduct(m.U).rowwise().sum();
  const auto& edges = pattern->edges();
  Eigen::VectorXd vals(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int i = edges[e].i;
    const int j = edges[e].j;
    vals[static_cast<Eigen::Index>(e)] = 0.5 * (diag[i] + diag[j]) - us.row(i).dot(m.U.row(j));
  }
  return {pattern, std::move(vals)};
}

PatternMatrix project_pattern(const Eigen::MatrixXd& m, const PatternPtr& pattern) {
  if (m.rows() != m.cols() || m.rows() != pattern->size()) {
    throw StructuralError("projection input has the wrong shape");
  }
  const auto& edges = pattern->edges();
  Eigen::VectorXd vals(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    vals[static_cast<Eigen::Index>(e)] = 0.5 * (m(edges[e].i, edges[e].j) + m(edges[e].j, edges[e].i));
  }
  return {pattern, std::move(vals)};
}

PatternMatrix project_pattern(const LowRankSym& m, const PatternPtr& pattern) {
  if (m.size() != pattern->size()) throw StructuralError("projection input has the wrong shape");
  // Symmetrize S so that non-symmetric cores are handled like (M + Mᵀ)/2.
  const Eigen::MatrixXd us = m.U * (0.5 * (m.S + m.S.transpose()));
  const auto& edges = pattern->edges();
  Eigen::VectorXd vals(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    vals[static_cast<Eigen::Index>(e)] = us.row(edges[e].i).dot(m.U.row(edges[e].j));
  }
  return {pattern, std::move(vals)};
}

}  // namespace clusterstab
