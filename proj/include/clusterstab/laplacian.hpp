#pragma once

#include "clusterstab/graph.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace clusterstab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric matrix in factored form U S Uᵀ (U is n x r, S is r x r).
struct LowRankSym {
  Eigen::MatrixXd U;
  Eigen::MatrixXd S;

  int size() const { return static_cast<int>(U.rows()); }
  int rank() const { return static_cast<int>(U.cols()); }
  double entry(int i, int j) const;
  /// Dense n x n reconstruction. Intended for tests and small n only.
  Eigen::MatrixXd to_dense() const;
};

/// Frobenius inner product of two factored symmetric matrices in O(n r²).
double frobenius_inner(const LowRankSym& a, const LowRankSym& b);
double frobenius_norm(const LowRankSym& a);

/// L(A) = diag(A1) - A for a symmetric matrix with the given edge values.
SparseMatrix laplacian(const Pattern& pattern, const Eigen::VectorXd& edge_values);
SparseMatrix laplacian(const WeightMatrix& w);
SparseMatrix laplacian(const PatternMatrix& a);

/// Dense Laplacian of a dense symmetric matrix; diagonal entries are ignored.
/// Non-square or asymmetric input raises StructuralError.
Eigen::MatrixXd laplacian_dense(const Eigen::MatrixXd& a, double symmetry_tol = 1e-12);

/// y = L(A) v without forming L.
Eigen::VectorXd laplacian_apply(const Pattern& pattern, const Eigen::VectorXd& edge_values,
                                const Eigen::VectorXd& v);

/// Upper bound for the spectral norm of L(A): its infinity norm.
double laplacian_norm_bound(const Pattern& pattern, const Eigen::VectorXd& edge_values);

/// Adjoint of the Laplacian map with respect to the Frobenius product:
/// edge value (M_ii + M_jj)/2 - (M_ij + M_ji)/2.
PatternMatrix laplacian_adjoint(const Eigen::MatrixXd& m, const PatternPtr& pattern);
PatternMatrix laplacian_adjoint(const LowRankSym& m, const PatternPtr& pattern);

/// Restriction of (M + Mᵀ)/2 to the pattern.
PatternMatrix project_pattern(const Eigen::MatrixXd& m, const PatternPtr& pattern);
PatternMatrix project_pattern(const LowRankSym& m, const PatternPtr& pattern);

}  // namespace clusterstab
