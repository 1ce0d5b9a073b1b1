#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace clusterstab {

/// Raised when an input violates a structural requirement (shape, symmetry,
/// sign, pattern membership).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unordered vertex pair, stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/**
 * Off-diagonal sparsity structure of an undirected graph on n vertices.
 *
 * Edges are kept once, as (i, j) with i < j, in lexicographic order. Every
 * per-edge value array in the library is indexed by the position of the edge
 * in edges(). The incidence lists give, for each vertex, its neighbours in
 * increasing order together with the index of the connecting edge.
 */
class Pattern {
 public:
  struct Incidence {
    int neighbor;
    int edge;
  };

  Pattern() = default;

  /// Normalizes the orientation of each pair, sorts and removes duplicates.
  /// Self-loops and out-of-range indices raise StructuralError.
  Pattern(int n, std::vector<Edge> edges);

  int size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Incidence> incident(int v) const;

  /// Index of edge {i, j}, if present.
  std::optional<std::size_t> find(int i, int j) const;
  bool contains(int i, int j) const { return find(i, j).has_value(); }

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
};

using PatternPtr = std::shared_ptr<const Pattern>;

/**
 * Symmetric matrix supported on a Pattern. Values are sign-unrestricted and
 * indexed like Pattern::edges(); the diagonal is identically zero.
 *
 * The Frobenius inner product counts both (i, j) and (j, i).
 */
class PatternMatrix {
 public:
  PatternMatrix() = default;
  explicit PatternMatrix(PatternPtr pattern);
  PatternMatrix(PatternPtr pattern, Eigen::VectorXd values);

  const Pattern& pattern() const { return *pattern_; }
  const PatternPtr& pattern_ptr() const noexcept { return pattern_; }
  int size() const { return pattern_ ? pattern_->size() : 0; }

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }

  double operator()(int i, int j) const;

  double frobenius_norm() const;
  double dot(const PatternMatrix& other) const;
  PatternMatrix normalized() const;
  Eigen::MatrixXd to_dense() const;

  PatternMatrix& operator+=(const PatternMatrix& other);
  PatternMatrix& operator-=(const PatternMatrix& other);
  PatternMatrix& operator*=(double s);

  friend PatternMatrix operator+(PatternMatrix a, const PatternMatrix& b) { return a += b; }
  friend PatternMatrix operator-(PatternMatrix a, const PatternMatrix& b) { return a -= b; }
  friend PatternMatrix operator*(double s, PatternMatrix a) { return a *= s; }
  friend PatternMatrix operator*(PatternMatrix a, double s) { return a *= s; }
  friend PatternMatrix operator-(PatternMatrix a) { return a *= -1.0; }

 private:
  void check_compatible(const PatternMatrix& other) const;

  PatternPtr pattern_;
  Eigen::VectorXd values_;
};

/// Frobenius inner product of two matrices on the same pattern.
inline double inner(const PatternMatrix& a, const PatternMatrix& b) { return a.dot(b); }

/**
 * Nonnegative symmetric weight matrix of an undirected graph.
 *
 * Off-diagonal weights live on the pattern. Diagonal weights are optional and
 * never enter the Laplacian (diag(W1) - W cancels them); they are carried only
 * so that stored-entry counts match the source data.
 */
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(PatternPtr pattern, Eigen::VectorXd weights, Eigen::VectorXd diagonal = {});

  /// Builds from a dense matrix; entries below `drop_below` in magnitude are
  /// treated as structural zeros. Asymmetry beyond `symmetry_tol` (relative to
  /// the largest entry) or negative entries raise StructuralError.
  static WeightMatrix from_dense(const Eigen::MatrixXd& dense, double symmetry_tol = 1e-12,
                                 double drop_below = 0.0);

  const Pattern& pattern() const { return *pattern_; }
  const PatternPtr& pattern_ptr() const noexcept { return pattern_; }
  int size() const { return pattern_ ? pattern_->size() : 0; }

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// Empty when the matrix carries no diagonal entries.
  const Eigen::VectorXd& diagonal() const noexcept { return diagonal_; }

  /// Stored nonzeros of the full symmetric matrix, diagonal included.
  std::size_t nnz() const;
  /// Frobenius norm of the off-diagonal part.
  double frobenius_norm() const;

  PatternMatrix as_pattern_matrix() const { return {pattern_, weights_}; }
  /// Edge values of W + eps * E (possibly negative).
  Eigen::VectorXd perturbed(double eps, const PatternMatrix& E) const;
  Eigen::MatrixXd to_dense(bool include_diagonal = true) const;

  /// Leading m x m principal submatrix.
  WeightMatrix principal_minor(int m) const;

  friend bool operator==(const WeightMatrix& a, const WeightMatrix& b);

 private:
  PatternPtr pattern_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd diagonal_;
};

/// Number of connected components by graph traversal.
int component_count(const Pattern& pattern);
int component_count(const WeightMatrix& w);

/// Component id for every vertex, ids assigned in order of first vertex.
std::vector<int> component_labels(const Pattern& pattern);

}  // namespace clusterstab
